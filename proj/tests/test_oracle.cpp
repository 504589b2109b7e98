#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "fixtures.hpp"
#include "slmdp/envs.hpp"
#include "slmdp/oracle.hpp"
#include "slmdp/rng.hpp"

using slmdp::Emulator;
using slmdp::LinearMdpModel;
using slmdp::Policy;
using slmdp::Vec;

namespace {

LinearMdpModel small_stochastic_model(std::uint64_t seed, std::size_t H,
                                      std::size_t states) {
  slmdp::SparseEnvConfig cfg;
  cfg.d = 6;
  cfg.k = 2;
  cfg.A = 2;
  cfg.H = H;
  cfg.seed = seed;
  cfg.latent_states = states;
  return slmdp::gen_sparse_env(cfg);
}

std::vector<Vec> indicator_of(const LinearMdpModel& m, std::size_t x0) {
  std::vector<Vec> c(m.num_states(), Vec(m.A, 0.0));
  for (std::size_t a = 0; a < m.A; ++a) c[x0][a] = 1.0;
  return c;
}

double expected_functional(const LinearMdpModel& m, const Policy& p, std::size_t h,
                           const std::vector<Vec>& c) {
  auto occ = slmdp::state_action_visitation(m, p, h);
  double v = 0.0;
  for (std::size_t x = 0; x < m.num_states(); ++x)
    for (std::size_t a = 0; a < m.A; ++a) v += occ[x][a] * c[x][a];
  return v;
}

// Emulator made of the model's own transition factors at step h+1.
Emulator ground_truth_emulator(const LinearMdpModel& m, std::size_t h) {
  Emulator em;
  em.h = h;
  for (std::size_t x = 0; x < m.num_states(); ++x) {
    em.mus.push_back(m.mu[h + 1][x]);
    em.witnesses.push_back(x);
  }
  em.budget = m.Cnrm;
  return em;
}

}  // namespace

TEST_CASE("visitation basics") {
  SUBCASE("step 1 equals the initial distribution") {
    LinearMdpModel m = small_stochastic_model(11, 3, 3);
    Vec d1 = slmdp::visitation_at(m, Policy::uniform(), 1);
    for (std::size_t x = 0; x < m.num_states(); ++x) CHECK(d1[x] == m.init[x]);
  }
  SUBCASE("flip chain reverses the initial distribution") {
    LinearMdpModel m = slmdp::fixtures::flip_chain();
    Vec d2 = slmdp::visitation_at(m, Policy::uniform(), 2);
    CHECK(d2[0] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(d2[1] == doctest::Approx(0.7).epsilon(1e-14));
  }
  SUBCASE("each step sums to one") {
    LinearMdpModel m = small_stochastic_model(13, 3, 3);
    Policy mix = Policy::mixture({Policy::uniform(), slmdp::fixtures::constant_policy(m, 1)});
    auto table = slmdp::visitation(m, mix, 3);
    for (std::size_t g = 1; g <= 3; ++g) {
      double s = 0.0;
      for (double v : table.per_step[g]) s += v;
      CHECK(std::fabs(s - 1.0) <= 1e-12);
    }
  }
  SUBCASE("mixtures average the member tables") {
    LinearMdpModel m = small_stochastic_model(13, 3, 3);
    Policy a = slmdp::fixtures::constant_policy(m, 0);
    Policy b = slmdp::fixtures::constant_policy(m, 1);
    Policy mix = Policy::mixture({a, b});
    for (std::size_t h = 1; h <= 3; ++h) {
      Vec va = slmdp::visitation_at(m, a, h);
      Vec vb = slmdp::visitation_at(m, b, h);
      Vec vm = slmdp::visitation_at(m, mix, h);
      for (std::size_t x = 0; x < m.num_states(); ++x)
        CHECK(std::fabs(vm[x] - 0.5 * (va[x] + vb[x])) <= 1e-12);
    }
  }
  SUBCASE("state-action occupancy marginalizes to state visitation") {
    LinearMdpModel m = small_stochastic_model(17, 3, 3);
    auto occ = slmdp::state_action_visitation(m, Policy::uniform(), 2);
    Vec d2 = slmdp::visitation_at(m, Policy::uniform(), 2);
    for (std::size_t x = 0; x < m.num_states(); ++x) {
      double s = 0.0;
      for (double v : occ[x]) s += v;
      CHECK(std::fabs(s - d2[x]) <= 1e-14);
    }
  }
}

TEST_CASE("functional maximization") {
  LinearMdpModel m = small_stochastic_model(19, 3, 3);

  SUBCASE("constant payoff has value one") {
    std::vector<Vec> ones(m.num_states(), Vec(m.A, 1.0));
    for (std::size_t h = 1; h <= 3; ++h)
      CHECK(slmdp::max_linear_functional(m, h, ones).value ==
            doctest::Approx(1.0).epsilon(1e-13));
  }
  SUBCASE("indicator at step 1 is the initial mass") {
    for (std::size_t x = 0; x < m.num_states(); ++x)
      CHECK(slmdp::max_linear_functional(m, 1, indicator_of(m, x)).value ==
            doctest::Approx(m.init[x]).epsilon(1e-14));
  }
  SUBCASE("returned policy attains the reported value") {
    slmdp::RngStream rng(99);
    for (std::size_t h = 1; h <= 3; ++h) {
      std::vector<Vec> c(m.num_states(), Vec(m.A, 0.0));
      for (auto& row : c)
        for (double& v : row) v = rng.next_in(-1.0, 1.0);
      auto res = slmdp::max_linear_functional(m, h, c);
      CHECK(std::fabs(expected_functional(m, res.policy, h, c) - res.value) <= 1e-12);
    }
  }
}

TEST_CASE("functional maximization agrees with brute-force enumeration") {
  for (std::size_t states : {2u, 3u})
    for (std::size_t H : {2u, 3u})
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        LinearMdpModel m = small_stochastic_model(seed, H, states);
        slmdp::RngStream rng(1000 * seed + H);
        for (std::size_t h = 1; h <= H; ++h) {
          std::vector<Vec> reward_c(m.num_states(), Vec(m.A, 0.0));
          std::vector<Vec> random_c(m.num_states(), Vec(m.A, 0.0));
          for (std::size_t x = 0; x < m.num_states(); ++x)
            for (std::size_t a = 0; a < m.A; ++a) {
              reward_c[x][a] = m.reward(h, x, a);
              random_c[x][a] = rng.next_in(-1.0, 1.0);
            }
          for (const auto& c : {reward_c, random_c, indicator_of(m, 0)}) {
            double dp = slmdp::max_linear_functional(m, h, c).value;
            double brute = slmdp::max_functional_by_enumeration(m, h, c);
            CHECK(std::fabs(dp - brute) <= 1e-12);
          }
          for (std::size_t x = 0; x < m.num_states(); ++x) {
            double brute = slmdp::max_functional_by_enumeration(m, h, indicator_of(m, x));
            CHECK(std::fabs(slmdp::max_visitation(m, h, x) - brute) <= 1e-12);
          }
        }
      }
}

TEST_CASE("optimal value") {
  SUBCASE("one-step model averages the best arm over the start distribution") {
    LinearMdpModel m = slmdp::fixtures::blank(1, 2, 2, 2);
    m.init = {0.5, 0.5};
    m.phi[1][0][0] = {1.0, 0.0};
    m.phi[1][0][1] = {0.0, 1.0};
    m.phi[1][1][0] = {0.5, 0.5};
    m.phi[1][1][1] = {1.0, 0.0};
    m.theta[1] = {0.2, 0.9};
    auto res = slmdp::optimal_value(m);
    CHECK(res.value == doctest::Approx(0.5 * 0.9 + 0.5 * 0.55).epsilon(1e-14));
    CHECK(std::fabs(slmdp::policy_value(m, res.policy) - res.value) <= 1e-14);
  }
  SUBCASE("zero reward vector gives zero value") {
    LinearMdpModel m = small_stochastic_model(23, 3, 3);
    for (auto& th : m.theta) th.assign(th.size(), 0.0);
    CHECK(slmdp::optimal_value(m).value == 0.0);
  }
  SUBCASE("two-step fixture matches the hand computation") {
    LinearMdpModel m = slmdp::fixtures::hand_dp_model();
    auto res = slmdp::optimal_value(m);
    CHECK(res.value == doctest::Approx(1.07).epsilon(1e-13));
    CHECK(std::fabs(slmdp::policy_value(m, res.policy) - 1.07) <= 1e-13);
    CHECK(slmdp::policy_value(m, slmdp::fixtures::constant_policy(m, 1)) ==
          doctest::Approx(1.07).epsilon(1e-13));
    CHECK(slmdp::policy_value(m, slmdp::fixtures::constant_policy(m, 0)) ==
          doctest::Approx(0.8).epsilon(1e-13));
  }
}

TEST_CASE("policy cover checking") {
  LinearMdpModel m = slmdp::fixtures::hand_dp_model();
  Policy a0 = slmdp::fixtures::constant_policy(m, 0);
  Policy a1 = slmdp::fixtures::constant_policy(m, 1);

  SUBCASE("two-policy cover on the hand fixture") {
    // mixture d2 = (0.55, 0.45); per-state maxima (1.0, 0.9); min ratio 0.5
    auto rep = slmdp::check_policy_cover(m, {a0, a1}, 2, 0.5);
    CHECK(rep.pass);
    CHECK(rep.min_ratio == doctest::Approx(0.5).epsilon(1e-12));
    auto tight = slmdp::check_policy_cover(m, {a0, a1}, 2, 0.51);
    CHECK_FALSE(tight.pass);
    CHECK(tight.witness_state == 1);
    CHECK(tight.mix_at_witness == doctest::Approx(0.45).epsilon(1e-12));
    CHECK(tight.max_at_witness == doctest::Approx(0.9).epsilon(1e-12));
  }
  SUBCASE("passing at alpha implies passing below alpha") {
    auto rep = slmdp::check_policy_cover(m, {a0, a1}, 2, 0.5);
    REQUIRE(rep.pass);
    for (double lower : {0.4, 0.25, 0.1, 0.0})
      CHECK(slmdp::check_policy_cover(m, {a0, a1}, 2, lower).pass);
  }
  SUBCASE("cover that misses a reachable state fails with that witness") {
    auto rep = slmdp::check_policy_cover(m, {a0}, 2, 0.01);
    CHECK_FALSE(rep.pass);
    CHECK(rep.witness_state == 1);
    CHECK(rep.mix_at_witness == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.max_at_witness == doctest::Approx(0.9).epsilon(1e-12));
  }
  SUBCASE("indicator maximizers form a 1/|X| cover") {
    LinearMdpModel sm = small_stochastic_model(29, 2, 3);
    std::vector<Policy> cover;
    for (std::size_t x = 0; x < sm.num_states(); ++x)
      cover.push_back(slmdp::max_linear_functional(sm, 2, indicator_of(sm, x)).policy);
    auto rep = slmdp::check_policy_cover(sm, cover, 2,
                                         1.0 / static_cast<double>(sm.num_states()));
    CHECK(rep.pass);
  }
  SUBCASE("unreachable states are ignored") {
    LinearMdpModel u = slmdp::fixtures::hand_dp_model();
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t aa = 0; aa < 2; ++aa) u.phi[1][x][aa] = {1.0, 0.0};
    auto rep = slmdp::check_policy_cover(u, {a0}, 2, 1.0);
    CHECK(rep.pass);
    CHECK(rep.min_ratio == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("emulator checking") {
  LinearMdpModel m = small_stochastic_model(31, 2, 3);

  SUBCASE("ground-truth factors pass with zero tolerances") {
    auto rep = slmdp::check_emulator(m, ground_truth_emulator(m, 1), 1, 0.0, 0.0, m.Cnrm);
    CHECK(rep.pass);
    CHECK(rep.item1_slack <= 1e-9);
    CHECK(rep.item2_violation <= 1e-9);
    CHECK(rep.item3_overshoot <= 1e-9);
  }
  SUBCASE("all-zero factors report the raw approximation error") {
    Emulator em;
    em.h = 1;
    em.mus = {Vec(m.d, 0.0)};
    em.witnesses = {0};
    auto rep = slmdp::check_emulator(m, em, 1, 0.0, 0.0, m.Cnrm);
    CHECK(rep.pass1);
    CHECK(rep.pass2);

    double expected = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < m.d; ++l) {
      Vec wstar(m.d, 0.0);
      for (std::size_t x = 0; x < m.num_states(); ++x) {
        double avg_l = m.avg_features(2, x)[l];
        for (std::size_t i = 0; i < m.d; ++i) wstar[i] += m.mu[2][x][i] * avg_l;
      }
      for (double sign : {1.0, -1.0}) {
        std::vector<Vec> c(m.num_states(), Vec(m.A, 0.0));
        for (std::size_t x = 0; x < m.num_states(); ++x)
          for (std::size_t a = 0; a < m.A; ++a)
            c[x][a] = sign * slmdp::dot(m.phi[1][x][a], wstar);
        expected = std::max(expected, slmdp::max_linear_functional(m, 1, c).value);
      }
    }
    CHECK(rep.item3_overshoot == doctest::Approx(expected).epsilon(1e-12));
    CHECK_FALSE(rep.pass);
  }
  SUBCASE("doubling the factors breaks the norm budget") {
    Emulator em = ground_truth_emulator(m, 1);
    for (auto& v : em.mus)
      for (double& e : v) e *= 2.0;
    auto rep = slmdp::check_emulator(m, em, 1, 1.0, 1.0, m.Cnrm);
    CHECK_FALSE(rep.pass1);
    CHECK(rep.item1_slack == doctest::Approx(m.Cnrm).epsilon(1e-9));
    CHECK_FALSE(rep.pass);
  }
}

TEST_CASE("truncated checks") {
  LinearMdpModel m = slmdp::fixtures::barely_reachable_model();
  Policy a0 = slmdp::fixtures::constant_policy(m, 0);
  Policy a1 = slmdp::fixtures::constant_policy(m, 1);

  SUBCASE("zero threshold reproduces the plain checker") {
    auto plain = slmdp::check_policy_cover(m, {a1}, 3, 0.4);
    auto trunc = slmdp::check_truncated_policy_cover(m, {a1}, 3, 0.4, {0.0, 0.0, {}});
    CHECK(trunc.truncation_approximate);
    CHECK(trunc.pass == plain.pass);
    CHECK(trunc.min_ratio == doctest::Approx(plain.min_ratio).epsilon(1e-12));
    CHECK(trunc.witness_state == plain.witness_state);
  }
  SUBCASE("threshold above one empties the comparator") {
    auto rep = slmdp::check_truncated_policy_cover(m, {a1}, 3, 1.0, {1.1, 0.0, {}});
    CHECK(rep.pass);
    CHECK(std::isinf(rep.min_ratio));
  }
  SUBCASE("barely reachable state drops out of the comparator") {
    // max visitation of s1 at step 3 is 0.01; the a1 cover reaches it at 0.005
    auto plain = slmdp::check_policy_cover(m, {a1}, 3, 0.9);
    CHECK_FALSE(plain.pass);
    CHECK(plain.witness_state == 1);
    CHECK(plain.min_ratio == doctest::Approx(0.5).epsilon(1e-9));
    auto trunc = slmdp::check_truncated_policy_cover(m, {a1}, 3, 0.9, {0.02, 0.0, {}});
    CHECK(trunc.pass);
  }
  SUBCASE("replay mixture rescues a state from truncation") {
    LinearMdpModel bare = slmdp::truncate_model(m, {0.02, 0.0, {}});
    CHECK(slmdp::l1_norm(bare.mu[3][1]) == 0.0);
    CHECK(bare.mu[2] == m.mu[2]);
    CHECK(slmdp::max_visitation(bare, 3, 1) == 0.0);

    LinearMdpModel rescued = slmdp::truncate_model(m, {0.02, 0.005, {a0}});
    CHECK(rescued.mu[3][1] == m.mu[3][1]);
  }
  SUBCASE("truncated emulator check evaluates both comparator variants") {
    Emulator partial;
    partial.h = 2;
    partial.mus = {m.mu[3][0]};
    partial.witnesses = {0};

    auto plain = slmdp::check_emulator(m, partial, 2, 0.005, 0.0, m.Cnrm);
    CHECK_FALSE(plain.pass3);

    auto bare = slmdp::check_truncated_emulator(m, partial, 2, 0.005, 0.0, m.Cnrm,
                                                {0.02, 0.0, {}});
    CHECK(bare.truncation_approximate);
    CHECK(bare.pass3);

    auto rescued = slmdp::check_truncated_emulator(m, partial, 2, 0.005, 0.0, m.Cnrm,
                                                   {0.02, 0.005, {a0}});
    CHECK_FALSE(rescued.pass3);
  }
  SUBCASE("truncated emulator check at zero threshold keeps items 1 and 3") {
    Emulator em = ground_truth_emulator(m, 2);
    auto plain = slmdp::check_emulator(m, em, 2, 0.0, 0.0, m.Cnrm);
    auto trunc = slmdp::check_truncated_emulator(m, em, 2, 0.0, 0.0, m.Cnrm, {0.0, 0.0, {}});
    CHECK(plain.pass);
    CHECK(trunc.pass);
    CHECK(trunc.item1_slack == doctest::Approx(plain.item1_slack).epsilon(1e-12));
    CHECK(trunc.item3_overshoot == doctest::Approx(plain.item3_overshoot).epsilon(1e-12));
  }
}

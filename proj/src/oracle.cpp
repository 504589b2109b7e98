#include "slmdp/oracle.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace slmdp {
namespace {

constexpr double kCheckSlack = 1e-12;

// transition rows precomputed once per oracle entry point
struct TransCache {
  std::size_t S, A, H;
  // P[g][x][a] -> vector over next states, g in [1..H-1]
  std::vector<std::vector<std::vector<Vec>>> P;

  explicit TransCache(const LinearMdpModel& m)
      : S(m.num_states()), A(m.A), H(m.H), P(m.H) {
    for (std::size_t g = 1; g + 1 <= m.H; ++g) {
      P[g].assign(S, std::vector<Vec>(A, Vec(S, 0.0)));
      for (std::size_t x = 0; x < S; ++x)
        for (std::size_t a = 0; a < A; ++a)
          for (std::size_t xp = 0; xp < S; ++xp)
            P[g][x][a][xp] = m.trans_prob(g, x, a, xp);
    }
  }
};

void expand_rec(const Policy& p, double weight,
                std::vector<std::pair<double, Policy>>& out) {
  const PolicyNode& n = p.node();
  switch (n.kind) {
    case PolicyNode::Kind::Mixture: {
      double w = weight / static_cast<double>(n.children.size());
      for (const Policy& c : n.children) expand_rec(c, w, out);
      break;
    }
    case PolicyNode::Kind::Compose: {
      std::vector<std::pair<double, Policy>> bases, tails;
      expand_rec(n.children[0], 1.0, bases);
      expand_rec(n.children[1], 1.0, tails);
      for (const auto& b : bases)
        for (const auto& t : tails)
          out.emplace_back(weight * b.first * t.first,
                           Policy::compose(b.second, n.switch_step, t.second));
      break;
    }
    default:
      out.emplace_back(weight, p);
  }
  if (out.size() > 200000)
    throw std::runtime_error("policy mixture expansion exceeds 200000 branches");
}

// all mixture resolutions of the policy with their probabilities
std::vector<std::pair<double, Policy>> expand_mixtures(const Policy& p) {
  std::vector<std::pair<double, Policy>> out;
  expand_rec(p, 1.0, out);
  return out;
}

// action distribution of a mixture-free policy at (h, x)
Vec action_distribution(const LinearMdpModel& m, const Policy& p, std::size_t h,
                        std::size_t x) {
  const PolicyNode& n = p.node();
  switch (n.kind) {
    case PolicyNode::Kind::Uniform:
      return Vec(m.A, 1.0 / static_cast<double>(m.A));
    case PolicyNode::Kind::Linear: {
      Vec dist(m.A, 0.0);
      std::size_t best = 0;
      if (h < n.weights.size() && !n.weights[h].empty()) {
        const Vec& w = n.weights[h];
        double best_v = dot(m.phi[h][x][0], w);
        for (std::size_t a = 1; a < m.A; ++a) {
          double v = dot(m.phi[h][x][a], w);
          if (v > best_v) {
            best_v = v;
            best = a;
          }
        }
      }
      dist[best] = 1.0;
      return dist;
    }
    case PolicyNode::Kind::Tabular: {
      Vec dist(m.A, 0.0);
      dist[n.actions[h][x]] = 1.0;
      return dist;
    }
    case PolicyNode::Kind::Compose:
      return action_distribution(m, n.children[h < n.switch_step ? 0 : 1], h, x);
    case PolicyNode::Kind::Mixture:
      throw std::logic_error("action_distribution on an unexpanded mixture");
  }
  return Vec(m.A, 0.0);
}

// forward occupancy of a mixture-free policy up to step h
std::vector<Vec> forward_dp(const LinearMdpModel& m, const TransCache& cache,
                            const Policy& p, std::size_t h) {
  const std::size_t S = cache.S;
  std::vector<Vec> d(h + 1);
  d[1] = m.init;
  for (std::size_t g = 1; g < h; ++g) {
    d[g + 1] = Vec(S, 0.0);
    for (std::size_t x = 0; x < S; ++x) {
      if (d[g][x] == 0.0) continue;
      Vec dist = action_distribution(m, p, g, x);
      for (std::size_t a = 0; a < m.A; ++a) {
        double w = d[g][x] * dist[a];
        if (w == 0.0) continue;
        const Vec& row = cache.P[g][x][a];
        for (std::size_t xp = 0; xp < S; ++xp) d[g + 1][xp] += w * row[xp];
      }
    }
  }
  return d;
}

MaxFunctionalResult backward_max(const LinearMdpModel& m, const TransCache& cache,
                                 std::size_t h, const std::vector<Vec>& c) {
  const std::size_t S = cache.S;
  std::vector<std::vector<std::size_t>> actions(m.H + 1, std::vector<std::size_t>(S, 0));
  Vec V(S, 0.0);
  for (std::size_t x = 0; x < S; ++x) {
    std::size_t best = 0;
    double best_v = c[x][0];
    for (std::size_t a = 1; a < m.A; ++a)
      if (c[x][a] > best_v) {
        best_v = c[x][a];
        best = a;
      }
    V[x] = best_v;
    actions[h][x] = best;
  }
  for (std::size_t g = h; g-- > 1;) {
    Vec Vn(S, 0.0);
    for (std::size_t x = 0; x < S; ++x) {
      std::size_t best = 0;
      double best_v = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < m.A; ++a) {
        double q = dot(cache.P[g][x][a], V);
        if (q > best_v) {
          best_v = q;
          best = a;
        }
      }
      Vn[x] = best_v;
      actions[g][x] = best;
    }
    V = std::move(Vn);
  }
  MaxFunctionalResult res;
  res.value = dot(m.init, V);
  res.policy = Policy::tabular(std::move(actions));
  return res;
}

Vec mixture_visitation(const LinearMdpModel& m, const TransCache& cache,
                       const Policy& p, std::size_t h) {
  Vec out(cache.S, 0.0);
  for (const auto& [w, member] : expand_mixtures(p)) {
    std::vector<Vec> d = forward_dp(m, cache, member, h);
    for (std::size_t x = 0; x < cache.S; ++x) out[x] += w * d[h][x];
  }
  return out;
}

std::vector<Vec> indicator_c(const LinearMdpModel& m, std::size_t x0) {
  std::vector<Vec> c(m.num_states(), Vec(m.A, 0.0));
  c[x0].assign(m.A, 1.0);
  return c;
}

double max_visit_cached(const LinearMdpModel& m, const TransCache& cache, std::size_t h,
                        std::size_t x) {
  return backward_max(m, cache, h, indicator_c(m, x)).value;
}

EmulatorReport emulator_items23(const LinearMdpModel& variant, const TransCache& cache,
                                const Emulator& em, std::size_t h, double eps_apx,
                                double eps_neg, bool clipped_item2) {
  EmulatorReport rep;
  const std::size_t S = variant.num_states();
  const std::size_t d = variant.d;
  const std::size_t mcount = em.mus.size();

  rep.item2_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < mcount; ++j) {
    double norm_j = l1_norm(em.mus[j]);
    std::vector<Vec> c(S, Vec(variant.A, 0.0));
    for (std::size_t x = 0; x < S; ++x) {
      if (clipped_item2) {
        // per-state deficit: max(0, max_a -<phi, mu_j>), action independent
        double worst = 0.0;
        for (std::size_t a = 0; a < variant.A; ++a)
          worst = std::max(worst, -dot(variant.phi[h][x][a], em.mus[j]));
        c[x].assign(variant.A, worst);
      } else {
        for (std::size_t a = 0; a < variant.A; ++a)
          c[x][a] = -dot(variant.phi[h][x][a], em.mus[j]);
      }
    }
    double value = backward_max(variant, cache, h, c).value;
    // plain: min_pi <E phi, mu_j> = -value, need >= -eps_neg*norm
    // clipped: expected deficit = value, need <= eps_neg*norm
    double violation = value - eps_neg * norm_j;
    if (violation > rep.item2_violation) {
      rep.item2_violation = violation;
      rep.item2_witness = j;
    }
  }
  if (mcount == 0) rep.item2_violation = 0.0;
  rep.pass2 = rep.item2_violation <= kCheckSlack;

  // witness-approximation matrix: diff[l] = sum_x mu(x)*avgphi(x)[l] - sum_j mu_j*avgphi(wit_j)[l]
  std::vector<Vec> diff(d, Vec(d, 0.0));
  for (std::size_t x = 0; x < S; ++x) {
    Vec avg = variant.avg_features(h + 1, x);
    const Vec& mu = variant.mu[h + 1][x];
    for (std::size_t l = 0; l < d; ++l) {
      if (avg[l] == 0.0) continue;
      for (std::size_t i = 0; i < d; ++i) diff[l][i] += avg[l] * mu[i];
    }
  }
  for (std::size_t j = 0; j < mcount; ++j) {
    Vec avg = variant.avg_features(h + 1, em.witnesses[j]);
    for (std::size_t l = 0; l < d; ++l) {
      if (avg[l] == 0.0) continue;
      for (std::size_t i = 0; i < d; ++i) diff[l][i] -= avg[l] * em.mus[j][i];
    }
  }

  rep.item3_overshoot = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < d; ++l) {
    for (int sign : {+1, -1}) {
      std::vector<Vec> c(S, Vec(variant.A, 0.0));
      for (std::size_t x = 0; x < S; ++x)
        for (std::size_t a = 0; a < variant.A; ++a)
          c[x][a] = sign * dot(variant.phi[h][x][a], diff[l]);
      double value = backward_max(variant, cache, h, c).value;
      double overshoot = value - eps_apx;
      if (overshoot > rep.item3_overshoot) {
        rep.item3_overshoot = overshoot;
        rep.item3_coord = l;
        rep.item3_sign = sign;
      }
    }
  }
  rep.pass3 = rep.item3_overshoot <= kCheckSlack;
  return rep;
}

}  // namespace

VisitationTable visitation(const LinearMdpModel& model, const Policy& policy,
                           std::size_t h) {
  TransCache cache(model);
  VisitationTable table;
  table.per_step.assign(h + 1, Vec(model.num_states(), 0.0));
  for (const auto& [w, member] : expand_mixtures(policy)) {
    std::vector<Vec> d = forward_dp(model, cache, member, h);
    for (std::size_t g = 1; g <= h; ++g)
      for (std::size_t x = 0; x < model.num_states(); ++x)
        table.per_step[g][x] += w * d[g][x];
  }
  return table;
}

Vec visitation_at(const LinearMdpModel& model, const Policy& policy, std::size_t h) {
  return visitation(model, policy, h).per_step[h];
}

std::vector<Vec> state_action_visitation(const LinearMdpModel& model,
                                         const Policy& policy, std::size_t h) {
  TransCache cache(model);
  std::vector<Vec> table(model.num_states(), Vec(model.A, 0.0));
  for (const auto& [w, member] : expand_mixtures(policy)) {
    std::vector<Vec> d = forward_dp(model, cache, member, h);
    for (std::size_t x = 0; x < model.num_states(); ++x) {
      if (d[h][x] == 0.0) continue;
      Vec dist = action_distribution(model, member, h, x);
      for (std::size_t a = 0; a < model.A; ++a) table[x][a] += w * d[h][x] * dist[a];
    }
  }
  return table;
}

double policy_value(const LinearMdpModel& model, const Policy& policy) {
  TransCache cache(model);
  double total = 0.0;
  for (const auto& [w, member] : expand_mixtures(policy)) {
    std::vector<Vec> d = forward_dp(model, cache, member, model.H);
    double val = 0.0;
    for (std::size_t g = 1; g <= model.H; ++g)
      for (std::size_t x = 0; x < model.num_states(); ++x) {
        if (d[g][x] == 0.0) continue;
        Vec dist = action_distribution(model, member, g, x);
        for (std::size_t a = 0; a < model.A; ++a)
          if (dist[a] != 0.0) val += d[g][x] * dist[a] * model.reward(g, x, a);
      }
    total += w * val;
  }
  return total;
}

MaxFunctionalResult max_linear_functional(const LinearMdpModel& model, std::size_t h,
                                          const std::vector<Vec>& c) {
  TransCache cache(model);
  return backward_max(model, cache, h, c);
}

double max_functional_by_enumeration(const LinearMdpModel& model, std::size_t h,
                                     const std::vector<Vec>& c) {
  TransCache cache(model);
  const std::size_t S = model.num_states();
  const std::size_t slots = S * (h - 1);
  std::vector<std::size_t> assign(slots, 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<std::vector<std::size_t>> actions(model.H + 1,
                                                  std::vector<std::size_t>(S, 0));
    for (std::size_t g = 1; g < h; ++g)
      for (std::size_t x = 0; x < S; ++x) actions[g][x] = assign[(g - 1) * S + x];
    Policy pol = Policy::tabular(std::move(actions));
    std::vector<Vec> d = forward_dp(model, cache, pol, h);
    double val = 0.0;
    for (std::size_t x = 0; x < S; ++x) {
      double mx = c[x][0];
      for (std::size_t a = 1; a < model.A; ++a) mx = std::max(mx, c[x][a]);
      val += d[h][x] * mx;
    }
    best = std::max(best, val);

    std::size_t i = 0;
    for (; i < slots; ++i) {
      if (++assign[i] < model.A) break;
      assign[i] = 0;
    }
    if (i == slots) break;
  }
  return best;
}

double max_visitation(const LinearMdpModel& model, std::size_t h, std::size_t x) {
  TransCache cache(model);
  return max_visit_cached(model, cache, h, x);
}

OptimalResult optimal_value(const LinearMdpModel& model) {
  TransCache cache(model);
  const std::size_t S = model.num_states();
  std::vector<std::vector<std::size_t>> actions(model.H + 1,
                                                std::vector<std::size_t>(S, 0));
  Vec V(S, 0.0);
  for (std::size_t step = model.H; step >= 1; --step) {
    Vec Vn(S, 0.0);
    for (std::size_t x = 0; x < S; ++x) {
      std::size_t best = 0;
      double best_v = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < model.A; ++a) {
        double q = model.reward(step, x, a);
        if (step < model.H) q += dot(cache.P[step][x][a], V);
        if (q > best_v) {
          best_v = q;
          best = a;
        }
      }
      Vn[x] = best_v;
      actions[step][x] = best;
    }
    V = std::move(Vn);
  }
  OptimalResult res;
  res.value = dot(model.init, V);
  res.policy = Policy::tabular(std::move(actions));
  return res;
}

CoverReport check_policy_cover(const LinearMdpModel& model,
                               const std::vector<Policy>& cover, std::size_t h,
                               double alpha) {
  TransCache cache(model);
  Vec mix = mixture_visitation(model, cache, Policy::mixture(cover), h);
  CoverReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < model.num_states(); ++x) {
    double mx = max_visit_cached(model, cache, h, x);
    if (mx <= 0.0) continue;
    double ratio = mix[x] / mx;
    if (ratio < rep.min_ratio) {
      rep.min_ratio = ratio;
      rep.witness_state = x;
      rep.mix_at_witness = mix[x];
      rep.max_at_witness = mx;
    }
  }
  rep.pass = rep.min_ratio >= alpha - kCheckSlack;
  return rep;
}

EmulatorReport check_emulator(const LinearMdpModel& model, const Emulator& emulator,
                              std::size_t h, double eps_apx, double eps_neg, double C) {
  TransCache cache(model);
  EmulatorReport rep = emulator_items23(model, cache, emulator, h, eps_apx, eps_neg,
                                        /*clipped_item2=*/false);
  rep.total_norm = 0.0;
  for (const Vec& mu : emulator.mus) rep.total_norm += l1_norm(mu);
  rep.item1_slack = rep.total_norm - C;
  rep.pass1 = rep.item1_slack <= kCheckSlack;
  rep.pass = rep.pass1 && rep.pass2 && rep.pass3;
  return rep;
}

LinearMdpModel truncate_model(const LinearMdpModel& model, const TruncParams& params) {
  LinearMdpModel out = model;
  if (params.trunc <= 0.0) return out;
  TransCache cache(model);
  Vec replay_visit;
  for (std::size_t g = 2; g <= model.H; ++g) {
    if (g % 2 == 0) continue;  // even arrival steps stay intact
    if (!params.replay.empty())
      replay_visit = mixture_visitation(model, cache, Policy::mixture(params.replay), g);
    for (std::size_t x = 0; x < model.num_states(); ++x) {
      double norm = l1_norm(model.mu[g][x]);
      if (norm == 0.0) continue;
      if (max_visit_cached(model, cache, g, x) >= params.trunc * norm) continue;
      if (!params.replay.empty() && replay_visit[x] >= params.tsmall * norm) continue;
      out.mu[g][x].assign(model.d, 0.0);
    }
  }
  return out;
}

CoverReport check_truncated_policy_cover(const LinearMdpModel& model,
                                         const std::vector<Policy>& cover,
                                         std::size_t h, double alpha,
                                         const TruncParams& params) {
  LinearMdpModel bare = truncate_model(model, TruncParams{params.trunc, params.tsmall, {}});
  TransCache cache(model);
  TransCache trunc_cache(bare);
  Vec mix = mixture_visitation(model, cache, Policy::mixture(cover), h);
  CoverReport rep;
  rep.truncation_approximate = true;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < model.num_states(); ++x) {
    double mx = max_visit_cached(bare, trunc_cache, h, x);
    if (mx <= 0.0) continue;
    double ratio = mix[x] / mx;
    if (ratio < rep.min_ratio) {
      rep.min_ratio = ratio;
      rep.witness_state = x;
      rep.mix_at_witness = mix[x];
      rep.max_at_witness = mx;
    }
  }
  rep.pass = rep.min_ratio >= alpha - kCheckSlack;
  return rep;
}

EmulatorReport check_truncated_emulator(const LinearMdpModel& model,
                                        const Emulator& emulator, std::size_t h,
                                        double eps_apx, double eps_neg, double C,
                                        const TruncParams& params) {
  LinearMdpModel bare = truncate_model(model, TruncParams{params.trunc, params.tsmall, {}});
  LinearMdpModel rescued = truncate_model(model, params);

  EmulatorReport rep;
  bool first = true;
  for (const LinearMdpModel* variant : {&bare, &rescued}) {
    TransCache cache(*variant);
    EmulatorReport r = emulator_items23(*variant, cache, emulator, h, eps_apx, eps_neg,
                                        /*clipped_item2=*/true);
    if (first || r.item2_violation > rep.item2_violation) {
      rep.item2_violation = r.item2_violation;
      rep.item2_witness = r.item2_witness;
    }
    if (first || r.item3_overshoot > rep.item3_overshoot) {
      rep.item3_overshoot = r.item3_overshoot;
      rep.item3_coord = r.item3_coord;
      rep.item3_sign = r.item3_sign;
    }
    first = false;
  }
  rep.truncation_approximate = true;
  rep.total_norm = 0.0;
  for (const Vec& mu : emulator.mus) rep.total_norm += l1_norm(mu);
  rep.item1_slack = rep.total_norm - C;
  rep.pass1 = rep.item1_slack <= kCheckSlack;
  rep.pass2 = rep.item2_violation <= kCheckSlack;
  rep.pass3 = rep.item3_overshoot <= kCheckSlack;
  rep.pass = rep.pass1 && rep.pass2 && rep.pass3;
  return rep;
}

}  // namespace slmdp

#include "slmdp/cover.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "slmdp/errors.hpp"
#include "slmdp/linalg.hpp"
#include "slmdp/log.hpp"
#include "slmdp/oracle.hpp"
#include "slmdp/psdp.hpp"

namespace slmdp {

namespace {

std::size_t iteration_cap(double C, double xi) {
  return static_cast<std::size_t>(std::ceil(2.0 * C / xi)) + 1;
}

Vec sum_of(const std::vector<Vec>& vs, const std::vector<std::size_t>& idx,
           std::size_t d) {
  Vec s(d, 0.0);
  for (std::size_t j : idx)
    for (std::size_t l = 0; l < d; ++l) s[l] += vs[j][l];
  return s;
}

}  // namespace

GreedyCoverResult ideal_greedy_cover(const LinearMdpModel& model, std::size_t h,
                                     double C, double xi) {
  const std::size_t S = model.num_states();
  GreedyCoverResult res;
  res.uncovered.resize(S);
  for (std::size_t x = 0; x < S; ++x) res.uncovered[x] = x;

  const std::size_t cap = iteration_cap(C, xi);
  for (std::size_t t = 0; t < cap; ++t) {
    GreedyCoverResult::Iteration it;
    it.direction = sum_of(model.mu[h + 1], res.uncovered, model.d);

    std::vector<Vec> c(S, Vec(model.A, 0.0));
    for (std::size_t x = 0; x < S; ++x)
      for (std::size_t a = 0; a < model.A; ++a)
        c[x][a] = dot(model.phi[h][x][a], it.direction);
    auto best = max_linear_functional(model, h, c);
    it.score = best.value;

    auto occ = state_action_visitation(model, best.policy, h);
    it.phi_hat.assign(model.d, 0.0);
    for (std::size_t x = 0; x < S; ++x)
      for (std::size_t a = 0; a < model.A; ++a)
        for (std::size_t l = 0; l < model.d; ++l)
          it.phi_hat[l] += occ[x][a] * model.phi[h][x][a][l];

    if (it.score < xi) {
      it.stopped = true;
      res.final_policy = best.policy;
      res.log.push_back(std::move(it));
      return res;
    }

    Vec arrive = visitation_at(model, best.policy, h + 1);
    std::vector<std::size_t> rest;
    for (std::size_t x : res.uncovered) {
      double need = (xi / (2.0 * C)) * l1_norm(model.mu[h + 1][x]);
      if (arrive[x] >= need) {
        it.claimed.push_back(x);
        res.covered.push_back(x);
      } else {
        rest.push_back(x);
      }
    }
    res.uncovered = std::move(rest);
    res.cover.push_back(best.policy);
    res.log.push_back(std::move(it));
  }
  throw ResourceExhausted("ideal_greedy_cover: iteration cap exceeded at step " +
                          std::to_string(h));
}

GreedyCoverResult pc(std::size_t h, const std::vector<Vec>& mu_hat, double xi,
                     double C_emp, const std::vector<std::vector<Policy>>& covers,
                     std::size_t N, EnvHandle& env) {
  const LinearMdpModel& m = *env.model;
  double total = 0.0;
  for (const Vec& v : mu_hat) total += l1_norm(v);
  if (total > C_emp * (1.0 + 1e-9))
    throw std::invalid_argument("pc: candidate factors exceed the norm budget");

  GreedyCoverResult res;
  res.uncovered.resize(mu_hat.size());
  for (std::size_t j = 0; j < mu_hat.size(); ++j) res.uncovered[j] = j;

  const std::uint64_t start = env.episodes;
  const std::size_t cap = iteration_cap(C_emp, xi);
  for (std::size_t t = 0; t < cap; ++t) {
    GreedyCoverResult::Iteration it;
    it.direction = sum_of(mu_hat, res.uncovered, m.d);

    PsdpRequest req;
    req.k = h;
    req.theta = it.direction;
    req.covers = covers;
    req.N = N;
    Policy chaser = psdp(req, env);

    it.phi_hat = fe(h, chaser, N, env);
    it.score = dot(it.phi_hat, it.direction);
    SLMDP_DEBUG("pc step " << h << " iteration " << t << " score " << it.score
                           << " uncovered " << res.uncovered.size());

    if (it.score < xi) {
      it.stopped = true;
      res.final_policy = chaser;
      res.log.push_back(std::move(it));
      res.episodes_used = env.episodes - start;
      return res;
    }

    std::vector<std::size_t> rest;
    for (std::size_t j : res.uncovered) {
      double need = (xi / (2.0 * C_emp)) * l1_norm(mu_hat[j]);
      if (dot(it.phi_hat, mu_hat[j]) >= need) {
        it.claimed.push_back(j);
        res.covered.push_back(j);
      } else {
        rest.push_back(j);
      }
    }
    res.uncovered = std::move(rest);
    res.cover.push_back(chaser);
    res.log.push_back(std::move(it));
  }
  throw ResourceExhausted("pc: iteration cap exceeded at step " + std::to_string(h));
}

}  // namespace slmdp

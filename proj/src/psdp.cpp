#include "slmdp/psdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "slmdp/errors.hpp"
#include "slmdp/linalg.hpp"
#include "slmdp/log.hpp"

namespace slmdp {

namespace {

const std::vector<Policy>& cover_at(const std::vector<std::vector<Policy>>& covers,
                                    std::size_t h) {
  if (h >= covers.size() || covers[h].empty())
    throw EmptySet("psdp: no roll-in cover for step " + std::to_string(h));
  return covers[h];
}

// One backward pass: roll in to step h, act uniformly there, follow the
// partial policy afterwards, and regress the label onto phi_h(x_h, a_h).
Vec fit_step(std::size_t h, const std::vector<Policy>& cover, const Policy& tail,
             std::size_t N, double radius, double tol, std::size_t max_iters,
             EnvHandle& env, const std::function<double(const Trajectory&)>& label) {
  Policy sampler = rollin_distribution_sampler(cover, h, tail);
  RegressionProblem prob;
  prob.radius = radius;
  prob.tol = tol;
  prob.max_iters = max_iters;
  prob.covariates.reserve(N);
  prob.responses.reserve(N);
  for (std::size_t i = 0; i < N; ++i) {
    Trajectory t = sample_episode(env, sampler);
    prob.covariates.push_back(env.model->features(h, t.states[h], t.actions[h]));
    prob.responses.push_back(label(t));
  }
  return l1_lsq(prob);
}

}  // namespace

Policy psdp(const PsdpRequest& req, EnvHandle& env) {
  const LinearMdpModel& m = *env.model;
  double radius = req.radius >= 0.0
                      ? req.radius
                      : m.Cnrm * std::max(1.0, l1_norm(req.theta));
  std::vector<Vec> w(req.k + 1);
  w[req.k] = req.theta;
  for (std::size_t h = req.k; h-- > 1;) {
    Policy tail = Policy::linear(w);
    auto label = [&](const Trajectory& t) {
      return dot(m.features(req.k, t.states[req.k], t.actions[req.k]), req.theta);
    };
    w[h] = fit_step(h, cover_at(req.covers, h), tail, req.N, radius, req.tol,
                    req.max_iters, env, label);
    SLMDP_DEBUG("psdp step " << h << " fitted, |w|_1=" << l1_norm(w[h]));
  }
  return Policy::linear(std::move(w));
}

Policy psdp_rew(const std::vector<std::vector<Policy>>& covers, std::size_t N,
                EnvHandle& env, double radius) {
  const LinearMdpModel& m = *env.model;
  if (radius < 0.0) radius = m.Cnrm * static_cast<double>(m.H);
  std::vector<Vec> w(m.H + 1);
  for (std::size_t h = m.H; h >= 1; --h) {
    Policy tail = Policy::linear(w);
    auto label = [&](const Trajectory& t) {
      double r = 0.0;
      for (std::size_t g = h; g <= m.H; ++g) r += t.rewards[g];
      return r;
    };
    w[h] = fit_step(h, cover_at(covers, h), tail, N, radius, 1e-6, 200000, env, label);
    SLMDP_DEBUG("psdp_rew step " << h << " fitted, |w|_1=" << l1_norm(w[h]));
  }
  return Policy::linear(std::move(w));
}

Vec fe(std::size_t k, const Policy& policy, std::size_t N, EnvHandle& env) {
  const LinearMdpModel& m = *env.model;
  Vec mean(m.d, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    Trajectory t = sample_episode(env, policy);
    const Vec& phi = m.features(k, t.states[k], t.actions[k]);
    for (std::size_t l = 0; l < m.d; ++l) mean[l] += phi[l];
  }
  if (N > 0)
    for (double& v : mean) v /= static_cast<double>(N);
  return mean;
}

std::size_t n_fe(double eps, double delta, std::size_t d) {
  double n = 2.0 / (eps * eps) * std::log(2.0 * static_cast<double>(d) / delta);
  return static_cast<std::size_t>(std::ceil(n));
}

}  // namespace slmdp

#include "slmdp/emulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "slmdp/log.hpp"

namespace slmdp {

namespace {

void check_step(std::size_t h, const LinearMdpModel& model, const char* who) {
  if (h < 1 || h >= model.H)
    throw std::invalid_argument(std::string(who) + ": step must satisfy 1 <= h < H");
}

std::pair<TransitionDataset, StateDataset> collect(std::size_t h, const Policy& sampler,
                                                   std::size_t n, std::size_t m,
                                                   EnvHandle& env) {
  const LinearMdpModel& model = *env.model;
  TransitionDataset transitions;
  transitions.h = h;
  transitions.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Trajectory t = sample_episode(env, sampler);
    TransitionSample row;
    row.x = t.states[h];
    row.a = t.actions[h];
    row.x_next = t.states[h + 1];
    row.phi = model.features(h, row.x, row.a);
    row.next_avg = model.avg_features(h + 1, row.x_next);
    transitions.rows.push_back(std::move(row));
  }
  StateDataset states;
  states.h = h;
  states.rows.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    Trajectory t = sample_episode(env, sampler);
    StateSample row;
    row.x = t.states[h + 1];
    row.avg = model.avg_features(h + 1, row.x);
    states.rows.push_back(std::move(row));
  }
  return {std::move(transitions), std::move(states)};
}

std::optional<Emulator> synthesize(std::size_t h, const TransitionDataset& transitions,
                                   const StateDataset& states, double eps_cvx, double C,
                                   NonnegMode mode, const EscOptions& opt,
                                   const LinearMdpModel& model) {
  const double eps_apx = opt.eps_apx > 0.0 ? opt.eps_apx : eps_cvx;
  const double eps_neg = opt.eps_neg > 0.0 ? opt.eps_neg : eps_cvx;
  const std::size_t n = transitions.rows.size();
  const std::size_t m = states.rows.size();

  EmulatorProgram program;
  program.transitions_data.reserve(n);
  for (const TransitionSample& row : transitions.rows)
    program.transitions_data.push_back(row.phi);
  if (mode == NonnegMode::AllActions) {
    program.action_slices.reserve(n);
    for (const TransitionSample& row : transitions.rows) {
      std::vector<Vec> slices;
      slices.reserve(model.A);
      for (std::size_t a = 0; a < model.A; ++a)
        slices.push_back(model.features(h, row.x, a));
      program.action_slices.push_back(std::move(slices));
    }
  }
  program.witness_features.reserve(m);
  for (const StateSample& row : states.rows) program.witness_features.push_back(row.avg);
  program.norm_budget = C;
  program.eps_cvx = eps_cvx;
  program.eps_relax = relaxation_radius(eps_neg, eps_cvx, eps_apx, m, C);
  program.nonneg_mode = mode;

  FeasiblePoint point;
  try {
    RegressionProblem reg;
    reg.covariates = program.transitions_data;
    reg.responses.resize(n);
    reg.radius = C;
    reg.max_iters = opt.regression_iters;
    program.regressors.reserve(model.d);
    for (std::size_t l = 0; l < model.d; ++l) {
      for (std::size_t i = 0; i < n; ++i)
        reg.responses[i] = transitions.rows[i].next_avg[l];
      program.regressors.push_back(l1_lsq(reg));
    }
    point = solve_emulator_feasibility(program, opt.solver_budget);
  } catch (const Infeasible& e) {
    SLMDP_WARN("esc: program infeasible (" << e.what() << ")");
    return std::nullopt;
  } catch (const NonConvergence& e) {
    SLMDP_WARN("esc: solver budget exhausted (" << e.what() << ")");
    return std::nullopt;
  }

  Emulator result;
  result.h = h;
  result.mus = round_relaxed_solution(point.mus, C, program.eps_relax, eps_apx);
  result.witnesses.reserve(m);
  for (const StateSample& row : states.rows) result.witnesses.push_back(row.x);
  result.budget = C;
  result.eps_cvx = eps_cvx;
  result.n = n;
  result.m = m;
  result.residuals = point.residual_report;
  return result;
}

}  // namespace

std::pair<TransitionDataset, StateDataset> draw_data(std::size_t h,
                                                     const std::vector<Policy>& cover,
                                                     std::size_t n, std::size_t m,
                                                     EnvHandle& env) {
  check_step(h, *env.model, "draw_data");
  Policy sampler = rollin_distribution_sampler(cover, h, Policy::uniform());
  return collect(h, sampler, n, m, env);
}

std::pair<TransitionDataset, StateDataset> draw_data_trunc(
    std::size_t h, const std::vector<Policy>& cover, const std::vector<Policy>& replay,
    std::size_t n, std::size_t m, EnvHandle& env) {
  check_step(h, *env.model, "draw_data_trunc");
  Policy sampler = rollin_distribution_sampler(cover, h, Policy::uniform());
  if (!replay.empty()) {
    Policy alt = rollin_distribution_sampler(replay, h, Policy::uniform());
    sampler = Policy::mixture({std::move(sampler), std::move(alt)});
  }
  return collect(h, sampler, n, m, env);
}

std::optional<Emulator> esc(std::size_t h, const std::vector<Policy>& cover,
                            double eps_cvx, double C, std::size_t n, std::size_t m,
                            EnvHandle& env, const EscOptions& opt) {
  auto [transitions, states] = draw_data(h, cover, n, m, env);
  return synthesize(h, transitions, states, eps_cvx, C, NonnegMode::PerSampleAction, opt,
                    *env.model);
}

std::optional<Emulator> esct(std::size_t h, const std::vector<Policy>& cover,
                             const std::vector<Policy>& replay, double eps_cvx, double C,
                             std::size_t n, std::size_t m, EnvHandle& env,
                             const EscOptions& opt) {
  auto [transitions, states] = draw_data_trunc(h, cover, replay, n, m, env);
  return synthesize(h, transitions, states, eps_cvx, C, NonnegMode::AllActions, opt,
                    *env.model);
}

double relaxation_radius(double eps_neg, double eps_cvx, double eps_apx, std::size_t m,
                         double C) {
  double r = std::min(eps_neg, eps_cvx);
  if (m > 0) {
    const double md = static_cast<double>(m);
    r = std::min(r, eps_neg * eps_apx / (2.0 * md));
    if (C > 0.0) r = std::min(r, eps_apx / (2.0 * md * C));
  }
  return r;
}

std::vector<Vec> round_relaxed_solution(const std::vector<Vec>& mus, double C,
                                        double eps_relax, double eps_apx) {
  if (mus.empty()) return {};
  const double threshold = eps_apx / static_cast<double>(mus.size());
  const double scale = C / (C + eps_relax);
  std::vector<Vec> out;
  out.reserve(mus.size());
  for (const Vec& mu : mus) {
    if (l1_norm(mu) < threshold) {
      out.emplace_back(mu.size(), 0.0);
      continue;
    }
    Vec scaled = mu;
    for (double& v : scaled) v *= scale;
    out.push_back(std::move(scaled));
  }
  return out;
}

}  // namespace slmdp

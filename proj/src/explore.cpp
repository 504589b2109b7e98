#include "slmdp/explore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "slmdp/cover.hpp"
#include "slmdp/emulator.hpp"
#include "slmdp/errors.hpp"
#include "slmdp/log.hpp"
#include "slmdp/psdp.hpp"

namespace slmdp {

std::uint64_t resolve_budget(const char* name, double literal, double scale,
                             std::uint64_t cap) {
  constexpr double kLimit = 9223372036854775808.0;  // 2^63
  double scaled = literal * scale;
  if (!std::isfinite(scaled) || scaled > kLimit) {
    if (cap > 0) return cap;
    throw Overflow(std::string("explore: ") + name +
                   " budget exceeds 2^63 episodes; supply a scale or cap override");
  }
  auto v = static_cast<std::uint64_t>(std::ceil(std::max(1.0, scaled)));
  if (cap > 0 && v > cap) v = cap;
  return v;
}

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string("explore: ") + name +
                                " must be positive and finite");
}

void require_count(std::size_t v, const char* name) {
  if (v == 0)
    throw std::invalid_argument(std::string("explore: ") + name +
                                " must be at least 1");
}

void check_overrides(const BudgetOverrides& ov) {
  auto scale = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("explore: override ") + name +
                                  " must be positive and finite");
  };
  auto setting = [](double v, const char* name) {
    if (v < 0.0 || !std::isfinite(v))
      throw std::invalid_argument(std::string("explore: override ") + name +
                                  " must be nonnegative and finite");
  };
  scale(ov.scale_T, "scale_T");
  scale(ov.scale_n, "scale_n");
  scale(ov.scale_m, "scale_m");
  scale(ov.scale_N, "scale_N");
  scale(ov.scale_N_rew, "scale_N_rew");
  setting(ov.set_trunc, "set_trunc");
  setting(ov.set_tsmall, "set_tsmall");
  setting(ov.set_alpha, "set_alpha");
  setting(ov.set_xi, "set_xi");
  setting(ov.set_eps_apx, "set_eps_apx");
  setting(ov.set_eps_neg, "set_eps_neg");
  setting(ov.set_eps_cvx, "set_eps_cvx");
}

double pick(double replacement, double literal) {
  return replacement > 0.0 ? replacement : literal;
}

ScheduleParams assemble(std::size_t A, std::size_t H, double Cnrm, double delta,
                        double eps, double eta, std::size_t d,
                        const ScheduleLiterals& lit, const BudgetOverrides& ov) {
  check_overrides(ov);
  ScheduleParams p;
  p.A = A;
  p.H = H;
  p.d = d;
  p.Cnrm = Cnrm;
  p.delta = delta;
  p.eps = eps;
  p.eta = eta;
  p.literal = lit;
  p.overrides = ov;
  p.trunc = pick(ov.set_trunc, lit.trunc);
  p.tsmall = pick(ov.set_tsmall, lit.tsmall);
  p.alpha = pick(ov.set_alpha, lit.alpha);
  p.xi = pick(ov.set_xi, lit.xi);
  p.eps_apx = pick(ov.set_eps_apx, lit.eps_apx);
  p.eps_neg = pick(ov.set_eps_neg, lit.eps_neg);
  p.eps_cvx = pick(ov.set_eps_cvx, lit.eps_cvx);
  p.T = resolve_budget("T", lit.T, ov.scale_T, ov.cap_T);
  p.n = resolve_budget("n", lit.n, ov.scale_n, ov.cap_n);
  p.m = resolve_budget("m", lit.m, ov.scale_m, ov.cap_m);
  p.N = resolve_budget("N", lit.N, ov.scale_N, ov.cap_N);
  return p;
}

void enforce_budget(const EnvHandle& env, std::uint64_t start,
                    const BudgetOverrides& ov, const char* who) {
  if (ov.max_episodes > 0 && env.episodes - start > ov.max_episodes)
    throw ResourceExhausted(std::string(who) + ": consumed " +
                            std::to_string(env.episodes - start) +
                            " episodes against a cap of " +
                            std::to_string(ov.max_episodes));
}

EscOptions esc_options(const ScheduleParams& params) {
  EscOptions opt;
  opt.eps_apx = params.eps_apx;
  opt.eps_neg = params.eps_neg;
  if (params.overrides.solver_budget > 0)
    opt.solver_budget = params.overrides.solver_budget;
  if (params.overrides.regression_iters > 0)
    opt.regression_iters = params.overrides.regression_iters;
  return opt;
}

std::vector<Policy> lift(const std::vector<Policy>& set, std::size_t h,
                         const Policy& uniform) {
  std::vector<Policy> out;
  out.reserve(set.size());
  for (const Policy& p : set) out.push_back(Policy::compose(p, h, uniform));
  return out;
}

void union_by_identity(std::vector<Policy>& into, const std::vector<Policy>& more) {
  for (const Policy& p : more) {
    bool present = std::any_of(into.begin(), into.end(), [&](const Policy& q) {
      return &q.node() == &p.node();
    });
    if (!present) into.push_back(p);
  }
}

}  // namespace

double nstat_schedule(double eps, double alpha, double delta, std::size_t A,
                      std::size_t H, double Cnrm, std::size_t d) {
  double Hr = static_cast<double>(H), Ar = static_cast<double>(A);
  return std::pow(Hr, 4.0) * Ar * Ar * std::pow(Cnrm, 4.0) *
         std::log(Hr * static_cast<double>(d) / delta) /
         (std::pow(alpha, 4.0) * std::pow(eps, 4.0));
}

double npsdprew_schedule(double eps, double alpha, double delta, std::size_t A,
                         std::size_t H, double Cnrm, std::size_t d) {
  double Hr = static_cast<double>(H), Ar = static_cast<double>(A);
  return std::pow(Hr, 8.0) * Ar * Ar * std::pow(Cnrm, 4.0) *
         std::log(Hr * static_cast<double>(d) / delta) /
         (std::pow(alpha, 4.0) * std::pow(eps, 4.0));
}

double nfe_schedule(double eps, double delta, std::size_t d) {
  return 2.0 * std::log(2.0 * static_cast<double>(d) / delta) / (eps * eps);
}

ScheduleLiterals paramst_literals(std::size_t A, std::size_t H, double Cnrm,
                                  double delta, double eps, std::size_t d) {
  require_count(A, "A");
  require_count(H, "H");
  require_count(d, "d");
  require_positive(Cnrm, "Cnrm");
  require_positive(delta, "delta");
  require_positive(eps, "eps");
  double Ar = static_cast<double>(A), Hr = static_cast<double>(H);
  double dr = static_cast<double>(d), C = Cnrm;
  ScheduleLiterals L;
  L.trunc = eps / (8.0 * std::pow(C, 3.0) * std::pow(Hr, 4.0));
  L.xi = L.trunc / (16.0 * Ar);
  L.alpha = L.xi * L.xi / (32.0 * C * C * Ar * Ar);
  L.T = 32.0 * Ar * std::pow(Hr, 3.0) * C * C / (L.xi * L.alpha);
  L.tsmall = std::pow(L.xi, 3.0) * L.alpha * L.alpha /
             (1024.0 * Ar * Ar * std::pow(Hr, 7.0) * std::pow(C, 5.0));
  L.eps_apx = L.trunc * L.xi * L.xi / (136.0 * C * C * Ar);
  L.eps_neg = L.trunc * L.xi * L.xi / (264.0 * C * C * Hr * Ar);
  L.eps_cvx = L.eps_apx * std::min(std::sqrt(L.alpha / Ar) / 4.0,
                                   std::sqrt(L.tsmall / Ar) / 4.0);
  double bulk = std::pow(C, 6.0) / std::pow(L.eps_cvx, 8.0);
  L.m = 2.0 * bulk * std::log(bulk * 2.0 * dr * L.T * Hr / delta);
  double tail = std::log(2.0 * dr * L.T * Hr * std::sqrt(L.m) / delta);
  double fit = Ar * Ar * C * C * std::pow(Hr, 3.0) *
               std::log(Ar * Hr * C / L.eps_neg) * tail /
               (std::pow(L.eps_neg, 4.0) * L.tsmall);
  double match = 16.0 * C * C * Ar * Ar *
                 (1.0 / (L.tsmall * L.tsmall) + 1.0 / (L.alpha * L.alpha)) * tail /
                 std::pow(L.eps_apx, 4.0);
  L.n = std::max(fit, match);
  double split = delta * L.xi / (12.0 * L.T * Hr * C);
  L.N = std::max(nstat_schedule(L.xi / (8.0 * C), L.alpha, split, A, H, C, d),
                 nfe_schedule(L.xi / (8.0 * C), split, d));
  return L;
}

ScheduleLiterals reachable_literals(std::size_t A, std::size_t H, double Cnrm,
                                    double delta, double eta, std::size_t d) {
  require_count(A, "A");
  require_count(H, "H");
  require_count(d, "d");
  require_positive(Cnrm, "Cnrm");
  require_positive(delta, "delta");
  require_positive(eta, "eta");
  double Ar = static_cast<double>(A), Hr = static_cast<double>(H);
  double dr = static_cast<double>(d), C = Cnrm;
  ScheduleLiterals L;
  L.T = 1.0;
  L.xi = eta / (9.0 * Ar);
  L.eps_apx = L.xi * L.xi * eta / (54.0 * C * C * Ar);
  L.eps_neg = L.xi * L.xi * eta / (102.0 * std::pow(C, 3.0) * Ar);
  L.alpha = L.xi * L.xi / (16.0 * C * C * Ar);
  L.eps_cvx = L.eps_apx * std::sqrt(L.alpha / (4.0 * Ar));
  double fit = C * C * Ar * std::pow(Hr, 3.0) *
               std::log(8.0 * Ar * Hr * C / L.eps_neg) *
               std::log(24.0 * dr * Hr / delta) /
               (L.alpha * std::pow(L.eps_neg, 4.0));
  double match = std::pow(C, 4.0) * Ar * Ar * std::log(12.0 * dr * Hr / delta) /
                 (L.alpha * L.alpha * std::pow(L.eps_apx, 4.0));
  L.n = std::max(fit, match);
  L.m = std::pow(Ar, 3.0) * std::log(24.0 * dr * L.n * Hr / delta) /
        (std::pow(L.alpha, 3.0) * eta * L.eps_apx * L.eps_apx);
  double split = delta * L.xi / (12.0 * Hr * C);
  L.N = std::max(nstat_schedule(L.xi / (4.0 * C), L.alpha, split, A, H, C, d),
                 nfe_schedule(L.xi / (4.0 * C), split, d));
  return L;
}

ScheduleParams params_t(std::size_t A, std::size_t H, double Cnrm, double delta,
                        double eps, std::size_t d, const BudgetOverrides& ov) {
  return assemble(A, H, Cnrm, delta, eps, 0.0, d,
                  paramst_literals(A, H, Cnrm, delta, eps, d), ov);
}

ScheduleParams params_reachable(std::size_t A, std::size_t H, double Cnrm,
                                double delta, double eta, std::size_t d,
                                const BudgetOverrides& ov) {
  return assemble(A, H, Cnrm, delta, 0.0, eta, d,
                  reachable_literals(A, H, Cnrm, delta, eta, d), ov);
}

SlmResult slm(double delta, EnvHandle& env, const ScheduleParams& params) {
  if (env.model == nullptr)
    throw std::invalid_argument("slm: environment has no model");
  require_positive(delta, "delta");
  const LinearMdpModel& model = *env.model;
  const std::size_t H = model.H;
  const Policy uniform = Policy::uniform();
  const std::uint64_t start = env.episodes;
  SlmResult result;
  result.params = params;
  result.covers.assign(H + 1, {});
  result.covers[1] = {uniform};
  if (H >= 2) result.covers[2] = {uniform};
  EscOptions esc_opt = esc_options(params);
  for (std::size_t h = 1; h + 2 <= H; ++h) {
    StepLog row;
    row.h = h;
    std::uint64_t before = env.episodes;
    auto emulator = esc(h, result.covers[h], params.eps_cvx, model.Cnrm,
                        params.n, params.m, env, esc_opt);
    row.esc_episodes = env.episodes - before;
    if (!emulator.has_value())
      throw CoverFailure("slm: emulator synthesis failed at step " +
                         std::to_string(h));
    row.esc_ok = true;
    enforce_budget(env, start, params.overrides, "slm");
    before = env.episodes;
    GreedyCoverResult distilled = pc(h, emulator->mus, params.xi, model.Cnrm,
                                     result.covers, params.N, env);
    row.pc_episodes = env.episodes - before;
    row.cover_size = distilled.cover.size();
    if (distilled.cover.empty())
      SLMDP_WARN("slm: step " << h << " distilled an empty cover");
    result.covers[h + 2] = lift(distilled.cover, h + 1, uniform);
    result.steps.push_back(std::move(row));
    enforce_budget(env, start, params.overrides, "slm");
  }
  result.episodes = env.episodes - start;
  return result;
}

std::vector<Policy> sigma_h(const std::vector<std::vector<Policy>>& covers,
                            std::size_t h, const std::vector<Policy>& cover_bar,
                            const Policy& final_policy) {
  std::vector<Policy> out;
  auto push_unique = [&](const Policy& p) {
    bool present = std::any_of(out.begin(), out.end(), [&](const Policy& q) {
      return &q.node() == &p.node();
    });
    if (!present) out.push_back(p);
  };
  for (const Policy& p : cover_bar) push_unique(p);
  push_unique(final_policy);  // the step-0 rewiring collapses to the policy itself
  const Policy uniform = Policy::uniform();
  for (std::size_t h0 = 1; h0 <= h && h0 < covers.size(); ++h0)
    for (const Policy& p : covers[h0])
      push_unique(Policy::compose(Policy::compose(p, h0, uniform), h0 + 1,
                                  final_policy));
  return out;
}

SlmtResult slmt(double eps, double delta, EnvHandle& env,
                const BudgetOverrides& ov) {
  if (env.model == nullptr)
    throw std::invalid_argument("slmt: environment has no model");
  const LinearMdpModel& model = *env.model;
  ScheduleParams params =
      params_t(model.A, model.H, model.Cnrm, delta, eps, model.d, ov);
  const std::size_t H = model.H;
  const Policy uniform = Policy::uniform();
  const std::uint64_t start = env.episodes;
  SlmtResult result;
  result.params = params;
  result.alpha = params.alpha;
  result.T = params.T;
  EscOptions esc_opt = esc_options(params);
  std::vector<Policy> gamma;
  for (std::uint64_t t = 1; t <= params.T; ++t) {
    PhaseState phase;
    phase.t = t;
    phase.gamma = gamma;
    phase.covers.assign(H + 1, {});
    phase.covers[1] = {uniform};
    if (H >= 2) phase.covers[2] = {uniform};
    const std::uint64_t phase_start = env.episodes;
    for (std::size_t h = 1; h + 2 <= H; h += 2) {
      StepLog row;
      row.h = h;
      std::uint64_t before = env.episodes;
      auto emulator = esct(h, phase.covers[h], gamma, params.eps_cvx, model.Cnrm,
                           params.n, params.m, env, esc_opt);
      row.esc_episodes = env.episodes - before;
      if (!emulator.has_value()) {
        phase.steps.push_back(std::move(row));
        phase.episodes = env.episodes - phase_start;
        result.phases.push_back(std::move(phase));
        result.bottom = true;
        result.bottom_phase = t;
        result.bottom_step = h;
        result.gamma_final = std::move(gamma);
        result.episodes = env.episodes - start;
        SLMDP_INFO("slmt: synthesis infeasible at phase " << t << " step " << h
                                                          << "; aborting");
        return result;
      }
      row.esc_ok = true;
      enforce_budget(env, start, ov, "slmt");
      before = env.episodes;
      GreedyCoverResult distilled = pc(h, emulator->mus, params.xi, model.Cnrm,
                                       phase.covers, params.N, env);
      row.pc_episodes = env.episodes - before;
      row.cover_size = distilled.cover.size();
      if (distilled.cover.empty())
        SLMDP_WARN("slmt: phase " << t << " step " << h
                                  << " distilled an empty cover");
      PcOutput output;
      output.h = h;
      output.cover_bar = distilled.cover;
      output.final_policy = distilled.final_policy;
      phase.pc_outputs.push_back(std::move(output));
      phase.covers[h + 2] = lift(distilled.cover, h + 1, uniform);
      if (h + 3 <= H)
        phase.covers[h + 3] = lift(phase.covers[h + 2], h + 2, uniform);
      phase.steps.push_back(std::move(row));
      enforce_budget(env, start, ov, "slmt");
    }
    for (const PcOutput& output : phase.pc_outputs)
      union_by_identity(gamma, sigma_h(phase.covers, output.h, output.cover_bar,
                                       output.final_policy));
    phase.episodes = env.episodes - phase_start;
    result.phases.push_back(std::move(phase));
  }
  result.gamma_final = std::move(gamma);
  result.episodes = env.episodes - start;
  return result;
}

OptResult opt(double eps, double delta, EnvHandle& env, const BudgetOverrides& ov) {
  if (env.model == nullptr)
    throw std::invalid_argument("opt: environment has no model");
  require_positive(eps, "eps");
  require_positive(delta, "delta");
  const LinearMdpModel& model = *env.model;
  const std::uint64_t start = env.episodes;
  OptResult result;
  result.exploration = slmt(eps, delta / 2.0, env, ov);
  if (result.exploration.bottom) {
    result.failed = true;
    result.policy = Policy::uniform();
    result.episodes = env.episodes - start;
    SLMDP_WARN("opt: exploration aborted; returning the uniform policy");
    return result;
  }
  double alpha_split =
      result.exploration.alpha / static_cast<double>(result.exploration.T);
  double raw = npsdprew_schedule(eps / 2.0, alpha_split, delta / 2.0, model.A,
                                 model.H, model.Cnrm, model.d);
  result.N_rew = resolve_budget("N_rew", raw, ov.scale_N_rew, ov.cap_N_rew);
  std::vector<std::vector<Policy>> covers(model.H + 1);
  for (const PhaseState& phase : result.exploration.phases)
    for (std::size_t h = 1; h <= model.H && h < phase.covers.size(); ++h)
      union_by_identity(covers[h], phase.covers[h]);
  std::uint64_t before = env.episodes;
  result.policy = psdp_rew(covers, result.N_rew, env);
  result.psdp_episodes = env.episodes - before;
  enforce_budget(env, start, ov, "opt");
  result.episodes = env.episodes - start;
  return result;
}

}  // namespace slmdp

#pragma once

#include <cstdint>
#include <vector>

#include "slmdp/mdp.hpp"

namespace slmdp {

// Knobs applied on top of the literal parameter schedules. The literal sample
// budgets are far too conservative to run, so every integer budget takes a
// multiplicative scale and a hard cap (0 = none), and every real tolerance
// takes an optional replacement value (0 = keep the literal). Replacements
// swap individual entries only; dependent entries are not re-derived.
struct BudgetOverrides {
  double scale_T = 1.0, scale_n = 1.0, scale_m = 1.0, scale_N = 1.0;
  double scale_N_rew = 1.0;
  std::uint64_t cap_T = 0, cap_n = 0, cap_m = 0, cap_N = 0, cap_N_rew = 0;
  double set_trunc = 0.0, set_tsmall = 0.0, set_alpha = 0.0, set_xi = 0.0;
  double set_eps_apx = 0.0, set_eps_neg = 0.0, set_eps_cvx = 0.0;
  std::uint64_t max_episodes = 0;     // drivers throw ResourceExhausted past this
  std::size_t solver_budget = 0;      // 0 = component default
  std::size_t regression_iters = 0;   // 0 = component default
};

// Literal formula values, kept as reals; the budget entries can legitimately
// be astronomically large or infinite, which is what the overrides are for.
struct ScheduleLiterals {
  double trunc = 0.0, tsmall = 0.0, alpha = 0.0, xi = 0.0;
  double eps_apx = 0.0, eps_neg = 0.0, eps_cvx = 0.0;
  double T = 0.0, n = 0.0, m = 0.0, N = 0.0;
};

// Effective schedule consumed by the drivers: literal values with any
// replacements applied, plus the integer budgets after scales and caps.
// The reachable builder leaves trunc and tsmall at zero and T at one and
// records eta; the truncated builder records eps.
struct ScheduleParams {
  std::size_t A = 0, H = 0, d = 0;
  double Cnrm = 0.0, delta = 0.0, eps = 0.0, eta = 0.0;

  double trunc = 0.0, tsmall = 0.0, alpha = 0.0, xi = 0.0;
  double eps_apx = 0.0, eps_neg = 0.0, eps_cvx = 0.0;
  std::uint64_t T = 0, n = 0, m = 0, N = 0;

  ScheduleLiterals literal;
  BudgetOverrides overrides;
};

// Episode schedules shared by the drivers, as reals. The statistical one
// backs both the exploration-time policy searches and, with the extra
// horizon powers, the final reward-directed search.
double nstat_schedule(double eps, double alpha, double delta, std::size_t A,
                      std::size_t H, double Cnrm, std::size_t d);
double npsdprew_schedule(double eps, double alpha, double delta, std::size_t A,
                         std::size_t H, double Cnrm, std::size_t d);
double nfe_schedule(double eps, double delta, std::size_t d);

// Scale then cap a literal episode count. A non-finite or above-2^63 scaled
// value needs a cap, otherwise Overflow; the result is at least 1.
std::uint64_t resolve_budget(const char* name, double literal, double scale,
                             std::uint64_t cap);

// Literal formula evaluation; never throws for positive, finite inputs.
ScheduleLiterals paramst_literals(std::size_t A, std::size_t H, double Cnrm,
                                  double delta, double eps, std::size_t d);
ScheduleLiterals reachable_literals(std::size_t A, std::size_t H, double Cnrm,
                                    double delta, double eta, std::size_t d);

// Literals plus overrides resolved into usable integer budgets. Throws
// Overflow when an uncapped budget exceeds 2^63 episodes.
ScheduleParams params_t(std::size_t A, std::size_t H, double Cnrm, double delta,
                        double eps, std::size_t d, const BudgetOverrides& ov = {});
ScheduleParams params_reachable(std::size_t A, std::size_t H, double Cnrm,
                                double delta, double eta, std::size_t d,
                                const BudgetOverrides& ov = {});

struct StepLog {
  std::size_t h = 0;
  bool esc_ok = false;
  std::uint64_t esc_episodes = 0, pc_episodes = 0;
  std::size_t cover_size = 0;  // greedy-cover output size before lifting
};

// Forward exploration pass for reachable models: at each step, synthesize an
// emulator from the current cover, distill it into the next cover, and push
// the cover forward by one uniform action. Returns covers for steps 1..H
// (index 0 padding). Throws CoverFailure when emulator synthesis fails.
struct SlmResult {
  std::vector<std::vector<Policy>> covers;  // [h] for h in [1..H], index 0 padding
  std::vector<StepLog> steps;
  std::uint64_t episodes = 0;
  ScheduleParams params;
};
SlmResult slm(double delta, EnvHandle& env, const ScheduleParams& params);

// Backup-set enrichment: the visited-cover policies rewired through one
// uniform action into the step's distillation policy, together with that
// policy itself and the raw distillation output. Covers are read at
// [1..h]; the step-0 term contributes the distillation policy alone.
std::vector<Policy> sigma_h(const std::vector<std::vector<Policy>>& covers,
                            std::size_t h, const std::vector<Policy>& cover_bar,
                            const Policy& final_policy);

struct PcOutput {
  std::size_t h = 0;
  std::vector<Policy> cover_bar;  // distilled cover before lifting
  Policy final_policy;            // the policy that triggered the distiller's stop
};

struct PhaseState {
  std::size_t t = 0;                        // 1-based phase index
  std::vector<Policy> gamma;                // backup set at phase start
  std::vector<std::vector<Policy>> covers;  // [h] for h in [1..H], index 0 padding
  std::vector<PcOutput> pc_outputs;         // one per visited odd step
  std::vector<StepLog> steps;
  std::uint64_t episodes = 0;
};

// Phased exploration without a reachability assumption: each phase replays
// the backup set alongside the fresh covers while drawing data, visits odd
// steps only, and enriches the backup set from its distillation outputs.
// An infeasible synthesis anywhere aborts the whole run (bottom = true).
struct SlmtResult {
  bool bottom = false;
  std::size_t bottom_phase = 0, bottom_step = 0;  // set when bottom
  std::vector<PhaseState> phases;  // completed phases, plus the aborted one
  std::vector<Policy> gamma_final;
  double alpha = 0.0;
  std::uint64_t T = 0;
  std::uint64_t episodes = 0;
  ScheduleParams params;
};
SlmtResult slmt(double eps, double delta, EnvHandle& env,
                const BudgetOverrides& ov = {});

// Full learner: phased exploration, then one reward-directed policy search
// over the union of every phase's covers. When exploration aborts, the
// returned policy is uniform and failed is set instead of throwing.
struct OptResult {
  Policy policy;
  bool failed = false;
  std::uint64_t episodes = 0;       // exploration plus policy search
  std::uint64_t psdp_episodes = 0;
  std::uint64_t N_rew = 0;          // resolved per-step search budget
  SlmtResult exploration;
};
OptResult opt(double eps, double delta, EnvHandle& env,
              const BudgetOverrides& ov = {});

}  // namespace slmdp

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "slmdp/linalg.hpp"
#include "slmdp/mdp.hpp"

namespace slmdp {

// Compressed transition summary at step h: m candidate factors with witness
// states standing in for the unknown ground-truth mu.
struct Emulator {
  std::size_t h = 0;
  std::vector<Vec> mus;                // [j] -> dim d
  std::vector<std::size_t> witnesses;  // [j] -> state index observed at step h+1
  double budget = 0.0;                 // the C the program was solved under
  double eps_cvx = 0.0;
  std::size_t n = 0, m = 0;
  ResidualReport residuals;            // relaxed-program residuals at the solution
};

struct TransitionSample {
  std::size_t x = 0, a = 0, x_next = 0;
  Vec phi;       // phi_h(x, a)
  Vec next_avg;  // mean-over-actions feature of x_next at step h+1
};

struct TransitionDataset {
  std::size_t h = 0;
  std::vector<TransitionSample> rows;  // n rows
};

struct StateSample {
  std::size_t x = 0;  // state observed at step h+1
  Vec avg;            // its mean-over-actions feature at step h+1
};

struct StateDataset {
  std::size_t h = 0;
  std::vector<StateSample> rows;  // m rows
};

std::pair<TransitionDataset, StateDataset> draw_data(std::size_t h,
                                                     const std::vector<Policy>& cover,
                                                     std::size_t n, std::size_t m,
                                                     EnvHandle& env);

// Fair-coin mixture of the cover roll-in and the replay-set roll-in; an empty
// replay set falls back to pure cover sampling.
std::pair<TransitionDataset, StateDataset> draw_data_trunc(
    std::size_t h, const std::vector<Policy>& cover, const std::vector<Policy>& replay,
    std::size_t n, std::size_t m, EnvHandle& env);

// Emulator synthesis: per-coordinate l1 regression, then the convex
// feasibility program over candidate factors, then rounding back inside the
// budget. Returns nullopt when the solver reports Infeasible or runs out of
// budget (the caller's "bottom" result). eps_apx/eps_neg control the
// relaxation and rounding radii; they default to eps_cvx when unset.
struct EscOptions {
  double eps_apx = 0.0;
  double eps_neg = 0.0;
  std::size_t solver_budget = 200000;
  std::size_t regression_iters = 200000;
};

std::optional<Emulator> esc(std::size_t h, const std::vector<Policy>& cover,
                            double eps_cvx, double C, std::size_t n, std::size_t m,
                            EnvHandle& env, const EscOptions& opt = {});

std::optional<Emulator> esct(std::size_t h, const std::vector<Policy>& cover,
                             const std::vector<Policy>& replay, double eps_cvx, double C,
                             std::size_t n, std::size_t m, EnvHandle& env,
                             const EscOptions& opt = {});

// Appendix-style relaxation radius: the least of the caller's tolerances and
// the two coupling terms, floored at 1e-12 (the floor is recorded by the
// residual report downstream).
double relaxation_radius(double eps_neg, double eps_cvx, double eps_apx, std::size_t m,
                         double C);

// Scales a relaxed solution back inside the exact budget and zeroes
// negligible factors; total l1 change is at most eps_apx/m per factor.
std::vector<Vec> round_relaxed_solution(const std::vector<Vec>& mus, double C,
                                        double eps_relax, double eps_apx);

}  // namespace slmdp

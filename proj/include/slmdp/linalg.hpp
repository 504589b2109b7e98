#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace slmdp {

using Vec = std::vector<double>;

struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Infeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double dot(const Vec& a, const Vec& b);
double l1_norm(const Vec& v);
double linf_norm(const Vec& v);

// Euclidean projection onto {u : ||u||_1 <= radius}. Returns v unchanged when
// it is already inside the ball; radius 0 gives the zero vector.
Vec project_l1_ball(const Vec& v, double radius);

struct RegressionProblem {
  std::vector<Vec> covariates;  // n rows, dim d, entries in [-1,1]
  Vec responses;                // length n
  double radius = 0.0;          // l1 budget on the weight vector
  double tol = 1e-6;            // duality-gap target
  std::size_t max_iters = 200000;
};

// Mean squared error of w over the problem's rows.
double regression_objective(const RegressionProblem& p, const Vec& w);

// Constrained least squares over the l1 ball, solved by Frank-Wolfe with exact
// line search. The linear minimization oracle is the signed vertex of the ball
// along the largest-magnitude gradient coordinate; the standard FW gap
// <grad, w - s> upper-bounds the suboptimality and is the stopping certificate.
// Deterministic. Throws NonConvergence if the gap does not reach tol within
// max_iters. n = 0 or radius = 0 returns the zero vector.
Vec l1_lsq(const RegressionProblem& p);

enum class NonnegMode { PerSampleAction, AllActions };

struct EmulatorProgram {
  std::vector<Vec> transitions_data;             // n feature rows phi_i, dim d
  std::vector<std::vector<Vec>> action_slices;   // AllActions mode: per row, one vector per action
  std::vector<Vec> witness_features;             // m rows phibar_j, dim d
  std::vector<Vec> regressors;                   // d vectors w_l (outer index = output coordinate)
  double norm_budget = 0.0;                      // C
  double eps_cvx = 0.0;
  double eps_relax = 0.0;
  NonnegMode nonneg_mode = NonnegMode::PerSampleAction;
};

struct ResidualReport {
  double norm_violation = 0.0;    // max(0, sum_j ||mu_j||_1 - (C + eps_relax))
  double nonneg_violation = 0.0;  // max(0, -eps_relax - min inner product)
  double quad_violation = 0.0;    // max over l of max(0, q_l - (eps_cvx^2 + eps_relax^2))
  double eps_relax_used = 0.0;
  bool eps_relax_clamped = false;
  std::size_t iterations = 0;
};

struct FeasiblePoint {
  std::vector<Vec> mus;  // m vectors of dim d
  ResidualReport residual_report;
};

// Computes the relaxed-program residuals of a candidate point (used both by the
// solver and by tests for self-consistency checks).
ResidualReport emulator_program_residuals(const EmulatorProgram& program,
                                          const std::vector<Vec>& mus);

// First-order feasibility solver for the relaxed emulator program: projected
// subgradient descent on the max-violation merit function over the set
// {sum_j ||mu_j||_1 <= C + eps_relax}. All constraints are convex (linear
// nonnegativity, convex quadratic residuals), so a Polyak step toward merit 0
// converges whenever the relaxed program is strictly feasible.
// Throws Infeasible when the merit stalls above the feasibility slack at a
// stationary point, NonConvergence when the budget runs out first.
FeasiblePoint solve_emulator_feasibility(const EmulatorProgram& program, std::size_t budget);

}  // namespace slmdp

#include "slmdp/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>

#include "slmdp/log.hpp"

namespace slmdp {

double dot(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l1_norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

double linf_norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::fabs(x));
  return s;
}

Vec project_l1_ball(const Vec& v, double radius) {
  if (radius <= 0.0) return Vec(v.size(), 0.0);
  double norm = l1_norm(v);
  if (norm <= radius) return v;

  // Soft threshold at the tau solving sum_i max(|v_i| - tau, 0) = radius.
  // Found by sorting magnitudes (Duchi et al. style pivot).
  Vec mag(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) mag[i] = std::fabs(v[i]);
  std::sort(mag.begin(), mag.end(), std::greater<double>());

  double cum = 0.0;
  double tau = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < mag.size(); ++i) {
    cum += mag[i];
    double t = (cum - radius) / static_cast<double>(i + 1);
    if (t < mag[i]) {
      tau = t;
      k = i + 1;
    } else {
      break;
    }
  }
  (void)k;

  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double m = std::fabs(v[i]) - tau;
    out[i] = m > 0.0 ? (v[i] > 0.0 ? m : -m) : 0.0;
  }
  return out;
}

double regression_objective(const RegressionProblem& p, const Vec& w) {
  const std::size_t n = p.covariates.size();
  if (n == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = dot(p.covariates[i], w) - p.responses[i];
    s += r * r;
  }
  return s / static_cast<double>(n);
}

// Frank-Wolfe with away steps over conv{0, +-radius e_j} (= the l1 ball).
// The away steps matter: plain FW zigzags near sparse optima and cannot reach
// small duality gaps in reasonable time. The iterate is kept as an explicit
// convex combination of atoms so away directions are available.
Vec l1_lsq(const RegressionProblem& p) {
  const std::size_t n = p.covariates.size();
  const std::size_t d = n > 0 ? p.covariates[0].size() : 0;
  if (n == 0 || d == 0 || p.radius <= 0.0) return Vec(d, 0.0);

  const double r = p.radius;
  const double inv_n = 1.0 / static_cast<double>(n);

  // atom weights: lam_zero for the origin, lam_pos/lam_neg[j] for +-r e_j
  Vec lam_pos(d, 0.0), lam_neg(d, 0.0);
  double lam_zero = 1.0;
  std::vector<std::size_t> active;  // coordinates with any nonzero weight

  Vec w(d, 0.0);
  Vec xw(n, 0.0);  // X w, maintained incrementally
  Vec grad(d, 0.0);
  Vec xdir(n, 0.0);

  for (std::size_t it = 0; it < p.max_iters; ++it) {
    // grad = (2/n) X^T (Xw - y)
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec& row = p.covariates[i];
      double c = 2.0 * inv_n * (xw[i] - p.responses[i]);
      for (std::size_t j = 0; j < d; ++j) grad[j] += c * row[j];
    }

    // FW atom: +-r e_j* at the largest-magnitude gradient coordinate
    std::size_t jstar = 0;
    double best = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      double a = std::fabs(grad[j]);
      if (a > best) {
        best = a;
        jstar = j;
      }
    }
    double s_val = grad[jstar] > 0.0 ? -r : r;
    double gw = dot(grad, w);
    double gap_fw = gw - grad[jstar] * s_val;
    if (gap_fw <= p.tol) return w;

    // away atom: active atom with the largest <grad, v> (origin scores 0)
    double away_score = lam_zero > 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    int away_kind = lam_zero > 0.0 ? 0 : -1;  // 0 = origin, 1 = +e_j, 2 = -e_j
    std::size_t away_j = 0;
    for (std::size_t j : active) {
      if (lam_pos[j] > 0.0 && r * grad[j] > away_score) {
        away_score = r * grad[j];
        away_kind = 1;
        away_j = j;
      }
      if (lam_neg[j] > 0.0 && -r * grad[j] > away_score) {
        away_score = -r * grad[j];
        away_kind = 2;
        away_j = j;
      }
    }
    double gap_away = away_score - gw;

    bool fw_step = gap_fw >= gap_away || away_kind < 0;
    double num, gmax;
    if (fw_step) {
      // dir = s - w
      for (std::size_t i = 0; i < n; ++i)
        xdir[i] = s_val * p.covariates[i][jstar] - xw[i];
      num = gap_fw;
      gmax = 1.0;
    } else {
      // dir = w - v
      double v_val = away_kind == 1 ? r : (away_kind == 2 ? -r : 0.0);
      if (away_kind == 0) {
        xdir = xw;
      } else {
        for (std::size_t i = 0; i < n; ++i)
          xdir[i] = xw[i] - v_val * p.covariates[i][away_j];
      }
      num = gap_away;
      double lam_v = away_kind == 0 ? lam_zero
                                    : (away_kind == 1 ? lam_pos[away_j] : lam_neg[away_j]);
      gmax = lam_v >= 1.0 ? std::numeric_limits<double>::infinity()
                          : lam_v / (1.0 - lam_v);
    }

    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) denom += xdir[i] * xdir[i];
    denom *= 2.0 * inv_n;
    if (denom <= 0.0)
      throw NonConvergence("l1_lsq: flat direction with positive gap");
    double gamma = std::min(num / denom, gmax);

    if (fw_step) {
      // all weights shrink by (1-gamma), the FW atom gains gamma
      double keep = 1.0 - gamma;
      lam_zero *= keep;
      for (std::size_t j : active) {
        lam_pos[j] *= keep;
        lam_neg[j] *= keep;
      }
      if (lam_pos[jstar] == 0.0 && lam_neg[jstar] == 0.0 &&
          std::find(active.begin(), active.end(), jstar) == active.end())
        active.push_back(jstar);
      (s_val > 0.0 ? lam_pos[jstar] : lam_neg[jstar]) += gamma;
    } else {
      // all weights grow by (1+gamma), the away atom loses gamma
      double grow = 1.0 + gamma;
      lam_zero *= grow;
      for (std::size_t j : active) {
        lam_pos[j] *= grow;
        lam_neg[j] *= grow;
      }
      double& lv = away_kind == 0 ? lam_zero
                                  : (away_kind == 1 ? lam_pos[away_j] : lam_neg[away_j]);
      lv -= gamma;
      if (lv < 1e-15) lv = 0.0;  // drop step
    }

    for (std::size_t j : active) w[j] = r * (lam_pos[j] - lam_neg[j]);
    for (std::size_t i = 0; i < n; ++i) xw[i] += gamma * xdir[i];

    // periodically prune exhausted atoms and rebuild xw to cancel drift
    if ((it & 63u) == 63u) {
      active.erase(std::remove_if(active.begin(), active.end(),
                                  [&](std::size_t j) {
                                    return lam_pos[j] == 0.0 && lam_neg[j] == 0.0;
                                  }),
                   active.end());
      std::fill(xw.begin(), xw.end(), 0.0);
      for (std::size_t j : active) {
        if (w[j] == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) xw[i] += w[j] * p.covariates[i][j];
      }
    }
  }
  throw NonConvergence("l1_lsq: duality gap above tol after max_iters");
}

namespace {

constexpr double kFeasSlack = 1e-9;  // absolute slack on every feasibility comparison
constexpr double kEpsRelaxFloor = 1e-12;

struct ProgramView {
  const EmulatorProgram& p;
  std::size_t n, m, d, L;
  double eps_relax;       // clamped
  bool clamped;
  double quad_bound;      // eps_cvx^2 + eps_relax^2
  std::vector<Vec> t;     // t[l][i] = <phi_i, w_l>

  explicit ProgramView(const EmulatorProgram& prog)
      : p(prog),
        n(prog.transitions_data.size()),
        m(prog.witness_features.size()),
        d(prog.transitions_data.empty()
              ? (prog.witness_features.empty() ? prog.regressors.size()
                                               : prog.witness_features[0].size())
              : prog.transitions_data[0].size()),
        L(prog.regressors.size()) {
    eps_relax = prog.eps_relax;
    clamped = eps_relax < kEpsRelaxFloor;
    if (clamped) eps_relax = kEpsRelaxFloor;
    quad_bound = prog.eps_cvx * prog.eps_cvx + eps_relax * eps_relax;
    t.assign(L, Vec(n, 0.0));
    for (std::size_t l = 0; l < L; ++l)
      for (std::size_t i = 0; i < n; ++i)
        t[l][i] = dot(p.transitions_data[i], p.regressors[l]);
  }
};

// Per-row predicted average feature: pred_i = sum_j <phi_i, mu_j> * phibar_j.
// Returns both the n x m inner-product table and the n x L prediction table.
void forward(const ProgramView& v, const std::vector<Vec>& mus,
             std::vector<Vec>* inner, std::vector<Vec>* pred) {
  inner->assign(v.n, Vec(v.m, 0.0));
  pred->assign(v.n, Vec(v.L, 0.0));
  for (std::size_t i = 0; i < v.n; ++i) {
    const Vec& phi = v.p.transitions_data[i];
    Vec& in_row = (*inner)[i];
    Vec& pr_row = (*pred)[i];
    for (std::size_t j = 0; j < v.m; ++j) {
      double s = dot(phi, mus[j]);
      in_row[j] = s;
      const Vec& wit = v.p.witness_features[j];
      for (std::size_t l = 0; l < v.L; ++l) pr_row[l] += s * wit[l];
    }
  }
}

}  // namespace

ResidualReport emulator_program_residuals(const EmulatorProgram& program,
                                          const std::vector<Vec>& mus) {
  ProgramView v(program);
  ResidualReport rep;
  rep.eps_relax_used = v.eps_relax;
  rep.eps_relax_clamped = v.clamped;

  double total = 0.0;
  for (const Vec& mu : mus) total += l1_norm(mu);
  rep.norm_violation = std::max(0.0, total - (program.norm_budget + v.eps_relax));

  double min_ip = 0.0;
  if (program.nonneg_mode == NonnegMode::PerSampleAction) {
    for (std::size_t i = 0; i < v.n; ++i)
      for (std::size_t j = 0; j < v.m; ++j)
        min_ip = std::min(min_ip, dot(program.transitions_data[i], mus[j]));
  } else {
    for (std::size_t i = 0; i < v.n; ++i)
      for (const Vec& slice : program.action_slices[i])
        for (std::size_t j = 0; j < v.m; ++j)
          min_ip = std::min(min_ip, dot(slice, mus[j]));
  }
  rep.nonneg_violation = std::max(0.0, -v.eps_relax - min_ip);

  if (v.n > 0 && v.L > 0) {
    std::vector<Vec> inner, pred;
    forward(v, mus, &inner, &pred);
    double worst = 0.0;
    for (std::size_t l = 0; l < v.L; ++l) {
      double q = 0.0;
      for (std::size_t i = 0; i < v.n; ++i) {
        double r = v.t[l][i] - pred[i][l];
        q += r * r;
      }
      q /= static_cast<double>(v.n);
      worst = std::max(worst, q - v.quad_bound);
    }
    rep.quad_violation = std::max(0.0, worst);
  }
  return rep;
}

FeasiblePoint solve_emulator_feasibility(const EmulatorProgram& program, std::size_t budget) {
  ProgramView v(program);
  const std::size_t m = v.m;
  const std::size_t d = v.d;
  const std::size_t n = v.n;
  const std::size_t L = v.L;
  const double ball = program.norm_budget + v.eps_relax;

  std::vector<Vec> mus(m, Vec(d, 0.0));

  auto project = [&](std::vector<Vec>& cur) {
    // concatenate, project onto the l1 ball of radius C + eps_relax, split back
    Vec flat(m * d);
    for (std::size_t j = 0; j < m; ++j)
      std::copy(cur[j].begin(), cur[j].end(), flat.begin() + j * d);
    double norm = 0.0;
    for (double x : flat) norm += std::fabs(x);
    if (norm > ball) {
      flat = project_l1_ball(flat, ball);
      for (std::size_t j = 0; j < m; ++j)
        std::copy(flat.begin() + j * d, flat.begin() + (j + 1) * d, cur[j].begin());
    }
  };

  std::vector<Vec> inner, pred;
  double best_merit = std::numeric_limits<double>::infinity();
  std::vector<Vec> best_mus = mus;
  std::size_t last_improve = 0;
  const std::size_t stall_window = std::max<std::size_t>(800, budget / 10);

  for (std::size_t it = 0; it < budget; ++it) {
    forward(v, mus, &inner, &pred);

    // worst nonnegativity violation
    double worst_nn = 0.0;
    std::size_t nn_i = 0, nn_j = 0, nn_a = 0;
    if (program.nonneg_mode == NonnegMode::PerSampleAction) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          double viol = -v.eps_relax - inner[i][j];
          if (viol > worst_nn) {
            worst_nn = viol;
            nn_i = i;
            nn_j = j;
          }
        }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const auto& slices = program.action_slices[i];
        for (std::size_t a = 0; a < slices.size(); ++a)
          for (std::size_t j = 0; j < m; ++j) {
            double viol = -v.eps_relax - dot(slices[a], mus[j]);
            if (viol > worst_nn) {
              worst_nn = viol;
              nn_i = i;
              nn_j = j;
              nn_a = a;
            }
          }
      }
    }

    // worst quadratic violation
    double worst_q = 0.0;
    std::size_t q_l = 0;
    if (n > 0) {
      for (std::size_t l = 0; l < L; ++l) {
        double q = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          double r = v.t[l][i] - pred[i][l];
          q += r * r;
        }
        q /= static_cast<double>(n);
        double viol = q - v.quad_bound;
        if (viol > worst_q) {
          worst_q = viol;
          q_l = l;
        }
      }
    }

    double merit = std::max(worst_nn, worst_q);
    if (merit < best_merit - 1e-15) {
      best_merit = merit;
      best_mus = mus;
      last_improve = it;
    }
    if (merit <= kFeasSlack) {
      ResidualReport rep = emulator_program_residuals(program, mus);
      rep.iterations = it + 1;
      return FeasiblePoint{std::move(mus), rep};
    }
    if (it - last_improve > stall_window) {
      throw Infeasible("solve_emulator_feasibility: merit stalled at " +
                       std::to_string(best_merit));
    }

    // subgradient of the active constraint
    std::vector<Vec> g(m, Vec(d, 0.0));
    double gnorm2 = 0.0;
    if (worst_nn >= worst_q) {
      // constraint -<phi, mu_j> - eps_relax <= 0 ; subgradient wrt mu_j is -phi
      const Vec& phi = program.nonneg_mode == NonnegMode::PerSampleAction
                           ? program.transitions_data[nn_i]
                           : program.action_slices[nn_i][nn_a];
      for (std::size_t c = 0; c < d; ++c) {
        g[nn_j][c] = -phi[c];
        gnorm2 += phi[c] * phi[c];
      }
    } else {
      // q_l(mu) = (1/n) sum_i (t_il - pred_il)^2 ;
      // d q_l / d mu_j = -(2/n) phibar_j[l] * sum_i r_il phi_i
      Vec u(d, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        double r = v.t[q_l][i] - pred[i][q_l];
        const Vec& phi = program.transitions_data[i];
        for (std::size_t c = 0; c < d; ++c) u[c] += r * phi[c];
      }
      double scale = -2.0 / static_cast<double>(n);
      for (std::size_t j = 0; j < m; ++j) {
        double wj = scale * program.witness_features[j][q_l];
        for (std::size_t c = 0; c < d; ++c) {
          g[j][c] = wj * u[c];
          gnorm2 += g[j][c] * g[j][c];
        }
      }
    }

    if (gnorm2 <= 0.0) {
      throw Infeasible("solve_emulator_feasibility: zero subgradient with positive merit");
    }

    // Polyak step toward merit 0
    double step = merit / gnorm2;
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t c = 0; c < d; ++c) mus[j][c] -= step * g[j][c];
    project(mus);
  }

  throw NonConvergence("solve_emulator_feasibility: budget exhausted, best merit " +
                       std::to_string(best_merit));
}

}  // namespace slmdp

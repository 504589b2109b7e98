#pragma once

#include <cstddef>
#include <vector>

#include "slmdp/emulator.hpp"
#include "slmdp/mdp.hpp"

namespace slmdp {

// Exact dynamic programming on finite models. Everything here tolerates
// substochastic transition rows (missing mass flows to an implicit absorbing
// sink worth zero), which is what the truncated comparators produce.

struct VisitationTable {
  std::vector<Vec> per_step;  // [g] for g in [1..h], index 0 padding
};

VisitationTable visitation(const LinearMdpModel& model, const Policy& policy,
                           std::size_t h);
Vec visitation_at(const LinearMdpModel& model, const Policy& policy, std::size_t h);
// occupancy over (state, action) at step h: [x][a]
std::vector<Vec> state_action_visitation(const LinearMdpModel& model,
                                         const Policy& policy, std::size_t h);

// Exact expected total reward of a policy.
double policy_value(const LinearMdpModel& model, const Policy& policy);

// max over all policies of E[c(x_h, a_h)], with the exact argmax as a
// deterministic tabular policy. c is [x][a].
struct MaxFunctionalResult {
  double value = 0.0;
  Policy policy;
};
MaxFunctionalResult max_linear_functional(const LinearMdpModel& model, std::size_t h,
                                          const std::vector<Vec>& c);

// Brute force over every deterministic action assignment for steps 1..h-1
// (step h resolved pointwise). Exponential; only for cross-checking tiny models.
double max_functional_by_enumeration(const LinearMdpModel& model, std::size_t h,
                                     const std::vector<Vec>& c);

// max over policies of the probability of being at state x at step h.
double max_visitation(const LinearMdpModel& model, std::size_t h, std::size_t x);

struct OptimalResult {
  double value = 0.0;
  Policy policy;
};
OptimalResult optimal_value(const LinearMdpModel& model);

struct CoverReport {
  double min_ratio = 0.0;  // min over states of mixture visitation / max visitation
  std::size_t witness_state = 0;
  double mix_at_witness = 0.0;
  double max_at_witness = 0.0;
  bool pass = false;
  bool truncation_approximate = false;
};
CoverReport check_policy_cover(const LinearMdpModel& model,
                               const std::vector<Policy>& cover, std::size_t h,
                               double alpha);

struct EmulatorReport {
  double total_norm = 0.0;
  double item1_slack = 0.0;      // total_norm - C (<= 0 passes)
  double item2_violation = 0.0;  // worst over j of (-eps_neg*||mu_j||_1 - min_pi <E phi, mu_j>)
  std::size_t item2_witness = 0;
  double item3_overshoot = 0.0;  // worst functional value - eps_apx (<= 0 passes)
  std::size_t item3_coord = 0;
  int item3_sign = 0;
  bool pass1 = false, pass2 = false, pass3 = false, pass = false;
  bool truncation_approximate = false;
};
EmulatorReport check_emulator(const LinearMdpModel& model, const Emulator& emulator,
                              std::size_t h, double eps_apx, double eps_neg, double C);

// One-shot stand-in for the layer-truncated comparator model: at odd arrival
// steps, transition factors of states whose max visitation falls below
// trunc * ||mu(x)||_1 are zeroed, unless the replay mixture reaches them with
// mass >= tsmall * ||mu(x)||_1. Reports from the *_truncated checkers carry
// truncation_approximate = true.
struct TruncParams {
  double trunc = 0.0;
  double tsmall = 0.0;
  std::vector<Policy> replay;  // Gamma; empty = no replay rescue
};

LinearMdpModel truncate_model(const LinearMdpModel& model, const TruncParams& params);

CoverReport check_truncated_policy_cover(const LinearMdpModel& model,
                                         const std::vector<Policy>& cover,
                                         std::size_t h, double alpha,
                                         const TruncParams& params);

// Def-style truncated emulator check: item 2 uses the clipped per-state
// deficit E[max(0, max_a -<phi, mu_j>)], and items 2-3 are evaluated under
// both the bare truncation and the replay-rescued truncation.
EmulatorReport check_truncated_emulator(const LinearMdpModel& model,
                                        const Emulator& emulator, std::size_t h,
                                        double eps_apx, double eps_neg, double C,
                                        const TruncParams& params);

}  // namespace slmdp

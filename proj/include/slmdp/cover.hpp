#pragma once

#include <cstddef>
#include <vector>

#include "slmdp/mdp.hpp"

namespace slmdp {

// Greedy policy-cover construction: repeatedly chase the residual transition
// mass of the still-uncovered items, claim whatever the new policy reaches at
// a (xi / 2C) fraction of its norm, and stop once the residual mass the best
// policy can touch drops below xi.
struct GreedyCoverResult {
  std::vector<Policy> cover;           // one policy per completed iteration
  std::vector<std::size_t> covered;    // claimed indices, in claim order
  std::vector<std::size_t> uncovered;  // indices never claimed
  Policy final_policy;                 // the policy that triggered the break

  struct Iteration {
    Vec direction;                        // residual factor sum the policy chased
    Vec phi_hat;                          // feature estimate of the new policy
    double score = 0.0;                   // <phi_hat, direction>
    bool stopped = false;                 // this iteration triggered the break
    std::vector<std::size_t> claimed;     // indices newly covered
  };
  std::vector<Iteration> log;
  std::size_t episodes_used = 0;
};

// Exact-oracle variant over the model's own transition factors at step h+1.
// Indices range over states; policies come from the oracle argmax, and all
// expectations are exact. Consumes no episodes.
GreedyCoverResult ideal_greedy_cover(const LinearMdpModel& model, std::size_t h,
                                     double C, double xi);

// Learned variant over candidate factors mu_hat: psdp supplies the chasing
// policy and fe the feature estimate. covers[g] must hold roll-in policies
// for g in [1..h-1]. Requires sum_j ||mu_hat[j]||_1 <= C_emp.
GreedyCoverResult pc(std::size_t h, const std::vector<Vec>& mu_hat, double xi,
                     double C_emp, const std::vector<std::vector<Policy>>& covers,
                     std::size_t N, EnvHandle& env);

}  // namespace slmdp

#pragma once

#include <cstddef>
#include <vector>

#include "slmdp/mdp.hpp"

namespace slmdp {

// Policy search by dynamic programming against a fixed direction: fits one
// linear rule per step, backward from the target step, each by l1-constrained
// regression on freshly sampled roll-in data.
struct PsdpRequest {
  std::size_t k = 1;                        // target step
  Vec theta;                                // direction applied to phi_k
  std::vector<std::vector<Policy>> covers;  // [h] for h in [1..k-1], index 0 padding
  std::size_t N = 1;                        // episodes per fitted step
  double radius = -1.0;                     // l1 radius; <0 picks the default schedule
  double tol = 1e-6;
  std::size_t max_iters = 200000;
};

// Returns a Linear policy over steps 1..k. Consumes exactly (k-1)*N episodes;
// k=1 returns the argmax-theta policy without touching the environment.
Policy psdp(const PsdpRequest& req, EnvHandle& env);

// Environmental-reward variant: labels are the observed reward-to-go, the
// loop runs h = H..1, and the default radius is Cnrm*H. Consumes H*N episodes.
Policy psdp_rew(const std::vector<std::vector<Policy>>& covers, std::size_t N,
                EnvHandle& env, double radius = -1.0);

// Empirical mean of phi_k(x_k, a_k) over N episodes under the policy.
Vec fe(std::size_t k, const Policy& policy, std::size_t N, EnvHandle& env);

// Episodes needed for an l-infinity feature estimate at accuracy eps with
// confidence 1-delta in dimension d.
std::size_t n_fe(double eps, double delta, std::size_t d);

}  // namespace slmdp

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "slmdp/errors.hpp"
#include "slmdp/linalg.hpp"
#include "slmdp/rng.hpp"

namespace slmdp {

// Finite episodic linear MDP. Steps are 1-based (h in [1..H]); the h=0 slots
// of the per-step arrays are unused padding so indices match the math.
// Transition factors mu exist for h in [2..H] (mu[h] describes arrival at
// step h). States are indices into state_ids/init.
struct LinearMdpModel {
  std::size_t H = 0;
  std::size_t A = 0;
  std::size_t d = 0;
  double Cnrm = 0.0;
  std::size_t k = 0;                    // declared sparsity (0 = undeclared)
  std::vector<std::size_t> support;     // declared support coordinates (may be empty)
  std::vector<std::string> state_ids;
  std::vector<std::vector<std::vector<Vec>>> phi;  // [h][x][a] -> dim d
  std::vector<std::vector<Vec>> mu;                // [h][x]    -> dim d
  std::vector<Vec> theta;                          // [h]       -> dim d
  Vec init;                                        // over states

  std::size_t num_states() const { return init.size(); }
  const Vec& features(std::size_t h, std::size_t x, std::size_t a) const {
    return phi[h][x][a];
  }
  Vec avg_features(std::size_t h, std::size_t x) const;  // mean over actions
  double reward(std::size_t h, std::size_t x, std::size_t a) const {
    return dot(phi[h][x][a], theta[h]);
  }
  double trans_prob(std::size_t h, std::size_t x, std::size_t a, std::size_t xp) const {
    return dot(phi[h][x][a], mu[h + 1][xp]);
  }
};

class Policy;

struct PolicyNode {
  enum class Kind { Uniform, Linear, Tabular, Compose, Mixture };
  Kind kind = Kind::Uniform;
  std::vector<Vec> weights;                       // Linear: [h], 1-based padded
  std::vector<std::vector<std::size_t>> actions;  // Tabular: [h][x], 1-based padded
  std::size_t switch_step = 0;                    // Compose: tail takes over at this step
  std::vector<Policy> children;                   // Compose: {base, tail}; Mixture: members
};

// Immutable policy tree. Compose(base, h, tail) follows base before step h and
// tail from step h on, so Compose(base, 1, tail) is tail and
// Compose(base, H+1, tail) is base. Mixture members are drawn uniformly once
// per episode (sample_episode resolves them before stepping).
class Policy {
 public:
  Policy();  // uniform

  static Policy uniform();
  static Policy linear(std::vector<Vec> weights);  // weights[h] for h in [1..], index 0 padding
  static Policy tabular(std::vector<std::vector<std::size_t>> actions);
  static Policy compose(Policy base, std::size_t h, Policy tail);
  static Policy mixture(std::vector<Policy> members);

  const PolicyNode& node() const { return *node_; }

 private:
  explicit Policy(std::shared_ptr<const PolicyNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const PolicyNode> node_;
};

struct Trajectory {
  std::vector<std::size_t> states;   // [h], 1-based padded
  std::vector<std::size_t> actions;  // [h], 1-based padded
  Vec rewards;                       // [h], 1-based padded
};

// Single-owner episodic access point; counts consumed episodes. Identical
// (seed, episode index, policy, model) reproduce a trajectory exactly.
struct EnvHandle {
  const LinearMdpModel* model = nullptr;
  std::uint64_t seed = 0;
  std::uint64_t episodes = 0;

  EnvHandle() = default;
  EnvHandle(const LinearMdpModel& m, std::uint64_t s) : model(&m), seed(s) {}
};

// One action from the policy at (h, x). phi_slice holds phi(h, x, a) per
// action. Linear breaks argmax ties toward the lowest action index; steps
// beyond a Linear policy's defined weights act as all-zero weights.
std::size_t act(const Policy& policy, std::size_t h, std::size_t x,
                const std::vector<Vec>& phi_slice, RngStream& rng);

// Replaces every Mixture node by one uniformly drawn member (recursively).
Policy resolve_mixtures(const Policy& policy, RngStream& rng);

Trajectory sample_episode(EnvHandle& env, const Policy& policy);

// unif(set) at steps < h, uniform action at step h, tail from h+1 on.
Policy rollin_distribution_sampler(const std::vector<Policy>& set, std::size_t h,
                                   const Policy& tail);

}  // namespace slmdp

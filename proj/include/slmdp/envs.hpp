#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "slmdp/mdp.hpp"

namespace slmdp {

struct SparseEnvConfig {
  std::size_t d = 8;
  std::size_t k = 2;
  std::size_t A = 2;
  std::size_t H = 2;
  std::uint64_t seed = 0;
  double reachability_floor = 0.0;  // eta; 0 = unconstrained
  std::size_t latent_states = 2;    // number of states
};

// Synthetic sparse model: a size-k support set carries all transition and
// reward structure (features there are convex weights over k latent
// transition channels, so probabilities are valid by construction); the
// remaining d-k coordinates are random decoys. With a positive reachability
// floor the draw is rejected until the oracle confirms every state is
// reachable at the requested level.
LinearMdpModel gen_sparse_env(const SparseEnvConfig& cfg);

struct DtBlockConfig {
  std::size_t n = 3;  // observation bits
  std::size_t s = 2;  // latent states, a power of two
  std::size_t A = 2;
  std::size_t H = 2;
  std::uint64_t seed = 0;
};

// Conjunctive-clause indicator features: one coordinate per (clause, action)
// pair, clauses being all conjunctions of log2(s) literals on distinct
// variables, enumerated lexicographically by (variable tuple, sign pattern)
// and then blocked by action.
Vec phi_dt(const std::vector<int>& bits, std::size_t a, const DtBlockConfig& cfg);

std::size_t dt_feature_dim(const DtBlockConfig& cfg);

struct BlockGroundTruth {
  std::vector<std::size_t> tree_vars;  // the decoder's variables, ascending
  std::vector<std::size_t> decode;     // observation index -> latent state
  // latent_trans[h][z][a][z'], h in [1..H-1]; dyadic entries, exact row sums
  std::vector<std::vector<std::vector<Vec>>> latent_trans;
  // latent_reward[h][z][a], h in [1..H]
  std::vector<std::vector<Vec>> latent_reward;
  Vec latent_init;
};

// Latent-state block MDP with a conjunction decoder, embedded as a linear
// model over the clause features. Emission supports are the decoder's own
// preimages, hence disjoint; all probabilities are dyadic so the embedded
// transition rows sum to one exactly.
std::pair<BlockGroundTruth, LinearMdpModel> gen_dt_block_mdp(const DtBlockConfig& cfg);

struct ValidationReport {
  double phi_linf_excess = 0.0;     // max ||phi||_inf - 1
  double trans_negativity = 0.0;    // most negative transition mass (as a positive number)
  std::size_t neg_h = 0, neg_x = 0, neg_a = 0, neg_xp = 0;
  double row_sum_drift = 0.0;       // max |row sum - 1|
  double reward_drift = 0.0;        // max distance of <phi,theta> below 0 / above 1
  double mu_budget_excess = 0.0;    // max_h sum_x ||mu||_1 - Cnrm
  double theta_budget_excess = 0.0; // max_h ||theta||_1 - Cnrm
  double init_drift = 0.0;          // |sum init - 1| and any negativity
  double support_leak = 0.0;        // largest mu/theta magnitude outside the declared support
  double tol = 0.0;
  bool passed = false;
};

ValidationReport validate_model(const LinearMdpModel& model, double tol = 1e-8);

}  // namespace slmdp

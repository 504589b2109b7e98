#include "slmdp/mdp.hpp"

#include <cassert>
#include <cmath>

namespace slmdp {

Vec LinearMdpModel::avg_features(std::size_t h, std::size_t x) const {
  Vec out(d, 0.0);
  for (std::size_t a = 0; a < A; ++a)
    for (std::size_t l = 0; l < d; ++l) out[l] += phi[h][x][a][l];
  double inv = 1.0 / static_cast<double>(A);
  for (double& v : out) v *= inv;
  return out;
}

Policy::Policy() : node_(std::make_shared<PolicyNode>()) {}

Policy Policy::uniform() { return Policy(); }

Policy Policy::linear(std::vector<Vec> weights) {
  auto n = std::make_shared<PolicyNode>();
  n->kind = PolicyNode::Kind::Linear;
  n->weights = std::move(weights);
  return Policy(std::move(n));
}

Policy Policy::tabular(std::vector<std::vector<std::size_t>> actions) {
  auto n = std::make_shared<PolicyNode>();
  n->kind = PolicyNode::Kind::Tabular;
  n->actions = std::move(actions);
  return Policy(std::move(n));
}

Policy Policy::compose(Policy base, std::size_t h, Policy tail) {
  auto n = std::make_shared<PolicyNode>();
  n->kind = PolicyNode::Kind::Compose;
  n->switch_step = h;
  n->children = {std::move(base), std::move(tail)};
  return Policy(std::move(n));
}

Policy Policy::mixture(std::vector<Policy> members) {
  if (members.empty()) throw EmptySet("mixture of zero policies");
  auto n = std::make_shared<PolicyNode>();
  n->kind = PolicyNode::Kind::Mixture;
  n->children = std::move(members);
  return Policy(std::move(n));
}

std::size_t act(const Policy& policy, std::size_t h, std::size_t x,
                const std::vector<Vec>& phi_slice, RngStream& rng) {
  const PolicyNode& n = policy.node();
  switch (n.kind) {
    case PolicyNode::Kind::Uniform:
      return rng.next_below(phi_slice.size());
    case PolicyNode::Kind::Linear: {
      // beyond the defined steps the weights read as zero: argmax ties, action 0
      if (h >= n.weights.size() || n.weights[h].empty()) return 0;
      const Vec& w = n.weights[h];
      std::size_t best = 0;
      double best_v = dot(phi_slice[0], w);
      for (std::size_t a = 1; a < phi_slice.size(); ++a) {
        double v = dot(phi_slice[a], w);
        if (v > best_v) {
          best_v = v;
          best = a;
        }
      }
      return best;
    }
    case PolicyNode::Kind::Tabular:
      return n.actions[h][x];
    case PolicyNode::Kind::Compose:
      return act(n.children[h < n.switch_step ? 0 : 1], h, x, phi_slice, rng);
    case PolicyNode::Kind::Mixture: {
      // callers that want once-per-episode draws resolve first; acting on an
      // unresolved mixture draws independently at each call
      std::size_t i = rng.next_below(n.children.size());
      return act(n.children[i], h, x, phi_slice, rng);
    }
  }
  return 0;
}

Policy resolve_mixtures(const Policy& policy, RngStream& rng) {
  const PolicyNode& n = policy.node();
  switch (n.kind) {
    case PolicyNode::Kind::Mixture: {
      std::size_t i = rng.next_below(n.children.size());
      return resolve_mixtures(n.children[i], rng);
    }
    case PolicyNode::Kind::Compose: {
      Policy base = resolve_mixtures(n.children[0], rng);
      Policy tail = resolve_mixtures(n.children[1], rng);
      return Policy::compose(std::move(base), n.switch_step, std::move(tail));
    }
    default:
      return policy;
  }
}

namespace {

std::size_t draw_categorical(const Vec& probs, RngStream& rng) {
  double u = rng.next_double();
  double cum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  return probs.size() - 1;  // guard against rounding at the top end
}

}  // namespace

Trajectory sample_episode(EnvHandle& env, const Policy& policy) {
  const LinearMdpModel& m = *env.model;
  const std::size_t S = m.num_states();

  RngStream ep = derive_stream(env.seed, {env.episodes});
  env.episodes += 1;
  RngStream mix_rng = ep.child(1);
  RngStream act_rng = ep.child(2);
  RngStream trn_rng = ep.child(3);

  Policy resolved = resolve_mixtures(policy, mix_rng);

  Trajectory traj;
  traj.states.assign(m.H + 1, 0);
  traj.actions.assign(m.H + 1, 0);
  traj.rewards.assign(m.H + 1, 0.0);

  std::size_t x = draw_categorical(m.init, trn_rng);
  for (std::size_t h = 1; h <= m.H; ++h) {
    std::size_t a = act(resolved, h, x, m.phi[h][x], act_rng);
    traj.states[h] = x;
    traj.actions[h] = a;
    traj.rewards[h] = m.reward(h, x, a);
    if (h == m.H) break;

    Vec probs(S);
    double clipped = 0.0;
    double total = 0.0;
    for (std::size_t xp = 0; xp < S; ++xp) {
      double p = m.trans_prob(h, x, a, xp);
      if (p < 0.0) {
        clipped -= p;
        p = 0.0;
      }
      probs[xp] = p;
      total += p;
    }
    if (clipped > 1e-6)
      throw InvalidModel("negative transition mass " + std::to_string(clipped));
    if (total <= 0.0) throw InvalidModel("zero transition mass");
    for (double& p : probs) p /= total;
    x = draw_categorical(probs, trn_rng);
  }
  return traj;
}

Policy rollin_distribution_sampler(const std::vector<Policy>& set, std::size_t h,
                                   const Policy& tail) {
  if (set.empty()) throw EmptySet("rollin over an empty policy set");
  std::vector<Policy> members;
  members.reserve(set.size());
  for (const Policy& p : set)
    members.push_back(
        Policy::compose(Policy::compose(p, h, Policy::uniform()), h + 1, tail));
  return Policy::mixture(std::move(members));
}

}  // namespace slmdp

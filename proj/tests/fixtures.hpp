#pragma once

#include <cstddef>
#include <vector>

#include "slmdp/mdp.hpp"

namespace slmdp::fixtures {

inline LinearMdpModel blank(std::size_t H, std::size_t A, std::size_t d,
                            std::size_t states) {
  LinearMdpModel m;
  m.H = H;
  m.A = A;
  m.d = d;
  m.Cnrm = static_cast<double>(d);
  m.state_ids.resize(states);
  for (std::size_t x = 0; x < states; ++x) m.state_ids[x] = "s" + std::to_string(x);
  m.init.assign(states, 0.0);
  m.phi.assign(H + 1, {});
  m.mu.assign(H + 1, {});
  m.theta.assign(H + 1, Vec(d, 0.0));
  for (std::size_t h = 1; h <= H; ++h)
    m.phi[h].assign(states, std::vector<Vec>(A, Vec(d, 0.0)));
  for (std::size_t h = 2; h <= H; ++h) m.mu[h].assign(states, Vec(d, 0.0));
  return m;
}

// One state, one action, H=2, reward 0.7 at both steps.
inline LinearMdpModel single_chain() {
  LinearMdpModel m = blank(2, 1, 1, 1);
  m.Cnrm = 1.0;
  m.init = {1.0};
  m.phi[1][0][0] = {1.0};
  m.phi[2][0][0] = {1.0};
  m.mu[2][0] = {1.0};
  m.theta[1] = {0.7};
  m.theta[2] = {0.7};
  return m;
}

// Two states, two actions, H=2; every action swaps the state.
inline LinearMdpModel flip_chain() {
  LinearMdpModel m = blank(2, 2, 2, 2);
  m.Cnrm = 2.0;
  m.init = {0.7, 0.3};
  for (std::size_t h = 1; h <= 2; ++h)
    for (std::size_t a = 0; a < 2; ++a) {
      m.phi[h][0][a] = {1.0, 0.0};
      m.phi[h][1][a] = {0.0, 1.0};
    }
  m.mu[2][0] = {0.0, 1.0};
  m.mu[2][1] = {1.0, 0.0};
  m.theta[1] = {0.5, 0.1};
  m.theta[2] = {0.3, 1.0};
  return m;
}

// Two states, H=2, starting at s0; action 1 swaps the state, action 0 keeps it.
inline LinearMdpModel switch_chain() {
  LinearMdpModel m = blank(2, 2, 2, 2);
  m.Cnrm = 2.0;
  m.init = {1.0, 0.0};
  for (std::size_t h = 1; h <= 2; ++h) {
    m.phi[h][0][0] = {0.0, 1.0};
    m.phi[h][0][1] = {1.0, 0.0};
    m.phi[h][1][0] = {1.0, 0.0};
    m.phi[h][1][1] = {0.0, 1.0};
  }
  m.mu[2][0] = {0.0, 1.0};
  m.mu[2][1] = {1.0, 0.0};
  m.theta[1] = {0.5, 0.1};
  m.theta[2] = {0.3, 1.0};
  return m;
}

// Two states, two actions, H=2, uniform start. Backward induction by hand:
//   V2 = (0.3, 1.0)
//   Q1(s0,*) = (0.5+0.3, 0.18+0.2*0.3+0.8*1.0) = (0.8, 1.04)
//   Q1(s1,*) = (0.5+0.3, 0.1+1.0)              = (0.8, 1.10)
//   V* = 0.5*1.04 + 0.5*1.10 = 1.07, optimal action 1 at both states.
inline LinearMdpModel hand_dp_model() {
  LinearMdpModel m = blank(2, 2, 2, 2);
  m.Cnrm = 2.0;
  m.init = {0.5, 0.5};
  m.phi[1][0][0] = {1.0, 0.0};
  m.phi[1][0][1] = {0.2, 0.8};
  m.phi[1][1][0] = {1.0, 0.0};
  m.phi[1][1][1] = {0.0, 1.0};
  m.phi[2][0][0] = {1.0, 0.0};
  m.phi[2][0][1] = {1.0, 0.0};
  m.phi[2][1][0] = {0.0, 1.0};
  m.phi[2][1][1] = {0.0, 1.0};
  m.mu[2][0] = {1.0, 0.0};
  m.mu[2][1] = {0.0, 1.0};
  m.theta[1] = {0.5, 0.1};
  m.theta[2] = {0.3, 1.0};
  return m;
}

// Two states, H=3, zero rewards. Step 1 stays at s0; at step 2, action 0
// moves to s1 with probability 0.01 and action 1 with probability 0.005, so
// s1 at step 3 is reachable but barely.
inline LinearMdpModel barely_reachable_model() {
  LinearMdpModel m = blank(3, 2, 2, 2);
  m.Cnrm = 2.0;
  m.init = {1.0, 0.0};
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t a = 0; a < 2; ++a) {
      m.phi[1][x][a] = {1.0, 0.0};
      m.phi[2][x][a] = (a == 0) ? Vec{0.99, 0.01} : Vec{0.995, 0.005};
      m.phi[3][x][a] = {1.0, 0.0};
    }
  m.mu[2][0] = {1.0, 0.0};
  m.mu[2][1] = {0.0, 1.0};
  m.mu[3][0] = {1.0, 0.0};
  m.mu[3][1] = {0.0, 1.0};
  return m;
}

// Deterministic policy playing one fixed action everywhere.
inline Policy constant_policy(const LinearMdpModel& m, std::size_t a) {
  std::vector<std::vector<std::size_t>> acts(m.H + 1);
  for (std::size_t h = 1; h <= m.H; ++h) acts[h].assign(m.num_states(), a);
  return Policy::tabular(std::move(acts));
}

}  // namespace slmdp::fixtures

#include "slmdp/envs.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "slmdp/log.hpp"
#include "slmdp/oracle.hpp"
#include "slmdp/rng.hpp"

namespace slmdp {

namespace {

Vec random_simplex_point(RngStream& rng, std::size_t k, double floor_mass) {
  Vec v(k);
  double total = 0.0;
  for (auto& x : v) {
    x = floor_mass + rng.next_double();
    total += x;
  }
  for (auto& x : v) x /= total;
  return v;
}

LinearMdpModel gen_sparse_attempt(const SparseEnvConfig& cfg, RngStream& rng) {
  const std::size_t S = cfg.latent_states;
  LinearMdpModel m;
  m.H = cfg.H;
  m.A = cfg.A;
  m.d = cfg.d;
  m.k = cfg.k;
  m.Cnrm = static_cast<double>(cfg.k);

  // support coordinates: k distinct indices
  {
    std::vector<std::size_t> all(cfg.d);
    for (std::size_t i = 0; i < cfg.d; ++i) all[i] = i;
    for (std::size_t i = 0; i < cfg.k; ++i) {
      std::size_t j = i + rng.next_below(cfg.d - i);
      std::swap(all[i], all[j]);
    }
    m.support.assign(all.begin(), all.begin() + cfg.k);
    std::sort(m.support.begin(), m.support.end());
  }

  m.state_ids.resize(S);
  for (std::size_t x = 0; x < S; ++x) m.state_ids[x] = "s" + std::to_string(x);

  m.init = random_simplex_point(rng, S, 0.2);

  // channel rows: channels[i][x'] is the i-th latent transition distribution
  m.phi.assign(m.H + 1, {});
  m.mu.assign(m.H + 1, {});
  m.theta.assign(m.H + 1, {});
  for (std::size_t h = 1; h <= m.H; ++h) {
    if (h < m.H) {
      std::vector<Vec> channels(cfg.k);
      for (std::size_t i = 0; i < cfg.k; ++i)
        channels[i] = random_simplex_point(rng, S, 0.1);
      m.mu[h + 1].assign(S, Vec(cfg.d, 0.0));
      for (std::size_t xp = 0; xp < S; ++xp)
        for (std::size_t i = 0; i < cfg.k; ++i)
          m.mu[h + 1][xp][m.support[i]] = channels[i][xp];
    }

    m.theta[h].assign(cfg.d, 0.0);
    for (std::size_t i = 0; i < cfg.k; ++i) m.theta[h][m.support[i]] = rng.next_double();

    m.phi[h].assign(S, std::vector<Vec>(cfg.A, Vec(cfg.d, 0.0)));
    for (std::size_t x = 0; x < S; ++x)
      for (std::size_t a = 0; a < cfg.A; ++a) {
        Vec& phi = m.phi[h][x][a];
        // convex channel weights: mostly one channel, partly a random blend
        double gamma = rng.next_in(0.2, 0.4);
        Vec blend = random_simplex_point(rng, cfg.k, 0.0);
        std::size_t z = (x + a) % cfg.k;
        for (std::size_t i = 0; i < cfg.k; ++i) {
          double w = gamma * blend[i] + (i == z ? 1.0 - gamma : 0.0);
          phi[m.support[i]] = w;
        }
        for (std::size_t l = 0; l < cfg.d; ++l) {
          bool on_support =
              std::binary_search(m.support.begin(), m.support.end(), l);
          if (!on_support) phi[l] = rng.next_in(-1.0, 1.0);
        }
      }
  }
  return m;
}

// lexicographic size-L subsets of [n]
std::vector<std::vector<std::size_t>> subsets_lex(std::size_t n, std::size_t L) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(L);
  for (std::size_t i = 0; i < L; ++i) cur[i] = i;
  if (L == 0 || L > n) return out;
  while (true) {
    out.push_back(cur);
    std::size_t i = L;
    while (i-- > 0) {
      if (cur[i] + 1 <= n - (L - i)) {
        ++cur[i];
        for (std::size_t j = i + 1; j < L; ++j) cur[j] = cur[j - 1] + 1;
        break;
      }
      if (i == 0) return out;
    }
  }
}

std::size_t log2_exact(std::size_t s) {
  std::size_t L = 0;
  while ((std::size_t{1} << L) < s) ++L;
  if ((std::size_t{1} << L) != s)
    throw GenerationFailure("latent state count must be a power of two");
  return L;
}

std::vector<int> obs_bits(std::size_t idx, std::size_t n) {
  std::vector<int> bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = static_cast<int>((idx >> i) & 1u);
  return bits;
}

constexpr std::size_t kDyadicDenom = 64;  // probability grid 1/64

}  // namespace

LinearMdpModel gen_sparse_env(const SparseEnvConfig& cfg) {
  if (cfg.k > cfg.d) throw GenerationFailure("support size exceeds dimension");
  for (std::size_t attempt = 0; attempt < 100; ++attempt) {
    RngStream rng = derive_stream(cfg.seed, {0x7367, attempt});
    LinearMdpModel m = gen_sparse_attempt(cfg, rng);
    if (cfg.reachability_floor <= 0.0 || cfg.H < 2) return m;

    bool ok = true;
    for (std::size_t h = 2; h <= m.H && ok; ++h)
      for (std::size_t x = 0; x < m.num_states() && ok; ++x) {
        double need = cfg.reachability_floor * l1_norm(m.mu[h][x]);
        if (max_visitation(m, h, x) < need) ok = false;
      }
    if (ok) return m;
    SLMDP_DEBUG("reachability rejection, attempt " << attempt);
  }
  throw GenerationFailure("reachability floor unattained in 100 attempts");
}

std::size_t dt_feature_dim(const DtBlockConfig& cfg) {
  std::size_t L = log2_exact(cfg.s);
  return subsets_lex(cfg.n, L).size() * cfg.s * cfg.A;
}

Vec phi_dt(const std::vector<int>& bits, std::size_t a, const DtBlockConfig& cfg) {
  std::size_t L = log2_exact(cfg.s);
  auto tuples = subsets_lex(cfg.n, L);
  const std::size_t signs = std::size_t{1} << L;
  Vec out(tuples.size() * signs * cfg.A, 0.0);
  for (std::size_t t = 0; t < tuples.size(); ++t)
    for (std::size_t sg = 0; sg < signs; ++sg) {
      bool sat = true;
      for (std::size_t j = 0; j < L; ++j)
        if (bits[tuples[t][j]] != static_cast<int>((sg >> j) & 1u)) {
          sat = false;
          break;
        }
      if (sat) out[(t * signs + sg) * cfg.A + a] = 1.0;
    }
  return out;
}

std::pair<BlockGroundTruth, LinearMdpModel> gen_dt_block_mdp(const DtBlockConfig& cfg) {
  if (cfg.s < 2) throw GenerationFailure("need at least two latent states");
  const std::size_t L = log2_exact(cfg.s);
  if (L > cfg.n) throw GenerationFailure("decoder depth exceeds bit count");
  RngStream rng = derive_stream(cfg.seed, {0x6474});

  BlockGroundTruth gt;
  // decoder variables: a random ascending L-subset of the n bits
  {
    std::vector<std::size_t> all(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) all[i] = i;
    for (std::size_t i = 0; i < L; ++i) {
      std::size_t j = i + rng.next_below(cfg.n - i);
      std::swap(all[i], all[j]);
    }
    gt.tree_vars.assign(all.begin(), all.begin() + L);
    std::sort(gt.tree_vars.begin(), gt.tree_vars.end());
  }

  const std::size_t X = std::size_t{1} << cfg.n;
  gt.decode.resize(X);
  for (std::size_t x = 0; x < X; ++x) {
    std::vector<int> bits = obs_bits(x, cfg.n);
    std::size_t z = 0;
    for (std::size_t j = 0; j < L; ++j)
      z |= static_cast<std::size_t>(bits[gt.tree_vars[j]]) << j;
    gt.decode[x] = z;
  }

  gt.latent_init.assign(cfg.s, 1.0 / static_cast<double>(cfg.s));
  gt.latent_trans.assign(cfg.H, {});
  gt.latent_reward.assign(cfg.H + 1, {});
  for (std::size_t h = 1; h <= cfg.H; ++h) {
    gt.latent_reward[h].assign(cfg.s, Vec(cfg.A, 0.0));
    for (std::size_t z = 0; z < cfg.s; ++z)
      for (std::size_t a = 0; a < cfg.A; ++a)
        gt.latent_reward[h][z][a] =
            static_cast<double>(rng.next_below(kDyadicDenom + 1)) / kDyadicDenom;
    if (h >= cfg.H) continue;
    if (gt.latent_trans.size() <= h) gt.latent_trans.resize(h + 1);
    gt.latent_trans[h].assign(cfg.s, std::vector<Vec>(cfg.A, Vec(cfg.s, 0.0)));
    for (std::size_t z = 0; z < cfg.s; ++z)
      for (std::size_t a = 0; a < cfg.A; ++a) {
        // dyadic multinomial: drop kDyadicDenom unit grains uniformly
        std::vector<std::size_t> grains(cfg.s, 0);
        for (std::size_t g = 0; g < kDyadicDenom; ++g) grains[rng.next_below(cfg.s)]++;
        for (std::size_t zp = 0; zp < cfg.s; ++zp)
          gt.latent_trans[h][z][a][zp] =
              static_cast<double>(grains[zp]) / kDyadicDenom;
      }
  }

  // embed as a linear model over the clause features
  auto tuples = subsets_lex(cfg.n, L);
  const std::size_t signs = cfg.s;
  std::size_t tree_tuple = 0;
  for (std::size_t t = 0; t < tuples.size(); ++t)
    if (tuples[t] == gt.tree_vars) {
      tree_tuple = t;
      break;
    }
  auto tree_coord = [&](std::size_t z, std::size_t a) {
    return (tree_tuple * signs + z) * cfg.A + a;
  };

  LinearMdpModel m;
  m.H = cfg.H;
  m.A = cfg.A;
  m.d = tuples.size() * signs * cfg.A;
  m.k = cfg.s * cfg.A;
  m.Cnrm = static_cast<double>(cfg.s * cfg.A) * static_cast<double>(cfg.s);
  m.state_ids.resize(X);
  for (std::size_t x = 0; x < X; ++x) {
    std::string id(cfg.n, '0');
    for (std::size_t i = 0; i < cfg.n; ++i)
      if ((x >> i) & 1u) id[i] = '1';
    m.state_ids[x] = id;
  }
  m.init.assign(X, 1.0 / static_cast<double>(X));
  for (std::size_t z = 0; z < cfg.s; ++z)
    for (std::size_t a = 0; a < cfg.A; ++a) m.support.push_back(tree_coord(z, a));
  std::sort(m.support.begin(), m.support.end());

  const double emit = 1.0 / static_cast<double>(X / cfg.s);  // uniform in-block emission
  m.phi.assign(cfg.H + 1, {});
  m.mu.assign(cfg.H + 1, {});
  m.theta.assign(cfg.H + 1, {});
  for (std::size_t h = 1; h <= cfg.H; ++h) {
    m.phi[h].assign(X, std::vector<Vec>(cfg.A, Vec{}));
    for (std::size_t x = 0; x < X; ++x) {
      std::vector<int> bits = obs_bits(x, cfg.n);
      for (std::size_t a = 0; a < cfg.A; ++a) m.phi[h][x][a] = phi_dt(bits, a, cfg);
    }
    m.theta[h].assign(m.d, 0.0);
    for (std::size_t z = 0; z < cfg.s; ++z)
      for (std::size_t a = 0; a < cfg.A; ++a)
        m.theta[h][tree_coord(z, a)] = gt.latent_reward[h][z][a];
    if (h < cfg.H) {
      m.mu[h + 1].assign(X, Vec(m.d, 0.0));
      for (std::size_t xp = 0; xp < X; ++xp) {
        std::size_t zp = gt.decode[xp];
        for (std::size_t z = 0; z < cfg.s; ++z)
          for (std::size_t a = 0; a < cfg.A; ++a)
            m.mu[h + 1][xp][tree_coord(z, a)] = emit * gt.latent_trans[h][z][a][zp];
      }
    }
  }
  return {std::move(gt), std::move(m)};
}

ValidationReport validate_model(const LinearMdpModel& m, double tol) {
  ValidationReport r;
  r.tol = tol;
  const std::size_t S = m.num_states();

  double init_sum = 0.0;
  for (double p : m.init) {
    init_sum += p;
    if (p < 0.0) r.init_drift = std::max(r.init_drift, -p);
  }
  r.init_drift = std::max(r.init_drift, std::fabs(init_sum - 1.0));

  std::vector<bool> on_support(m.d, m.support.empty());
  for (std::size_t i : m.support) on_support[i] = true;

  for (std::size_t h = 1; h <= m.H; ++h) {
    for (std::size_t x = 0; x < S; ++x)
      for (std::size_t a = 0; a < m.A; ++a) {
        r.phi_linf_excess =
            std::max(r.phi_linf_excess, linf_norm(m.phi[h][x][a]) - 1.0);
        double rew = m.reward(h, x, a);
        r.reward_drift = std::max({r.reward_drift, -rew, rew - 1.0});
        if (h < m.H) {
          double row = 0.0;
          for (std::size_t xp = 0; xp < S; ++xp) {
            double p = m.trans_prob(h, x, a, xp);
            row += p;
            if (-p > r.trans_negativity) {
              r.trans_negativity = -p;
              r.neg_h = h;
              r.neg_x = x;
              r.neg_a = a;
              r.neg_xp = xp;
            }
          }
          r.row_sum_drift = std::max(r.row_sum_drift, std::fabs(row - 1.0));
        }
      }

    r.theta_budget_excess = std::max(r.theta_budget_excess, l1_norm(m.theta[h]) - m.Cnrm);
    for (std::size_t l = 0; l < m.d; ++l)
      if (!on_support[l])
        r.support_leak = std::max(r.support_leak, std::fabs(m.theta[h][l]));

    if (h >= 2) {
      double total = 0.0;
      for (std::size_t x = 0; x < S; ++x) {
        total += l1_norm(m.mu[h][x]);
        for (std::size_t l = 0; l < m.d; ++l)
          if (!on_support[l])
            r.support_leak = std::max(r.support_leak, std::fabs(m.mu[h][x][l]));
      }
      r.mu_budget_excess = std::max(r.mu_budget_excess, total - m.Cnrm);
    }
  }

  r.passed = r.phi_linf_excess <= tol && r.trans_negativity <= tol &&
             r.row_sum_drift <= tol && r.reward_drift <= tol &&
             r.mu_budget_excess <= tol && r.theta_budget_excess <= tol &&
             r.init_drift <= tol && r.support_leak <= tol;
  return r;
}

}  // namespace slmdp

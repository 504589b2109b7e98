#include "slmdp/serialize.hpp"

#include <cmath>

using nlohmann::json;

namespace slmdp {

json model_to_json(const LinearMdpModel& m) {
  json j;
  j["H"] = m.H;
  j["A"] = m.A;
  j["d"] = m.d;
  j["Cnrm"] = m.Cnrm;
  if (m.k > 0) j["k"] = m.k;
  if (!m.support.empty()) j["support"] = m.support;
  j["states"] = m.state_ids;
  j["init"] = m.init;

  json phi = json::array();
  for (std::size_t h = 1; h <= m.H; ++h) phi.push_back(m.phi[h]);
  j["phi"] = std::move(phi);

  json mu = json::array();
  for (std::size_t h = 2; h <= m.H; ++h) mu.push_back(m.mu[h]);
  j["mu"] = std::move(mu);

  json theta = json::array();
  for (std::size_t h = 1; h <= m.H; ++h) theta.push_back(m.theta[h]);
  j["theta"] = std::move(theta);
  return j;
}

LinearMdpModel model_from_json(const json& j) {
  LinearMdpModel m;
  m.H = j.at("H").get<std::size_t>();
  m.A = j.at("A").get<std::size_t>();
  m.d = j.at("d").get<std::size_t>();
  m.Cnrm = j.at("Cnrm").get<double>();
  if (j.contains("k")) m.k = j.at("k").get<std::size_t>();
  if (j.contains("support")) m.support = j.at("support").get<std::vector<std::size_t>>();
  m.state_ids = j.at("states").get<std::vector<std::string>>();
  m.init = j.at("init").get<Vec>();

  m.phi.resize(m.H + 1);
  const json& phi = j.at("phi");
  for (std::size_t h = 1; h <= m.H; ++h)
    m.phi[h] = phi.at(h - 1).get<std::vector<std::vector<Vec>>>();

  m.mu.resize(m.H + 1);
  const json& mu = j.at("mu");
  for (std::size_t h = 2; h <= m.H; ++h)
    m.mu[h] = mu.at(h - 2).get<std::vector<Vec>>();

  m.theta.resize(m.H + 1);
  const json& theta = j.at("theta");
  for (std::size_t h = 1; h <= m.H; ++h) m.theta[h] = theta.at(h - 1).get<Vec>();
  return m;
}

json policy_to_json(const Policy& p) {
  const PolicyNode& n = p.node();
  json j;
  switch (n.kind) {
    case PolicyNode::Kind::Uniform:
      j["kind"] = "uniform";
      break;
    case PolicyNode::Kind::Linear: {
      j["kind"] = "linear";
      json w = json::array();
      for (std::size_t h = 1; h < n.weights.size(); ++h) w.push_back(n.weights[h]);
      j["weights"] = std::move(w);
      break;
    }
    case PolicyNode::Kind::Tabular: {
      j["kind"] = "tabular";
      json a = json::array();
      for (std::size_t h = 1; h < n.actions.size(); ++h) a.push_back(n.actions[h]);
      j["actions"] = std::move(a);
      break;
    }
    case PolicyNode::Kind::Compose:
      j["kind"] = "compose";
      j["base"] = policy_to_json(n.children[0]);
      j["h"] = n.switch_step;
      j["tail"] = policy_to_json(n.children[1]);
      break;
    case PolicyNode::Kind::Mixture: {
      j["kind"] = "mixture";
      json members = json::array();
      for (const Policy& c : n.children) members.push_back(policy_to_json(c));
      j["members"] = std::move(members);
      break;
    }
  }
  return j;
}

Policy policy_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform") return Policy::uniform();
  if (kind == "linear") {
    std::vector<Vec> w{Vec{}};  // restore index-0 padding
    for (const json& row : j.at("weights")) w.push_back(row.get<Vec>());
    return Policy::linear(std::move(w));
  }
  if (kind == "tabular") {
    std::vector<std::vector<std::size_t>> a{{}};
    for (const json& row : j.at("actions"))
      a.push_back(row.get<std::vector<std::size_t>>());
    return Policy::tabular(std::move(a));
  }
  if (kind == "compose")
    return Policy::compose(policy_from_json(j.at("base")), j.at("h").get<std::size_t>(),
                           policy_from_json(j.at("tail")));
  if (kind == "mixture") {
    std::vector<Policy> members;
    for (const json& c : j.at("members")) members.push_back(policy_from_json(c));
    return Policy::mixture(std::move(members));
  }
  throw InvalidModel("unknown policy kind: " + kind);
}

json emulator_to_json(const Emulator& em, const LinearMdpModel& model) {
  json j;
  j["h"] = em.h;
  j["C"] = em.budget;
  j["mus"] = em.mus;
  json wit = json::array();
  for (std::size_t x : em.witnesses) wit.push_back(model.state_ids.at(x));
  j["witnesses"] = std::move(wit);
  j["meta"] = {{"eps_cvx", em.eps_cvx},
               {"n", em.n},
               {"m", em.m},
               {"eps_relax", em.residuals.eps_relax_used},
               {"solver_iterations", em.residuals.iterations}};
  return j;
}

Emulator emulator_from_json(const json& j, const LinearMdpModel& model) {
  Emulator em;
  em.h = j.at("h").get<std::size_t>();
  em.budget = j.at("C").get<double>();
  for (const json& row : j.at("mus")) em.mus.push_back(row.get<Vec>());
  for (const json& id : j.at("witnesses")) {
    const std::string name = id.get<std::string>();
    std::size_t x = 0;
    while (x < model.state_ids.size() && model.state_ids[x] != name) ++x;
    if (x == model.state_ids.size())
      throw InvalidModel("emulator witness names unknown state: " + name);
    em.witnesses.push_back(x);
  }
  if (j.contains("meta")) {
    const json& meta = j.at("meta");
    em.eps_cvx = meta.value("eps_cvx", 0.0);
    em.n = meta.value("n", std::size_t{0});
    em.m = meta.value("m", std::size_t{0});
    em.residuals.eps_relax_used = meta.value("eps_relax", 0.0);
    em.residuals.iterations = meta.value("solver_iterations", std::size_t{0});
  }
  return em;
}

json json_real(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json budget_overrides_to_json(const BudgetOverrides& ov) {
  json j;
  j["scale_T"] = ov.scale_T;
  j["scale_n"] = ov.scale_n;
  j["scale_m"] = ov.scale_m;
  j["scale_N"] = ov.scale_N;
  j["scale_N_rew"] = ov.scale_N_rew;
  if (ov.cap_T > 0) j["cap_T"] = ov.cap_T;
  if (ov.cap_n > 0) j["cap_n"] = ov.cap_n;
  if (ov.cap_m > 0) j["cap_m"] = ov.cap_m;
  if (ov.cap_N > 0) j["cap_N"] = ov.cap_N;
  if (ov.cap_N_rew > 0) j["cap_N_rew"] = ov.cap_N_rew;
  if (ov.set_trunc > 0) j["set_trunc"] = ov.set_trunc;
  if (ov.set_tsmall > 0) j["set_tsmall"] = ov.set_tsmall;
  if (ov.set_alpha > 0) j["set_alpha"] = ov.set_alpha;
  if (ov.set_xi > 0) j["set_xi"] = ov.set_xi;
  if (ov.set_eps_apx > 0) j["set_eps_apx"] = ov.set_eps_apx;
  if (ov.set_eps_neg > 0) j["set_eps_neg"] = ov.set_eps_neg;
  if (ov.set_eps_cvx > 0) j["set_eps_cvx"] = ov.set_eps_cvx;
  if (ov.max_episodes > 0) j["max_episodes"] = ov.max_episodes;
  if (ov.solver_budget > 0) j["solver_budget"] = ov.solver_budget;
  if (ov.regression_iters > 0) j["regression_iters"] = ov.regression_iters;
  return j;
}

json schedule_params_to_json(const ScheduleParams& p) {
  json j;
  j["A"] = p.A;
  j["H"] = p.H;
  j["d"] = p.d;
  j["Cnrm"] = p.Cnrm;
  j["delta"] = p.delta;
  if (p.eps > 0) j["eps"] = p.eps;
  if (p.eta > 0) j["eta"] = p.eta;
  j["trunc"] = p.trunc;
  j["tsmall"] = p.tsmall;
  j["alpha"] = p.alpha;
  j["xi"] = p.xi;
  j["eps_apx"] = p.eps_apx;
  j["eps_neg"] = p.eps_neg;
  j["eps_cvx"] = p.eps_cvx;
  j["T"] = p.T;
  j["n"] = p.n;
  j["m"] = p.m;
  j["N"] = p.N;
  j["literal"] = {{"trunc", json_real(p.literal.trunc)},
                  {"tsmall", json_real(p.literal.tsmall)},
                  {"alpha", json_real(p.literal.alpha)},
                  {"xi", json_real(p.literal.xi)},
                  {"eps_apx", json_real(p.literal.eps_apx)},
                  {"eps_neg", json_real(p.literal.eps_neg)},
                  {"eps_cvx", json_real(p.literal.eps_cvx)},
                  {"T", json_real(p.literal.T)},
                  {"n", json_real(p.literal.n)},
                  {"m", json_real(p.literal.m)},
                  {"N", json_real(p.literal.N)}};
  j["overrides"] = budget_overrides_to_json(p.overrides);
  return j;
}

json run_manifest_json(const std::string& env_ref, const ScheduleParams& params,
                       const std::vector<std::uint64_t>& seeds,
                       const std::vector<std::uint64_t>& phase_episodes,
                       const std::vector<std::string>& outputs) {
  json j;
  j["env"] = env_ref;
  j["params"] = schedule_params_to_json(params);
  j["overrides"] = budget_overrides_to_json(params.overrides);
  j["seeds"] = seeds;
  j["phase_episodes"] = phase_episodes;
  j["outputs"] = outputs;
  return j;
}

}  // namespace slmdp

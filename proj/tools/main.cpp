#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "slmdp/envs.hpp"
#include "slmdp/errors.hpp"
#include "slmdp/explore.hpp"
#include "slmdp/log.hpp"
#include "slmdp/mdp.hpp"
#include "slmdp/oracle.hpp"
#include "slmdp/psdp.hpp"
#include "slmdp/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace slmdp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr double kCiLevel = 0.99;

struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string f, const std::string& msg)
      : std::runtime_error("config error at " + f + ": " + msg),
        field(std::move(f)) {}
};

json load_json_file(const std::string& path, const std::string& field) {
  if (!fs::exists(path)) throw ConfigError(field, "file not found: " + path);
  std::ifstream in(path);
  if (!in) throw ConfigError(field, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(field, std::string("not valid JSON: ") + e.what());
  }
  return j;
}

LinearMdpModel load_model_file(const std::string& path, const std::string& field) {
  try {
    return model_from_json(load_json_file(path, field));
  } catch (const json::exception& e) {
    throw ConfigError(field, std::string("not a model file: ") + e.what());
  } catch (const InvalidModel& e) {
    throw ConfigError(field, e.what());
  }
}

Policy load_policy_file(const std::string& path, const std::string& field) {
  try {
    return policy_from_json(load_json_file(path, field));
  } catch (const json::exception& e) {
    throw ConfigError(field, std::string("not a policy file: ") + e.what());
  } catch (const InvalidModel& e) {
    throw ConfigError(field, e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

double* override_real_slot(BudgetOverrides& ov, const std::string& key) {
  if (key == "scale_T") return &ov.scale_T;
  if (key == "scale_n") return &ov.scale_n;
  if (key == "scale_m") return &ov.scale_m;
  if (key == "scale_N") return &ov.scale_N;
  if (key == "scale_N_rew") return &ov.scale_N_rew;
  if (key == "set_trunc") return &ov.set_trunc;
  if (key == "set_tsmall") return &ov.set_tsmall;
  if (key == "set_alpha") return &ov.set_alpha;
  if (key == "set_xi") return &ov.set_xi;
  if (key == "set_eps_apx") return &ov.set_eps_apx;
  if (key == "set_eps_neg") return &ov.set_eps_neg;
  if (key == "set_eps_cvx") return &ov.set_eps_cvx;
  return nullptr;
}

std::uint64_t* override_count_slot(BudgetOverrides& ov, const std::string& key) {
  if (key == "cap_T") return &ov.cap_T;
  if (key == "cap_n") return &ov.cap_n;
  if (key == "cap_m") return &ov.cap_m;
  if (key == "cap_N") return &ov.cap_N;
  if (key == "cap_N_rew") return &ov.cap_N_rew;
  if (key == "max_episodes") return &ov.max_episodes;
  if (key == "solver_budget") return &ov.solver_budget;
  if (key == "regression_iters") return &ov.regression_iters;
  return nullptr;
}

void apply_override_json(BudgetOverrides& ov, const json& j,
                         const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string field = path + "." + key;
    if (!value.is_number())
      throw ConfigError(field, "expected a number");
    if (double* slot = override_real_slot(ov, key)) {
      *slot = value.get<double>();
    } else if (std::uint64_t* cslot = override_count_slot(ov, key)) {
      if (value.is_number_float() &&
          value.get<double>() != std::floor(value.get<double>()))
        throw ConfigError(field, "expected an integer");
      *cslot = value.get<std::uint64_t>();
    } else {
      throw ConfigError(field, "unknown override");
    }
  }
}

void apply_override_entries(BudgetOverrides& ov,
                            const std::vector<std::string>& entries) {
  for (const std::string& entry : entries) {
    auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override", "expected key=value, got " + entry);
    const std::string key = entry.substr(0, eq);
    const std::string value = entry.substr(eq + 1);
    try {
      if (double* slot = override_real_slot(ov, key))
        *slot = std::stod(value);
      else if (std::uint64_t* cslot = override_count_slot(ov, key))
        *cslot = std::stoull(value);
      else
        throw ConfigError("override." + key, "unknown override");
    } catch (const std::invalid_argument&) {
      throw ConfigError("override." + key, "not a number: " + value);
    } catch (const std::out_of_range&) {
      throw ConfigError("override." + key, "out of range: " + value);
    }
  }
}

// Inline environment config or a path to a serialized model. Inline configs
// are re-seeded per run seed so every seed sees a fresh instance; a model
// file is shared by all seeds.
struct EnvSpec {
  bool from_file = false;
  std::string ref;
  LinearMdpModel file_model;
  json inline_cfg;
};

LinearMdpModel gen_from_inline(const json& cfg, std::uint64_t seed_shift) {
  const std::string type = cfg.value("type", "sparse");
  if (type == "sparse") {
    SparseEnvConfig c;
    c.d = cfg.value("d", c.d);
    c.k = cfg.value("k", c.k);
    c.A = cfg.value("A", c.A);
    c.H = cfg.value("H", c.H);
    c.seed = cfg.value("seed", c.seed) + seed_shift;
    c.reachability_floor = cfg.value("reachability_floor", c.reachability_floor);
    c.latent_states = cfg.value("latent_states", c.latent_states);
    return gen_sparse_env(c);
  }
  if (type == "dt_block") {
    DtBlockConfig c;
    c.n = cfg.value("n", c.n);
    c.s = cfg.value("s", c.s);
    c.A = cfg.value("A", c.A);
    c.H = cfg.value("H", c.H);
    c.seed = cfg.value("seed", c.seed) + seed_shift;
    return gen_dt_block_mdp(c).second;
  }
  throw ConfigError("env.type", "unknown environment type: " + type);
}

EnvSpec load_env_spec(const json& env, const fs::path& config_dir) {
  EnvSpec spec;
  if (env.is_string()) {
    std::string path = env.get<std::string>();
    if (!fs::exists(path) && fs::exists(config_dir / path))
      path = (config_dir / path).string();
    spec.from_file = true;
    spec.ref = path;
    spec.file_model = load_model_file(path, "env");
    return spec;
  }
  if (env.is_object()) {
    spec.inline_cfg = env;
    spec.ref = "inline:" + env.value("type", "sparse");
    gen_from_inline(env, 0);  // validate the config shape eagerly
    return spec;
  }
  throw ConfigError("env", "expected a file path or an inline object");
}

LinearMdpModel instantiate_env(const EnvSpec& spec, std::uint64_t seed) {
  if (spec.from_file) return spec.file_model;
  return gen_from_inline(spec.inline_cfg, seed);
}

struct RunConfig {
  EnvSpec env;
  std::string algorithm;
  double eps = 0.0;
  double delta = 0.0;
  double eta = 0.0;
  BudgetOverrides overrides;
  std::vector<std::uint64_t> seeds;
  std::string out;
  std::uint64_t eval_episodes = 2000;
};

RunConfig load_run_config(const std::string& path) {
  json j = load_json_file(path, "config");
  if (!j.is_object()) throw ConfigError("config", "expected an object");
  RunConfig cfg;
  if (!j.contains("env")) throw ConfigError("env", "missing");
  cfg.env = load_env_spec(j.at("env"), fs::path(path).parent_path());
  if (!j.contains("algorithm")) throw ConfigError("algorithm", "missing");
  cfg.algorithm = j.at("algorithm").get<std::string>();
  const std::vector<std::string> known{"opt", "slm", "slmt", "psdp_rew",
                                       "bandit_h1"};
  if (std::find(known.begin(), known.end(), cfg.algorithm) == known.end())
    throw ConfigError("algorithm", "unknown algorithm: " + cfg.algorithm);
  cfg.eps = j.value("eps", 0.0);
  if (!(cfg.eps > 0.0)) throw ConfigError("eps", "must be positive");
  cfg.delta = j.value("delta", 0.0);
  if (!(cfg.delta > 0.0) || cfg.delta >= 1.0)
    throw ConfigError("delta", "must be in (0, 1)");
  cfg.eta = j.value("eta", 0.0);
  if (cfg.algorithm == "slm" && !(cfg.eta > 0.0))
    throw ConfigError("eta", "slm needs a positive reachability level");
  if (j.contains("overrides"))
    apply_override_json(cfg.overrides, j.at("overrides"), "overrides");
  if (j.contains("seeds"))
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
  cfg.eval_episodes = j.value("eval_episodes", cfg.eval_episodes);
  return cfg;
}

json steps_to_json(const std::vector<StepLog>& steps) {
  json arr = json::array();
  for (const StepLog& s : steps)
    arr.push_back({{"h", s.h},
                   {"esc_ok", s.esc_ok},
                   {"esc_episodes", s.esc_episodes},
                   {"pc_episodes", s.pc_episodes},
                   {"cover_size", s.cover_size}});
  return arr;
}

json cover_sizes_json(const std::vector<std::vector<Policy>>& covers) {
  json arr = json::array();
  for (std::size_t h = 1; h < covers.size(); ++h) arr.push_back(covers[h].size());
  return arr;
}

json slmt_breakdown(const SlmtResult& res) {
  json phases = json::array();
  for (const PhaseState& phase : res.phases)
    phases.push_back({{"t", phase.t},
                      {"episodes", phase.episodes},
                      {"gamma_in", phase.gamma.size()},
                      {"cover_sizes", cover_sizes_json(phase.covers)},
                      {"steps", steps_to_json(phase.steps)}});
  return {{"phases", std::move(phases)},
          {"bottom", res.bottom},
          {"alpha", res.alpha},
          {"T", res.T},
          {"gamma_final", res.gamma_final.size()}};
}

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::uint64_t episodes = 0;
  std::string status = "ok";
  std::string error;
  bool has_policy = false;
  Policy policy;
  json breakdown;
  bool has_params = false;
  ScheduleParams params;
  std::vector<std::uint64_t> phase_episodes;
  double subopt = 0.0;
  double value_exact = 0.0;
  double value_mc = 0.0;
  double value_ci = 0.0;
  bool has_values = false;
  bool has_mc = false;
  double wall_ms = 0.0;
};

std::vector<std::vector<Policy>> uniform_covers(std::size_t H) {
  std::vector<std::vector<Policy>> covers(H + 1);
  const Policy uniform = Policy::uniform();
  for (std::size_t h = 1; h <= H; ++h) covers[h] = {uniform};
  return covers;
}

void record_phase_episodes(SeedOutcome& out, const SlmtResult& res) {
  for (const PhaseState& phase : res.phases)
    out.phase_episodes.push_back(phase.episodes);
}

void execute_algorithm(const RunConfig& cfg, const LinearMdpModel& model,
                       EnvHandle& env, SeedOutcome& out) {
  if (cfg.algorithm == "opt") {
    OptResult res = opt(cfg.eps, cfg.delta, env, cfg.overrides);
    out.params = res.exploration.params;
    out.has_params = true;
    record_phase_episodes(out, res.exploration);
    out.breakdown = {{"exploration", slmt_breakdown(res.exploration)},
                     {"psdp_episodes", res.psdp_episodes},
                     {"N_rew", res.N_rew}};
    out.policy = res.policy;
    out.has_policy = true;
    if (res.failed) out.status = "failed";
    return;
  }
  if (cfg.algorithm == "slmt") {
    SlmtResult res = slmt(cfg.eps, cfg.delta, env, cfg.overrides);
    out.params = res.params;
    out.has_params = true;
    record_phase_episodes(out, res);
    out.breakdown = slmt_breakdown(res);
    std::size_t usable = res.phases.size() - (res.bottom ? 1 : 0);
    if (res.bottom) out.status = "bottom";
    if (usable > 0) {
      const std::vector<Policy>& last = res.phases[usable - 1].covers[model.H];
      if (!last.empty()) {
        out.policy = Policy::mixture(last);
        out.has_policy = true;
      }
    }
    return;
  }
  if (cfg.algorithm == "slm") {
    ScheduleParams params = params_reachable(model.A, model.H, model.Cnrm,
                                             cfg.delta, cfg.eta, model.d,
                                             cfg.overrides);
    SlmResult res = slm(cfg.delta, env, params);
    out.params = res.params;
    out.has_params = true;
    out.phase_episodes = {res.episodes};
    out.breakdown = {{"steps", steps_to_json(res.steps)},
                     {"cover_sizes", cover_sizes_json(res.covers)}};
    if (!res.covers[model.H].empty()) {
      out.policy = Policy::mixture(res.covers[model.H]);
      out.has_policy = true;
    }
    return;
  }
  // psdp_rew and bandit_h1: reward-directed search over uniform roll-in
  // covers, no exploration phase.
  double raw = npsdprew_schedule(cfg.eps / 2.0, 1.0, cfg.delta, model.A, model.H,
                                 model.Cnrm, model.d);
  std::uint64_t N = resolve_budget("N_rew", raw, cfg.overrides.scale_N_rew,
                                   cfg.overrides.cap_N_rew);
  out.breakdown = {{"N_rew", N}};
  out.policy = psdp_rew(uniform_covers(model.H), N, env);
  out.has_policy = true;
  out.phase_episodes = {env.episodes};
}

SeedOutcome run_seed(const RunConfig& cfg, std::uint64_t seed) {
  SeedOutcome out;
  out.seed = seed;
  auto start = std::chrono::steady_clock::now();
  LinearMdpModel model = instantiate_env(cfg.env, seed);
  EnvHandle env(model, seed);
  try {
    execute_algorithm(cfg, model, env, out);
  } catch (const CoverFailure& e) {
    out.status = "error:CoverFailure";
    out.error = e.what();
  } catch (const ResourceExhausted& e) {
    out.status = "error:ResourceExhausted";
    out.error = e.what();
  } catch (const Overflow& e) {
    out.status = "error:Overflow";
    out.error = e.what();
  } catch (const std::exception& e) {
    out.status = "error:Component";
    out.error = e.what();
  }
  out.episodes = env.episodes;
  if (out.has_policy) {
    OptimalResult best = optimal_value(model);
    out.value_exact = policy_value(model, out.policy);
    out.subopt = best.value - out.value_exact;
    out.has_values = true;
    if (cfg.eval_episodes > 0) {
      EnvHandle eval_env(model, seed ^ 0x9e3779b97f4a7c15ULL);
      double total = 0.0;
      for (std::uint64_t i = 0; i < cfg.eval_episodes; ++i) {
        const Trajectory traj = sample_episode(eval_env, out.policy);
        for (std::size_t h = 1; h <= model.H; ++h) total += traj.rewards[h];
      }
      out.value_mc = total / static_cast<double>(cfg.eval_episodes);
      double range = 2.0 * static_cast<double>(model.H) * model.Cnrm;
      out.value_ci = range * std::sqrt(std::log(2.0 / (1.0 - kCiLevel)) /
                                       (2.0 * static_cast<double>(cfg.eval_episodes)));
      out.has_mc = true;
    }
  }
  auto end = std::chrono::steady_clock::now();
  out.wall_ms = std::chrono::duration<double, std::milli>(end - start).count();
  return out;
}

json metrics_record(const RunConfig& cfg, const SeedOutcome& out) {
  json j;
  j["seed"] = out.seed;
  j["algorithm"] = cfg.algorithm;
  j["episodes"] = out.episodes;
  j["status"] = out.status;
  j["error"] = out.error.empty() ? json(nullptr) : json(out.error);
  j["subopt_oracle"] = out.has_values ? json(out.subopt) : json(nullptr);
  j["value_exact"] = out.has_values ? json(out.value_exact) : json(nullptr);
  j["value_mc"] = out.has_mc ? json(out.value_mc) : json(nullptr);
  j["value_ci"] = out.has_mc ? json(out.value_ci) : json(nullptr);
  j["eval_episodes"] = out.has_mc ? cfg.eval_episodes : 0;
  j["breakdown"] = out.breakdown.is_null() ? json::object() : out.breakdown;
  j["wall_ms"] = out.wall_ms;
  return j;
}

std::string csv_cell(bool present, double v) {
  return present ? json(v).dump() : std::string();
}

int cmd_run(const std::string& config_path, const std::vector<std::uint64_t>& seed_flag,
            const std::vector<std::string>& override_flag, const std::string& out_flag) {
  RunConfig cfg = load_run_config(config_path);
  if (!seed_flag.empty()) cfg.seeds = seed_flag;
  if (cfg.seeds.empty()) throw ConfigError("seeds", "must be non-empty");
  apply_override_entries(cfg.overrides, override_flag);
  if (!out_flag.empty()) cfg.out = out_flag;
  if (cfg.out.empty()) throw ConfigError("out", "missing output directory");
  if (cfg.algorithm == "bandit_h1") {
    LinearMdpModel probe = instantiate_env(cfg.env, cfg.seeds.front());
    if (probe.H != 1)
      throw ConfigError("algorithm", "bandit_h1 needs a one-step environment");
  }
  fs::create_directories(cfg.out);

  std::vector<SeedOutcome> outcomes(cfg.seeds.size());
  std::size_t workers = std::min<std::size_t>(
      cfg.seeds.size(), std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
      outcomes[i] = run_seed(cfg, cfg.seeds[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < cfg.seeds.size();
             i = next.fetch_add(1))
          outcomes[i] = run_seed(cfg, cfg.seeds[i]);
      });
    for (std::thread& t : pool) t.join();
  }

  std::ostringstream jsonl;
  std::ostringstream csv;
  csv << "seed,episodes,subopt_oracle,value_mc,value_ci,status\n";
  for (const SeedOutcome& out : outcomes) {
    jsonl << metrics_record(cfg, out).dump() << "\n";
    csv << out.seed << "," << out.episodes << ","
        << csv_cell(out.has_values, out.subopt) << ","
        << csv_cell(out.has_mc, out.value_mc) << ","
        << csv_cell(out.has_mc, out.value_ci) << "," << out.status << "\n";
    if (out.has_policy)
      write_text_file(
          (fs::path(cfg.out) / ("policy_" + std::to_string(out.seed) + ".json"))
              .string(),
          policy_to_json(out.policy).dump(2) + "\n");
  }
  write_text_file((fs::path(cfg.out) / "metrics.jsonl").string(), jsonl.str());
  write_text_file((fs::path(cfg.out) / "summary.csv").string(), csv.str());

  const SeedOutcome* with_params = nullptr;
  for (const SeedOutcome& out : outcomes)
    if (out.has_params) {
      with_params = &out;
      break;
    }
  json manifest;
  if (with_params != nullptr) {
    manifest = run_manifest_json(cfg.env.ref, with_params->params, cfg.seeds,
                                 with_params->phase_episodes,
                                 {"metrics.jsonl", "summary.csv"});
  } else {
    manifest = {{"env", cfg.env.ref},
                {"seeds", cfg.seeds},
                {"outputs", {"metrics.jsonl", "summary.csv"}},
                {"overrides", budget_overrides_to_json(cfg.overrides)}};
  }
  manifest["algorithm"] = cfg.algorithm;
  manifest["eps"] = cfg.eps;
  manifest["delta"] = cfg.delta;
  if (cfg.eta > 0.0) manifest["eta"] = cfg.eta;
  write_text_file((fs::path(cfg.out) / "manifest.json").string(),
                  manifest.dump(2) + "\n");

  std::size_t failures = 0;
  for (const SeedOutcome& out : outcomes)
    if (out.status != "ok") ++failures;
  std::cout << "wrote " << cfg.out << ": " << outcomes.size() << " seeds, "
            << failures << " not ok\n";
  return kExitOk;
}

int cmd_gen_sparse(const SparseEnvConfig& cfg, const std::string& out_path) {
  LinearMdpModel model = gen_sparse_env(cfg);
  write_text_file(out_path, model_to_json(model).dump(2) + "\n");
  std::cout << "wrote " << out_path << ": sparse model d=" << model.d
            << " k=" << model.k << " A=" << model.A << " H=" << model.H
            << " states=" << model.num_states() << " Cnrm=" << model.Cnrm << "\n";
  return kExitOk;
}

int cmd_gen_dt(const DtBlockConfig& cfg, const std::string& out_path) {
  LinearMdpModel model = gen_dt_block_mdp(cfg).second;
  write_text_file(out_path, model_to_json(model).dump(2) + "\n");
  std::cout << "wrote " << out_path << ": dt-block model d=" << model.d
            << " k=" << model.k << " A=" << model.A << " H=" << model.H
            << " states=" << model.num_states() << " Cnrm=" << model.Cnrm << "\n";
  return kExitOk;
}

json literals_json(const ScheduleLiterals& lit) {
  json j;
  j["trunc"] = json_real(lit.trunc);
  j["tsmall"] = json_real(lit.tsmall);
  j["alpha"] = json_real(lit.alpha);
  j["xi"] = json_real(lit.xi);
  j["eps_apx"] = json_real(lit.eps_apx);
  j["eps_neg"] = json_real(lit.eps_neg);
  j["eps_cvx"] = json_real(lit.eps_cvx);
  j["T"] = json_real(lit.T);
  j["n"] = json_real(lit.n);
  j["m"] = json_real(lit.m);
  j["N"] = json_real(lit.N);
  return j;
}

int cmd_params(std::size_t A, std::size_t H, double C, double eps, double delta,
               std::size_t d, const std::string& schedule, double eta,
               const std::vector<std::string>& override_flag) {
  json report;
  report["schedule"] = schedule;
  report["inputs"] = {{"A", A}, {"H", H}, {"Cnrm", C}, {"delta", delta}, {"d", d}};
  BudgetOverrides ov;
  apply_override_entries(ov, override_flag);
  if (schedule == "truncated") {
    report["inputs"]["eps"] = eps;
    report["literal"] = literals_json(paramst_literals(A, H, C, delta, eps, d));
    if (!override_flag.empty())
      report["resolved"] =
          schedule_params_to_json(params_t(A, H, C, delta, eps, d, ov));
  } else {
    if (!(eta > 0.0))
      throw ConfigError("eta", "reachable schedule needs a positive eta");
    report["inputs"]["eta"] = eta;
    report["literal"] = literals_json(reachable_literals(A, H, C, delta, eta, d));
    if (!override_flag.empty())
      report["resolved"] =
          schedule_params_to_json(params_reachable(A, H, C, delta, eta, d, ov));
  }
  std::cout << report.dump(2) << "\n";
  return kExitOk;
}

int emit_report(const json& report, const std::string& out_path, bool pass) {
  std::cout << report.dump(2) << "\n";
  if (!out_path.empty()) write_text_file(out_path, report.dump(2) + "\n");
  return pass ? kExitOk : kExitVerifyFail;
}

int cmd_verify_model(const std::string& model_path, double tol,
                     const std::string& out_path) {
  LinearMdpModel model = load_model_file(model_path, "model");
  ValidationReport rep = validate_model(model, tol);
  json report{{"check", "model"},
              {"pass", rep.passed},
              {"tol", rep.tol},
              {"phi_linf_excess", rep.phi_linf_excess},
              {"trans_negativity", rep.trans_negativity},
              {"row_sum_drift", rep.row_sum_drift},
              {"reward_drift", rep.reward_drift},
              {"mu_budget_excess", rep.mu_budget_excess},
              {"theta_budget_excess", rep.theta_budget_excess},
              {"init_drift", rep.init_drift},
              {"support_leak", rep.support_leak}};
  if (rep.trans_negativity > 0.0)
    report["negativity_witness"] = {{"h", rep.neg_h},
                                    {"x", rep.neg_x},
                                    {"a", rep.neg_a},
                                    {"xp", rep.neg_xp}};
  return emit_report(report, out_path, rep.passed);
}

int cmd_verify_cover(const std::string& model_path, const std::string& artifact_path,
                     double alpha_flag, const std::string& out_path) {
  LinearMdpModel model = load_model_file(model_path, "model");
  json artifact = load_json_file(artifact_path, "artifact");
  if (!artifact.contains("h") || !artifact.contains("policies"))
    throw ConfigError("artifact", "cover artifact needs h and policies");
  std::size_t h = 0;
  double alpha = 0.0;
  std::vector<Policy> cover;
  try {
    h = artifact.at("h").get<std::size_t>();
    alpha = alpha_flag > 0.0 ? alpha_flag : artifact.value("alpha", 0.0);
    for (const json& p : artifact.at("policies"))
      cover.push_back(policy_from_json(p));
  } catch (const json::exception& e) {
    throw ConfigError("artifact", std::string("not a cover artifact: ") + e.what());
  }
  if (!(alpha > 0.0))
    throw ConfigError("artifact.alpha", "missing coverage level; pass --alpha");
  CoverReport rep = check_policy_cover(model, cover, h, alpha);
  json report{{"check", "cover"},
              {"pass", rep.pass},
              {"h", h},
              {"alpha", alpha},
              {"min_ratio", rep.min_ratio},
              {"witness_state", model.state_ids.at(rep.witness_state)},
              {"mix_at_witness", rep.mix_at_witness},
              {"max_at_witness", rep.max_at_witness}};
  return emit_report(report, out_path, rep.pass);
}

int cmd_verify_emulator(const std::string& model_path,
                        const std::string& artifact_path, double eps_apx,
                        double eps_neg, const std::string& out_path) {
  LinearMdpModel model = load_model_file(model_path, "model");
  Emulator em;
  try {
    em = emulator_from_json(load_json_file(artifact_path, "artifact"), model);
  } catch (const json::exception& e) {
    throw ConfigError("artifact", std::string("not an emulator artifact: ") +
                                      e.what());
  }
  EmulatorReport rep =
      check_emulator(model, em, em.h, eps_apx, eps_neg, em.budget);
  json report{{"check", "emulator"},
              {"pass", rep.pass},
              {"h", em.h},
              {"C", em.budget},
              {"eps_apx", eps_apx},
              {"eps_neg", eps_neg},
              {"total_norm", rep.total_norm},
              {"item1_pass", rep.pass1},
              {"item1_slack", rep.item1_slack},
              {"item2_pass", rep.pass2},
              {"item2_violation", rep.item2_violation},
              {"item3_pass", rep.pass3},
              {"item3_overshoot", rep.item3_overshoot}};
  return emit_report(report, out_path, rep.pass);
}

int cmd_eval_policy(const std::string& model_path, const std::string& policy_path,
                    std::uint64_t episodes, bool exact_only, std::uint64_t seed,
                    const std::string& out_path) {
  LinearMdpModel model = load_model_file(model_path, "model");
  Policy policy = load_policy_file(policy_path, "policy");
  json report;
  report["value_exact"] = policy_value(model, policy);
  if (!exact_only && episodes > 0) {
    EnvHandle env(model, seed);
    double total = 0.0;
    for (std::uint64_t i = 0; i < episodes; ++i) {
      const Trajectory traj = sample_episode(env, policy);
      for (std::size_t h = 1; h <= model.H; ++h) total += traj.rewards[h];
    }
    double range = 2.0 * static_cast<double>(model.H) * model.Cnrm;
    report["value_mc"] = total / static_cast<double>(episodes);
    report["value_ci"] =
        range * std::sqrt(std::log(2.0 / (1.0 - kCiLevel)) /
                          (2.0 * static_cast<double>(episodes)));
    report["episodes"] = episodes;
    report["ci_level"] = kCiLevel;
  }
  std::cout << report.dump(2) << "\n";
  if (!out_path.empty()) write_text_file(out_path, report.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse linear MDP experiment harness"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-env", "generate a synthetic model file");
  gen->require_subcommand(1);
  SparseEnvConfig sparse_cfg;
  std::string gen_out = "model.json";
  auto* gen_sparse = gen->add_subcommand("sparse", "latent-channel sparse model");
  gen_sparse->add_option("--d", sparse_cfg.d, "feature dimension");
  gen_sparse->add_option("--k", sparse_cfg.k, "support size");
  gen_sparse->add_option("--A", sparse_cfg.A, "actions");
  gen_sparse->add_option("--H", sparse_cfg.H, "horizon");
  gen_sparse->add_option("--seed", sparse_cfg.seed, "generator seed");
  gen_sparse->add_option("--floor", sparse_cfg.reachability_floor,
                         "reachability floor eta");
  gen_sparse->add_option("--states", sparse_cfg.latent_states, "latent states");
  gen_sparse->add_option("--out", gen_out, "output model file");
  DtBlockConfig dt_cfg;
  auto* gen_dt = gen->add_subcommand("dt-block", "decision-tree block MDP");
  gen_dt->add_option("--bits", dt_cfg.n, "observation bits");
  gen_dt->add_option("--states", dt_cfg.s, "latent states (power of two)");
  gen_dt->add_option("--A", dt_cfg.A, "actions");
  gen_dt->add_option("--H", dt_cfg.H, "horizon");
  gen_dt->add_option("--seed", dt_cfg.seed, "generator seed");
  gen_dt->add_option("--out", gen_out, "output model file");

  auto* run = app.add_subcommand("run", "execute a configured experiment");
  std::string run_config;
  std::vector<std::uint64_t> run_seeds;
  std::vector<std::string> run_overrides;
  std::string run_out;
  run->add_option("--config", run_config, "run config JSON")->required();
  run->add_option("--seed", run_seeds, "seed list, comma separated")
      ->delimiter(',');
  run->add_option("--override", run_overrides,
                  "schedule overrides, key=value comma separated")
      ->delimiter(',');
  run->add_option("--out", run_out, "output directory");

  auto* params = app.add_subcommand("params", "print schedule values");
  std::size_t p_A = 2, p_H = 2, p_d = 16;
  double p_C = 1.0, p_eps = 0.1, p_delta = 0.05, p_eta = 0.0;
  std::string p_schedule = "truncated";
  std::vector<std::string> p_overrides;
  params->add_option("--A", p_A, "actions");
  params->add_option("--H", p_H, "horizon");
  params->add_option("--C", p_C, "l1 budget Cnrm");
  params->add_option("--eps", p_eps, "target accuracy");
  params->add_option("--delta", p_delta, "failure probability");
  params->add_option("--d", p_d, "feature dimension");
  params->add_option("--schedule", p_schedule, "truncated or reachable")
      ->check(CLI::IsMember({"truncated", "reachable"}));
  params->add_option("--eta", p_eta, "reachability level (reachable schedule)");
  params->add_option("--override", p_overrides,
                     "schedule overrides, key=value comma separated")
      ->delimiter(',');

  auto* verify = app.add_subcommand("verify", "check a model or artifact");
  verify->require_subcommand(1);
  std::string v_model, v_artifact, v_out;
  double v_tol = 1e-8, v_alpha = 0.0, v_eps_apx = 0.0, v_eps_neg = 0.0;
  auto* v_m = verify->add_subcommand("model", "validate model contracts");
  v_m->add_option("--model", v_model, "model file")->required();
  v_m->add_option("--tol", v_tol, "numeric tolerance");
  v_m->add_option("--out", v_out, "report file");
  auto* v_c = verify->add_subcommand("cover", "check a policy cover");
  v_c->add_option("--model", v_model, "model file")->required();
  v_c->add_option("--artifact", v_artifact, "cover artifact file")->required();
  v_c->add_option("--alpha", v_alpha, "coverage level (overrides artifact)");
  v_c->add_option("--out", v_out, "report file");
  auto* v_e = verify->add_subcommand("emulator", "check an emulator");
  v_e->add_option("--model", v_model, "model file")->required();
  v_e->add_option("--artifact", v_artifact, "emulator artifact file")->required();
  v_e->add_option("--eps-apx", v_eps_apx, "backup accuracy target")->required();
  v_e->add_option("--eps-neg", v_eps_neg, "negativity tolerance")->required();
  v_e->add_option("--out", v_out, "report file");

  auto* eval = app.add_subcommand("eval-policy", "value of a stored policy");
  std::string e_model, e_policy, e_out;
  std::uint64_t e_episodes = 0, e_seed = 0;
  bool e_exact = false;
  eval->add_option("--model", e_model, "model file")->required();
  eval->add_option("--policy", e_policy, "policy file")->required();
  eval->add_option("--episodes", e_episodes, "Monte-Carlo episode count");
  eval->add_flag("--exact", e_exact, "exact value only");
  eval->add_option("--seed", e_seed, "Monte-Carlo seed");
  eval->add_option("--out", e_out, "report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen_sparse->parsed()) return cmd_gen_sparse(sparse_cfg, gen_out);
    if (gen_dt->parsed()) return cmd_gen_dt(dt_cfg, gen_out);
    if (run->parsed()) return cmd_run(run_config, run_seeds, run_overrides, run_out);
    if (params->parsed())
      return cmd_params(p_A, p_H, p_C, p_eps, p_delta, p_d, p_schedule, p_eta,
                        p_overrides);
    if (v_m->parsed()) return cmd_verify_model(v_model, v_tol, v_out);
    if (v_c->parsed()) return cmd_verify_cover(v_model, v_artifact, v_alpha, v_out);
    if (v_e->parsed())
      return cmd_verify_emulator(v_model, v_artifact, v_eps_apx, v_eps_neg, v_out);
    if (eval->parsed())
      return cmd_eval_policy(e_model, e_policy, e_episodes, e_exact, e_seed, e_out);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

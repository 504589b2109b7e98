#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "slmdp/envs.hpp"
#include "slmdp/oracle.hpp"
#include "slmdp/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace slmdp;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  static fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / "slmdp_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

CmdResult run_cli(const std::string& args) {
  static int invocation = 0;
  fs::path base = scratch_dir() / ("io_" + std::to_string(invocation++));
  fs::create_directories(base);
  fs::path out_file = base / "stdout.txt";
  fs::path err_file = base / "stderr.txt";
  std::string cmd = std::string(SLMDP_CLI_PATH) + " " + args + " > " +
                    out_file.string() + " 2> " + err_file.string();
  int status = std::system(cmd.c_str());
  CmdResult res;
  if (WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
  res.out = slurp(out_file);
  res.err = slurp(err_file);
  return res;
}

std::vector<json> read_jsonl(const fs::path& p) {
  std::vector<json> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(json::parse(line));
  return rows;
}

std::string write_config(const std::string& name, const json& cfg) {
  fs::path p = scratch_dir() / name;
  std::ofstream(p) << cfg.dump(2);
  return p.string();
}

}  // namespace

TEST_CASE("environment generation and model verification") {
  fs::path model_path = scratch_dir() / "gen_model.json";
  CmdResult gen = run_cli("gen-env sparse --d 8 --k 2 --A 2 --H 2 --seed 7 "
                          "--states 3 --out " +
                          model_path.string());
  REQUIRE(gen.exit_code == 0);
  REQUIRE(fs::exists(model_path));

  CmdResult ver = run_cli("verify model --model " + model_path.string());
  CHECK(ver.exit_code == 0);
  json report = json::parse(ver.out);
  CHECK(report["check"] == "model");
  CHECK(report["pass"] == true);

  fs::path dt_path = scratch_dir() / "gen_dt.json";
  CmdResult dt = run_cli("gen-env dt-block --bits 4 --states 4 --A 2 --H 2 "
                         "--seed 1 --out " +
                         dt_path.string());
  REQUIRE(dt.exit_code == 0);
  CHECK(run_cli("verify model --model " + dt_path.string()).exit_code == 0);
}

TEST_CASE("schedule printing") {
  CmdResult res = run_cli("params --A 2 --H 2 --C 1 --eps 0.1 --delta 0.05 --d 16");
  REQUIRE(res.exit_code == 0);
  json report = json::parse(res.out);
  CHECK(report["schedule"] == "truncated");
  CHECK(report["literal"]["trunc"].get<double>() ==
        doctest::Approx(7.8125e-4).epsilon(1e-12));
  CHECK(report["literal"]["m"] == "inf");
  CHECK(report["literal"]["n"] == "inf");

  CmdResult resolved = run_cli(
      "params --A 2 --H 2 --C 1 --eps 0.1 --delta 0.05 --d 16 "
      "--override cap_T=3,cap_n=100,cap_m=50,cap_N=10");
  REQUIRE(resolved.exit_code == 0);
  json rj = json::parse(resolved.out);
  CHECK(rj["resolved"]["T"] == 3);
  CHECK(rj["resolved"]["n"] == 100);

  CmdResult reach = run_cli(
      "params --A 2 --H 4 --C 2 --delta 0.1 --d 8 --schedule reachable --eta 0.3");
  REQUIRE(reach.exit_code == 0);
  json rr = json::parse(reach.out);
  CHECK(rr["literal"]["T"] == 1.0);
  CHECK(rr["literal"]["xi"].get<double>() ==
        doctest::Approx(0.3 / 18.0).epsilon(1e-12));
}

TEST_CASE("configured bandit run") {
  json cfg = {
      {"env",
       {{"type", "sparse"}, {"d", 50}, {"k", 3}, {"A", 4}, {"H", 1}, {"seed", 900}}},
      {"algorithm", "bandit_h1"},
      {"eps", 0.1},
      {"delta", 0.05},
      {"overrides", {{"cap_N_rew", 2000}}},
      {"seeds", {0, 1, 2}},
      {"out", (scratch_dir() / "bandit_a").string()},
      {"eval_episodes", 500}};
  std::string cfg_path = write_config("bandit.json", cfg);

  CmdResult res = run_cli("run --config " + cfg_path);
  REQUIRE(res.exit_code == 0);
  fs::path out_a = scratch_dir() / "bandit_a";

  SUBCASE("summary rows match the seed list and report near optimal play") {
    std::string csv = slurp(out_a / "summary.csv");
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "seed,episodes,subopt_oracle,value_mc,value_ci,status");
    std::size_t rows = 0;
    while (std::getline(lines, line))
      if (!line.empty()) ++rows;
    CHECK(rows == 3);

    std::vector<json> records = read_jsonl(out_a / "metrics.jsonl");
    REQUIRE(records.size() == 3);
    for (const json& r : records) {
      CHECK(r["status"] == "ok");
      CHECK(r["episodes"] == 2000);
      CHECK(r["subopt_oracle"].get<double>() >= -1e-9);
      CHECK(r["subopt_oracle"].get<double>() <= 0.1);
      double gap = std::abs(r["value_mc"].get<double>() -
                            r["value_exact"].get<double>());
      CHECK(gap <= r["value_ci"].get<double>());
    }
  }

  SUBCASE("reruns are byte identical outside wall clock") {
    CmdResult rerun = run_cli("run --config " + cfg_path + " --out " +
                              (scratch_dir() / "bandit_b").string());
    REQUIRE(rerun.exit_code == 0);
    fs::path out_b = scratch_dir() / "bandit_b";
    CHECK(slurp(out_a / "summary.csv") == slurp(out_b / "summary.csv"));
    CHECK(slurp(out_a / "manifest.json") == slurp(out_b / "manifest.json"));
    std::vector<json> a = read_jsonl(out_a / "metrics.jsonl");
    std::vector<json> b = read_jsonl(out_b / "metrics.jsonl");
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i].erase("wall_ms");
      b[i].erase("wall_ms");
      CHECK(a[i] == b[i]);
    }
  }

  SUBCASE("stored policies evaluate to the recorded exact value") {
    std::vector<json> records = read_jsonl(out_a / "metrics.jsonl");
    LinearMdpModel model;
    {
      SparseEnvConfig c;
      c.d = 50;
      c.k = 3;
      c.A = 4;
      c.H = 1;
      c.seed = 900;
      model = gen_sparse_env(c);
    }
    std::ifstream in(out_a / "policy_0.json");
    json pj;
    in >> pj;
    Policy policy = policy_from_json(pj);
    CHECK(policy_value(model, policy) ==
          doctest::Approx(records[0]["value_exact"].get<double>()).epsilon(1e-12));
  }
}

TEST_CASE("config error reporting") {
  SUBCASE("missing env file names the field") {
    json cfg = {{"env", "no_such_model.json"}, {"algorithm", "opt"},
                {"eps", 0.1},                  {"delta", 0.05},
                {"seeds", {1}},                {"out", "x"}};
    CmdResult res = run_cli("run --config " + write_config("bad_env.json", cfg));
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("config error at env") != std::string::npos);
  }

  SUBCASE("unknown algorithm") {
    json cfg = {{"env", {{"type", "sparse"}}}, {"algorithm", "sarsa"},
                {"eps", 0.1},                  {"delta", 0.05},
                {"seeds", {1}},                {"out", "x"}};
    CmdResult res = run_cli("run --config " + write_config("bad_alg.json", cfg));
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("algorithm") != std::string::npos);
  }

  SUBCASE("unknown override key") {
    json cfg = {{"env", {{"type", "sparse"}}},
                {"algorithm", "opt"},
                {"eps", 0.1},
                {"delta", 0.05},
                {"overrides", {{"cap_Q", 5}}},
                {"seeds", {1}},
                {"out", "x"}};
    CmdResult res = run_cli("run --config " + write_config("bad_ov.json", cfg));
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("overrides.cap_Q") != std::string::npos);
  }

  SUBCASE("slm without a reachability level") {
    json cfg = {{"env", {{"type", "sparse"}}}, {"algorithm", "slm"},
                {"eps", 0.1},                  {"delta", 0.05},
                {"seeds", {1}},                {"out", "x"}};
    CmdResult res = run_cli("run --config " + write_config("bad_eta.json", cfg));
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("eta") != std::string::npos);
  }

  SUBCASE("bandit on a multi step environment") {
    json cfg = {{"env", {{"type", "sparse"}, {"H", 2}}},
                {"algorithm", "bandit_h1"},
                {"eps", 0.1},
                {"delta", 0.05},
                {"seeds", {1}},
                {"out", (scratch_dir() / "never").string()}};
    CmdResult res = run_cli("run --config " + write_config("bad_h.json", cfg));
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("one-step") != std::string::npos);
  }

  SUBCASE("flag parse failure") {
    CmdResult res = run_cli("run");
    CHECK(res.exit_code == 2);
  }
}

TEST_CASE("per seed component errors keep the run alive") {
  json cfg = {{"env",
               {{"type", "sparse"},
                {"d", 6},
                {"k", 2},
                {"A", 2},
                {"H", 3},
                {"seed", 410},
                {"reachability_floor", 0.25},
                {"latent_states", 3}}},
              {"algorithm", "slm"},
              {"eps", 0.25},
              {"delta", 0.05},
              {"eta", 0.25},
              {"overrides",
               {{"set_eps_cvx", 1e-9},
                {"cap_T", 2},
                {"cap_n", 64},
                {"cap_m", 32},
                {"cap_N", 50},
                {"solver_budget", 3000}}},
              {"seeds", {0, 1}},
              {"out", (scratch_dir() / "failing").string()},
              {"eval_episodes", 0}};
  CmdResult res = run_cli("run --config " + write_config("failing.json", cfg));
  CHECK(res.exit_code == 0);
  std::vector<json> records = read_jsonl(scratch_dir() / "failing" / "metrics.jsonl");
  REQUIRE(records.size() == 2);
  for (const json& r : records) {
    CHECK(r["status"] == "error:CoverFailure");
    CHECK(!r["error"].get<std::string>().empty());
    CHECK(r["subopt_oracle"].is_null());
  }
  std::string csv = slurp(scratch_dir() / "failing" / "summary.csv");
  CHECK(csv.find("error:CoverFailure") != std::string::npos);
}

TEST_CASE("cover and policy artifacts") {
  fs::path model_path = scratch_dir() / "artifact_model.json";
  REQUIRE(run_cli("gen-env sparse --d 8 --k 2 --A 2 --H 2 --seed 3 --states 3 "
                  "--out " +
                  model_path.string())
              .exit_code == 0);

  SUBCASE("a trivially valid cover passes and a tampered one fails") {
    fs::path good = scratch_dir() / "cover_good.json";
    std::ofstream(good) << json{{"h", 1},
                                {"alpha", 0.5},
                                {"policies", {json{{"kind", "uniform"}}}}}
                               .dump();
    CHECK(run_cli("verify cover --model " + model_path.string() + " --artifact " +
                  good.string())
              .exit_code == 0);

    fs::path bad = scratch_dir() / "cover_bad.json";
    std::ofstream(bad) << json{{"h", 2},
                               {"alpha", 1.5},
                               {"policies", {json{{"kind", "uniform"}}}}}
                              .dump();
    CmdResult res = run_cli("verify cover --model " + model_path.string() +
                            " --artifact " + bad.string());
    CHECK(res.exit_code == 1);
    json report = json::parse(res.out);
    CHECK(report["pass"] == false);
    CHECK(report["witness_state"].is_string());
    CHECK(report["min_ratio"].get<double>() < 1.5);
  }

  SUBCASE("exact evaluation matches the library oracle") {
    SparseEnvConfig c;
    c.d = 8;
    c.k = 2;
    c.A = 2;
    c.H = 2;
    c.seed = 3;
    c.latent_states = 3;
    LinearMdpModel model = gen_sparse_env(c);
    fs::path policy_path = scratch_dir() / "uniform_policy.json";
    std::ofstream(policy_path) << policy_to_json(Policy::uniform()).dump();

    CmdResult exact = run_cli("eval-policy --model " + model_path.string() +
                              " --policy " + policy_path.string() + " --exact");
    REQUIRE(exact.exit_code == 0);
    json report = json::parse(exact.out);
    CHECK(report["value_exact"].get<double>() ==
          doctest::Approx(policy_value(model, Policy::uniform())).epsilon(1e-12));
    CHECK(!report.contains("value_mc"));

    CmdResult mc = run_cli("eval-policy --model " + model_path.string() +
                           " --policy " + policy_path.string() +
                           " --episodes 4000 --seed 5");
    REQUIRE(mc.exit_code == 0);
    json mj = json::parse(mc.out);
    double gap = std::abs(mj["value_mc"].get<double>() -
                          mj["value_exact"].get<double>());
    CHECK(gap <= mj["value_ci"].get<double>());
  }
}

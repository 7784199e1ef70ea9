#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "cli/experiment.hpp"
#include "pdmp/error.hpp"

using namespace pdmp;
using namespace pdmp::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pdmp_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json small_gene_config() {
  return json::parse(R"({
    "model": {"name": "gene", "params": {"lambda_low": 1, "lambda_high": 1}},
    "seed": 3, "replicas": 2, "steps": 20000, "occupation_samples": 5000,
    "counting": {"replicas": 2000, "times": [1.0], "max_n": 4},
    "grid": {"nodes": 100},
    "drift": {"replicas": 5000, "probes": [0, 4]}
  })");
}

int run_binary(const std::string& args) {
  const int status = std::system((std::string(PDMP_LAB_BINARY) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config(small_gene_config());
  CHECK(c.seed == 3);
  CHECK(c.replicas == 2);
  CHECK(c.counting.times == std::vector<double>{1.0});
  CHECK(c.burn_in_fraction == 0.2);
  CHECK(c.tolerances.w1 == 0.05);

  auto missing_seed = small_gene_config();
  missing_seed.erase("seed");
  CHECK_THROWS_AS(parse_config(missing_seed), ConfigError);
  auto unknown = small_gene_config();
  unknown["stesp"] = 1;
  CHECK_THROWS_AS(parse_config(unknown), ConfigError);
  auto nested = small_gene_config();
  nested["grid"]["nodez"] = 1;
  CHECK_THROWS_AS(parse_config(nested), ConfigError);
  auto bad_type = small_gene_config();
  bad_type["steps"] = -4;
  CHECK_THROWS_AS(parse_config(bad_type), ConfigError);
  auto bad_model = small_gene_config();
  bad_model["model"]["name"] = "unknown";
  CHECK_THROWS_AS(parse_config(bad_model), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("shipped configs parse") {
  for (const auto& entry : fs::directory_iterator(PDMP_CONFIG_DIR)) {
    INFO(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path()));
  }
}

TEST_CASE("simulate") {
  const auto dir = scratch_dir("simulate");
  const auto c = parse_config(small_gene_config());
  CHECK(cmd_simulate(c, dir / "a", 1) == kExitOk);
  CHECK(cmd_simulate(c, dir / "b", 3) == kExitOk);
  for (const char* f : {"chain.csv", "occupation.csv", "summary.json"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  CHECK(slurp(dir / "a" / "chain.csv").rfind("n,tau,y,xi\n", 0) == 0);
  CHECK(slurp(dir / "a" / "occupation.csv").rfind("t,y,xi\n", 0) == 0);
  const auto s = json::parse(slurp(dir / "a" / "summary.json"));
  CHECK(s.at("occupation_mean").get<double>() == doctest::Approx(1.0).epsilon(0.1));
  CHECK(s.at("eta_histogram").at("probability").size() == 1);

  auto zero = small_gene_config();
  zero["steps"] = 0;
  CHECK(cmd_simulate(parse_config(zero), dir / "z", 1) == kExitOk);
  CHECK(slurp(dir / "z" / "chain.csv") == "n,tau,y,xi\n0,0,0,0\n");
}

TEST_CASE("correspondence with constant rate reports (1/lambda, lambda)") {
  const auto dir = scratch_dir("corr");
  auto cfg = small_gene_config();
  cfg["model"]["params"] = {{"lambda_low", 2.0}, {"lambda_high", 2.0}};
  cfg["steps"] = 50000;
  const auto c = parse_config(cfg);
  CHECK(cmd_correspondence(c, dir, 1) == kExitOk);
  const auto d = json::parse(slurp(dir / "distances.json"));
  const auto& n = d.at("normalizers");
  CHECK(n.at("g_tilde").get<double>() == doctest::Approx(0.5).epsilon(2e-3));
  CHECK(n.at("w_tilde").get<double>() == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(d.at("round_trip_vs_chain").at("w1").get<double>() <= 0.05);
}

TEST_CASE("oracle and diagnostics") {
  const auto dir = scratch_dir("oracle");
  auto cfg = small_gene_config();
  cfg["grid"]["write_matrices"] = true;
  // 32000 post-burn-in atoms: MC error alone is around 0.03.
  cfg["tolerances"] = {{"oracle_w1", 0.1}};
  const auto c = parse_config(cfg);
  CHECK(cmd_oracle(c, dir, 1) == kExitOk);
  const auto o = json::parse(slurp(dir / "oracle.json"));
  CHECK(o.at("factorization").at("passed").get<bool>());
  CHECK(fs::exists(dir / "P.csv"));
  CHECK(fs::exists(dir / "phi.csv"));

  CHECK(cmd_diagnostics(c, dir, 1) == kExitOk);
  const auto drift = json::parse(slurp(dir / "drift.json"));
  CHECK(drift.at("constants").at("a").get<double>() == 0.5);
  CHECK(drift.at("constants").at("b").get<double>() == 1.0);

  auto neg = small_gene_config();
  neg["model"] = {{"name", "expanding_flow"}};
  const auto nd = scratch_dir("neg");
  CHECK(cmd_diagnostics(parse_config(neg), nd, 1) == kExitOk);
  const auto a = json::parse(slurp(nd / "assumptions.json"));
  std::vector<std::string> failed;
  for (const auto& check : a.at("checks")) {
    if (check.at("status") == "fail") failed.push_back(check.at("id"));
  }
  CHECK(failed == std::vector<std::string>{"flow_envelope"});
  // The grid cannot hold an expanding flow.
  CHECK(cmd_oracle(parse_config(neg), nd, 1) == kExitTolerance);
}

TEST_CASE("binary exit codes and flags") {
  const auto dir = scratch_dir("binary");
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << small_gene_config().dump();
  CHECK(run_binary("simulate --config " + cfg.string() + " --out " + (dir / "o").string()) == kExitOk);
  CHECK(run_binary("simulate --config " + cfg.string() + " --seed 4 --threads 2 --out " +
                   (dir / "p").string()) == kExitOk);
  CHECK(slurp(dir / "o" / "chain.csv") != slurp(dir / "p" / "chain.csv"));
  CHECK(run_binary("simulate --config /nonexistent.json") == kExitConfig);
  CHECK(run_binary("bogus") == kExitConfig);
  CHECK(run_binary("simulate") == kExitConfig);

  std::ofstream(dir / "bad.json") << R"({"model":{"name":"gene"},"seed":1,"typo":2})";
  CHECK(run_binary("oracle --config " + (dir / "bad.json").string()) == kExitConfig);

  auto strict = small_gene_config();
  strict["tolerances"] = {{"w1", 1e-9}};
  std::ofstream(dir / "strict.json") << strict.dump();
  CHECK(run_binary("correspondence --config " + (dir / "strict.json").string() + " --out " +
                   (dir / "s").string()) == kExitTolerance);
}

#include "cli/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "pdmp/diagnostics.hpp"
#include "pdmp/error.hpp"
#include "pdmp/finite_oracle.hpp"
#include "pdmp/metrics.hpp"
#include "pdmp/parallel.hpp"
#include "pdmp/simulate.hpp"
#include "pdmp/transforms.hpp"

namespace pdmp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- config parsing -------------------------------------------------------

void only_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double get_double(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::size_t get_size(const json& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::vector<double> get_doubles(const json& obj, const char* key,
                                std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(std::string("'") + key + "' must be an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(std::string("'") + key + "' must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

// ---- seeds ----------------------------------------------------------------

// Independent master seeds for the phases of one command.
std::uint64_t phase_seed(std::uint64_t seed, std::uint64_t phase) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (phase + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

enum Phase : std::uint64_t { kChains, kOccupation, kCounting, kForward, kBackward, kRoundTrip, kDrift };

// ---- shared pieces --------------------------------------------------------

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

struct Simulation {
  std::shared_ptr<const ModelSpec> model;
  std::vector<JumpTrajectory> trajectories;
  std::size_t burn_steps = 0;
  WeightedMeasure chain;
  WeightedMeasure occupation;
  std::vector<double> occupation_times;
  double window_start = 0.0, window_end = 0.0;
};

ExtendedState initial_state(const ExperimentConfig& c, const ModelSpec& m) {
  const StatePoint x = c.initial.value_or(StatePoint{m.domain().lower, 0});
  if (!m.domain().contains(x.y) || x.regime >= m.regimes()) {
    throw ConfigError("initial state lies outside the model's state space");
  }
  return {x, 0.0};
}

Simulation simulate(const ExperimentConfig& c, unsigned threads) {
  Simulation s;
  s.model = model_from_json(c.model);
  const ExtendedState init = initial_state(c, *s.model);
  s.trajectories = run_replicas(*s.model, init, c.steps, phase_seed(c.seed, kChains),
                                c.replicas, threads);
  s.burn_steps = static_cast<std::size_t>(std::floor(c.burn_in_fraction * static_cast<double>(c.steps)));
  if (c.steps > s.burn_steps && c.replicas > 0) {
    s.chain = chain_measure(s.trajectories, s.burn_steps);
    double horizon = std::numeric_limits<double>::infinity();
    for (const auto& t : s.trajectories) horizon = std::min(horizon, t.taus().back());
    s.window_end = horizon;
    s.window_start = c.burn_in_fraction * horizon;
    if (c.occupation_samples > 0) {
      std::vector<PdmpPath> paths;
      for (const auto& t : s.trajectories) paths.emplace_back(s.model->flow_ptr(), t);
      Rng rng = make_stream(phase_seed(c.seed, kOccupation), 0);
      s.occupation = occupation_measure(paths, s.window_start, s.window_end,
                                        c.occupation_samples, rng, &s.occupation_times);
    }
  }
  return s;
}

json regime_masses(const WeightedMeasure& mu, std::size_t regimes) {
  json out = json::array();
  for (std::size_t i = 0; i < regimes; ++i) out.push_back(mu.regime_mass(i));
  return out;
}

double mean_y(const WeightedMeasure& mu) {
  return integrate(mu, [](const StatePoint& x) { return x.y; }) / mu.total_mass();
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  only_keys(doc, {"model", "seed", "replicas", "steps", "burn_in_fraction",
                  "occupation_samples", "initial", "counting", "grid", "drift",
                  "tolerances", "output_dir"},
            "config");
  ExperimentConfig c;
  if (!doc.contains("model")) throw ConfigError("config: 'model' is required");
  if (!doc.contains("seed")) throw ConfigError("config: 'seed' is required");
  c.model = doc.at("model");
  model_from_json(c.model);  // validate early
  if (!doc.at("seed").is_number_integer() || doc.at("seed").get<std::int64_t>() < 0) {
    throw ConfigError("config: 'seed' must be a non-negative integer");
  }
  c.seed = doc.at("seed").get<std::uint64_t>();
  c.replicas = get_size(doc, "replicas", c.replicas);
  c.steps = get_size(doc, "steps", c.steps);
  c.burn_in_fraction = get_double(doc, "burn_in_fraction", c.burn_in_fraction);
  if (!(c.burn_in_fraction >= 0.0 && c.burn_in_fraction < 1.0)) {
    throw ConfigError("config: burn_in_fraction must lie in [0, 1)");
  }
  if (c.replicas == 0) throw ConfigError("config: replicas must be positive");
  c.occupation_samples = get_size(doc, "occupation_samples", c.occupation_samples);
  if (doc.contains("initial")) {
    const json& x = doc.at("initial");
    only_keys(x, {"y", "i"}, "initial");
    c.initial = StatePoint{get_double(x, "y", 0.0), get_size(x, "i", 0)};
  }
  if (doc.contains("counting")) {
    const json& x = doc.at("counting");
    only_keys(x, {"replicas", "times", "max_n"}, "counting");
    c.counting.replicas = get_size(x, "replicas", c.counting.replicas);
    c.counting.times = get_doubles(x, "times", c.counting.times);
    c.counting.max_n = get_size(x, "max_n", c.counting.max_n);
  }
  if (doc.contains("grid")) {
    const json& x = doc.at("grid");
    only_keys(x, {"nodes", "y_max", "dt", "write_matrices"}, "grid");
    c.grid.nodes = get_size(x, "nodes", c.grid.nodes);
    c.grid.y_max = get_double(x, "y_max", c.grid.y_max);
    c.grid.dt = get_double(x, "dt", c.grid.dt);
    if (x.contains("write_matrices")) {
      if (!x.at("write_matrices").is_boolean()) {
        throw ConfigError("grid: 'write_matrices' must be a boolean");
      }
      c.grid.write_matrices = x.at("write_matrices").get<bool>();
    }
  }
  if (doc.contains("drift")) {
    const json& x = doc.at("drift");
    only_keys(x, {"replicas", "probes"}, "drift");
    c.drift.replicas = get_size(x, "replicas", c.drift.replicas);
    c.drift.probes = get_doubles(x, "probes", c.drift.probes);
  }
  if (doc.contains("tolerances")) {
    const json& x = doc.at("tolerances");
    only_keys(x, {"w1", "oracle_w1", "factorization", "correspondence", "normalizer"},
              "tolerances");
    Tolerances& t = c.tolerances;
    t.w1 = get_double(x, "w1", t.w1);
    t.oracle_w1 = get_double(x, "oracle_w1", t.oracle_w1);
    t.factorization = get_double(x, "factorization", t.factorization);
    t.correspondence = get_double(x, "correspondence", t.correspondence);
    t.normalizer = get_double(x, "normalizer", t.normalizer);
  }
  if (doc.contains("output_dir")) {
    if (!doc.at("output_dir").is_string()) throw ConfigError("'output_dir' must be a string");
    c.output_dir = doc.at("output_dir").get<std::string>();
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

int cmd_simulate(const ExperimentConfig& c, const fs::path& out, unsigned threads) {
  const Simulation s = simulate(c, threads);
  const ModelSpec& m = *s.model;
  fs::create_directories(out);
  {
    std::ostringstream csv;
    write_trajectory_csv(csv, s.trajectories.front());
    write_text(out / "chain.csv", csv.str());
  }
  {
    std::ostringstream csv;
    csv << "t,y,xi\n";
    const auto& atoms = s.occupation.atoms();
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      csv << format_double(s.occupation_times[k]) << ',' << format_double(atoms[k].x.y) << ','
          << atoms[k].x.regime << '\n';
    }
    write_text(out / "occupation.csv", csv.str());
  }

  bool monotone = true;
  double total_time = 0.0, total_jumps = 0.0;
  for (const auto& t : s.trajectories) {
    const auto& taus = t.taus();
    for (std::size_t n = 1; n < taus.size(); ++n) monotone = monotone && taus[n] > taus[n - 1];
    total_time += taus.back() - taus.front();
    total_jumps += static_cast<double>(t.steps());
  }

  json summary;
  summary["model"] = m.name();
  summary["seed"] = c.seed;
  summary["replicas"] = c.replicas;
  summary["steps"] = c.steps;
  summary["burn_in_steps"] = s.burn_steps;
  summary["tau_strictly_increasing"] = monotone;
  summary["jump_rate"] = total_time > 0.0 ? json(total_jumps / total_time) : json(nullptr);
  summary["mean_holding_time"] =
      total_jumps > 0.0 ? json(total_time / total_jumps) : json(nullptr);
  if (!s.chain.empty()) {
    summary["chain"] = {{"atoms", s.chain.size()},
                        {"mean_y", mean_y(s.chain)},
                        {"regime_mass", regime_masses(s.chain, m.regimes())}};
  } else {
    summary["chain"] = nullptr;
  }
  if (!s.occupation.empty()) {
    summary["occupation"] = {{"atoms", s.occupation.size()},
                             {"window", {s.window_start, s.window_end}},
                             {"mean_y", mean_y(s.occupation)},
                             {"regime_mass", regime_masses(s.occupation, m.regimes())}};
    summary["occupation_mean"] = mean_y(s.occupation);
  } else {
    summary["occupation"] = nullptr;
    summary["occupation_mean"] = nullptr;
  }
  if (c.counting.replicas >= 2 && !c.counting.times.empty()) {
    const JumpCountStats st =
        jump_count_stats(m, initial_state(c, m), c.counting.times, c.counting.max_n,
                         c.counting.replicas, phase_seed(c.seed, kCounting), threads);
    summary["eta_histogram"] = {{"times", st.times},
                                {"max_n", st.max_n},
                                {"replicas", st.replicas},
                                {"probability", st.count},
                                {"standard_error", st.count_se}};
  }
  write_json(out / "summary.json", summary);
  return monotone ? kExitOk : kExitTolerance;
}

int cmd_correspondence(const ExperimentConfig& c, const fs::path& out, unsigned threads) {
  const Simulation s = simulate(c, threads);
  if (s.chain.empty() || s.occupation.empty()) {
    throw ConfigError("correspondence: need steps beyond burn-in and occupation samples");
  }
  const ModelSpec& m = *s.model;
  const Tolerances& tol = c.tolerances;
  const TransformResult fwd =
      correspondence_phi_to_psi(m, s.chain, phase_seed(c.seed, kForward), threads);
  const TransformResult bwd =
      correspondence_psi_to_phi(m, s.occupation, phase_seed(c.seed, kBackward), threads);
  const TransformResult trip =
      correspondence_psi_to_phi(m, fwd.measure, phase_seed(c.seed, kRoundTrip), threads);
  const DistanceReport d_fwd = compare_measures(fwd.measure, s.occupation);
  const DistanceReport d_bwd = compare_measures(bwd.measure, s.chain);
  const DistanceReport d_trip = compare_measures(trip.measure, s.chain);
  const double product = fwd.report.normalizer * bwd.report.normalizer;

  json doc;
  doc["model"] = m.name();
  doc["seed"] = c.seed;
  doc["atoms"] = {{"chain", s.chain.size()}, {"occupation", s.occupation.size()}};
  auto block = [&](const DistanceReport& d, const TransformResult* r) {
    json b = {{"w1", d.combined}, {"distance", to_json(d)}, {"passed", d.combined <= tol.w1}};
    if (r) b["transform"] = to_json(r->report);
    return b;
  };
  doc["phi_to_psi_vs_occupation"] = block(d_fwd, &fwd);
  doc["psi_to_phi_vs_chain"] = block(d_bwd, &bwd);
  doc["round_trip_vs_chain"] = block(d_trip, &trip);
  doc["normalizers"] = {{"g_tilde", fwd.report.normalizer},
                        {"w_tilde", bwd.report.normalizer},
                        {"product", product},
                        {"passed", std::abs(product - 1.0) <= tol.normalizer}};
  if (m.intensity().is_constant()) {
    doc["normalizers"]["expected"] = {1.0 / m.lambda_lower(), m.lambda_lower()};
  }
  const bool passed = d_fwd.combined <= tol.w1 && d_bwd.combined <= tol.w1 &&
                      d_trip.combined <= tol.w1 && std::abs(product - 1.0) <= tol.normalizer;
  doc["passed"] = passed;
  fs::create_directories(out);
  write_json(out / "distances.json", doc);
  return passed ? kExitOk : kExitTolerance;
}

int cmd_oracle(const ExperimentConfig& c, const fs::path& out, unsigned threads) {
  auto model = model_from_json(c.model);
  const Tolerances& tol = c.tolerances;
  GridOptions opt;
  opt.nodes = c.grid.nodes;
  opt.y_max = c.grid.y_max;
  opt.dt = c.grid.dt;
  opt.threads = threads;
  fs::create_directories(out);
  json doc;
  doc["model"] = model->name();
  doc["grid"] = {{"nodes", opt.nodes}, {"y_max", opt.y_max}, {"dt", opt.dt}};
  GridModel g;
  try {
    g = build_grid_model(*model, opt);
  } catch (const GridLeakageError& e) {
    doc["error"] = e.what();
    doc["passed"] = false;
    write_json(out / "oracle.json", doc);
    return kExitTolerance;
  }
  const FactorizationReport fact = check_factorization(g, tol.factorization);
  const StationaryResult probe = stationary_probe(g.P);
  const OracleCorrespondence corr = oracle_correspondence(g, tol.correspondence);
  doc["grid"]["h"] = g.h;
  doc["grid"]["t_max"] = g.t_max;
  doc["stationary_leakage"] = g.stationary_leakage;
  doc["factorization"] = to_json(fact);
  doc["uniqueness_probe"] = {{"start_gap", probe.start_gap}, {"unique", probe.unique},
                             {"iterations", {probe.first.iterations, probe.second.iterations}}};
  doc["correspondence"] = to_json(corr);
  doc["moments"] = {{"phi_mean_y", grid_mean(g, corr.phi)},
                    {"psi_mean_y", grid_mean(g, corr.psi)}};
  bool passed = fact.passed && corr.passed &&
                std::abs(corr.normalizer_product - 1.0) <= 1e-8;
  if (c.steps > 0) {
    const Simulation s = simulate(c, threads);
    if (!s.chain.empty()) {
      const DistanceReport d = compare_measures(grid_measure(g, corr.phi), s.chain);
      doc["oracle_vs_chain"] = {{"w1", d.combined},
                                {"distance", to_json(d)},
                                {"passed", d.combined <= tol.oracle_w1}};
      passed = passed && d.combined <= tol.oracle_w1;
    }
  }
  doc["passed"] = passed;
  write_json(out / "oracle.json", doc);
  if (c.grid.write_matrices) {
    const std::pair<const char*, const Eigen::MatrixXd*> mats[] = {
        {"P.csv", &g.P}, {"G.csv", &g.G}, {"W.csv", &g.W}, {"G_tilde.csv", &g.GT},
        {"W_tilde.csv", &g.WT}};
    for (const auto& [name, mat] : mats) {
      std::ostringstream csv;
      write_matrix_csv(csv, *mat);
      write_text(out / name, csv.str());
    }
    for (const auto& [name, vec] : {std::pair{"phi.csv", &corr.phi}, std::pair{"psi.csv", &corr.psi}}) {
      std::ostringstream csv;
      write_grid_vector_csv(csv, g, *vec);
      write_text(out / name, csv.str());
    }
  }
  return passed ? kExitOk : kExitTolerance;
}

int cmd_diagnostics(const ExperimentConfig& c, const fs::path& out, unsigned threads) {
  auto model = model_from_json(c.model);
  const AssumptionReport rep = run_assumption_suite(*model);
  fs::create_directories(out);
  write_json(out / "assumptions.json", to_json(rep));

  json drift;
  DriftReport table;
  bool drift_ok = true;
  const CheckStatus envelope = rep.check("flow_envelope").status;
  if (envelope != CheckStatus::pass) {
    drift["status"] = "skipped";
    drift["reason"] = "the flow envelope check failed, so the drift constants are undefined";
  } else {
    const DriftConstants dc = drift_constants(*model);
    std::vector<StatePoint> probes;
    if (c.drift.probes.empty()) {
      probes = default_drift_probes(*model);
    } else {
      for (std::size_t i = 0; i < model->regimes(); ++i) {
        for (double y : c.drift.probes) probes.push_back({y, i});
      }
    }
    table = verify_drift_empirically(*model, dc, probes, c.drift.replicas,
                                     phase_seed(c.seed, kDrift), threads);
    drift["status"] = table.passed ? "pass" : "fail";
    drift["constants"] = to_json(dc);
    drift["a_below_one"] = dc.a < 1.0;
    drift["empirical"] = to_json(table);
    drift_ok = table.passed;
  }
  write_json(out / "drift.json", drift);
  std::ostringstream csv;
  write_drift_csv(csv, table);
  write_text(out / "drift_table.csv", csv.str());

  if (model->negative_control()) return rep.matches_designation() ? kExitOk : kExitTolerance;
  return rep.failed_ids().empty() && drift_ok ? kExitOk : kExitTolerance;
}

int run_command(const std::string& name, const ExperimentConfig& c, const fs::path& out,
                unsigned threads) {
  if (name == "simulate") return cmd_simulate(c, out, threads);
  if (name == "correspondence") return cmd_correspondence(c, out, threads);
  if (name == "oracle") return cmd_oracle(c, out, threads);
  if (name == "diagnostics") return cmd_diagnostics(c, out, threads);
  throw ConfigError("unknown command '" + name + "'");
}

int main(int argc, char** argv) {
  CLI::App app{"pdmp-lab: PDMP simulation and verification experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out_dir;
  for (const char* name : {"simulate", "correspondence", "oracle", "diagnostics"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--threads", threads, "worker threads (default: PDMP_LAB_THREADS or 1)");
    sub->add_option("--out", out_dir, "output directory (default: config output_dir)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    ExperimentConfig config = load_config(config_path);
    if (seed) config.seed = *seed;
    const fs::path out = out_dir.empty() ? fs::path(config.output_dir) : fs::path(out_dir);
    const int code = run_command(command, config, out, resolve_threads(threads));
    if (code == kExitTolerance) std::cerr << command << ": tolerance check failed\n";
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace pdmp::cli

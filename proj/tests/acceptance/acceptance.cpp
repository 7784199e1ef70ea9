// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli/experiment.hpp"
#include "pdmp/diagnostics.hpp"
#include "pdmp/finite_oracle.hpp"
#include "pdmp/metrics.hpp"
#include "pdmp/models.hpp"
#include "pdmp/simulate.hpp"
#include "pdmp/transforms.hpp"

using namespace pdmp;
namespace fs = std::filesystem;

namespace {

constexpr double kKs1pct = 1.628;  // sqrt(-ln(0.005)/2)

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) passed = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAILED]");
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double mean_y(const WeightedMeasure& mu) {
  return integrate(mu, [](const StatePoint& x) { return x.y; }) / mu.total_mass();
}

// Chain and occupation estimates with 10^6 atoms each: 4 replicas of
// 312500 steps, 20% burn-in, 250000 occupation samples per path.
struct Stationary {
  WeightedMeasure chain, occupation;
};

Stationary estimate(const ModelSpec& m, const StatePoint& x0, std::uint64_t seed) {
  const auto reps = run_replicas(m, {x0, 0.0}, 312500, seed, 4, 1);
  Stationary s;
  s.chain = chain_measure(reps, 62500);
  std::vector<PdmpPath> paths;
  double horizon = 1e300;
  for (const auto& t : reps) {
    paths.emplace_back(m.flow_ptr(), t);
    horizon = std::min(horizon, t.taus().back());
  }
  Rng rng = make_stream(seed, 1000);
  s.occupation = occupation_measure(paths, 0.2 * horizon, horizon, 250000, rng);
  return s;
}

GridModel grid(const ModelSpec& m, std::size_t nodes, double y_max) {
  GridOptions o;
  o.nodes = nodes;
  o.y_max = y_max;
  return build_grid_model(m, o);
}

// Shared between criteria so each estimate is computed once.
const Stationary& gene_constant_estimate() {
  static const Stationary s = estimate(*gene_expression_model({1, 1, 1, 1}), {0.0, 0}, 1001);
  return s;
}
const Stationary& gene_sd_estimate() {
  static const Stationary s = estimate(*gene_expression_model(), {0.0, 0}, 1002);
  return s;
}

Outcome criterion_1() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const auto m = gene_expression_model({1, 1, 1, 1});
  const auto& s = gene_constant_estimate();
  const auto fwd = correspondence_phi_to_psi(*m, s.chain, 11, 1);
  const auto bwd = correspondence_psi_to_phi(*m, s.occupation, 12, 1);
  const double w_f = compare_measures(fwd.measure, s.occupation).combined;
  const double w_b = compare_measures(bwd.measure, s.chain).combined;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(s.chain.size() == 1000000 && s.occupation.size() == 1000000, "10^6 atoms each");
  o.require(w_f <= 0.05, "W1(phi->psi, occupation)=" + fmt(w_f) + " <= 0.05");
  o.require(w_b <= 0.05, "W1(psi->phi, chain)=" + fmt(w_b) + " <= 0.05");
  o.require(secs <= 120.0, "runtime " + fmt(secs) + "s <= 120s single-threaded");
  return o;
}

Outcome criterion_2() {
  Outcome o;
  const auto m = gene_expression_model();
  const auto& s = gene_sd_estimate();
  const auto fwd = correspondence_phi_to_psi(*m, s.chain, 21, 1);
  const auto bwd = correspondence_psi_to_phi(*m, s.occupation, 22, 1);
  const double w_f = compare_measures(fwd.measure, s.occupation).combined;
  const double w_b = compare_measures(bwd.measure, s.chain).combined;
  const auto g = grid(*m, 400, 15.0);
  const auto fixed = stationary_probe(g.P).first.vector;
  const double w_o = compare_measures(grid_measure(g, fixed), s.chain).combined;
  o.require(w_f <= 0.05, "W1(phi->psi, occupation)=" + fmt(w_f) + " <= 0.05");
  o.require(w_b <= 0.05, "W1(psi->phi, chain)=" + fmt(w_b) + " <= 0.05");
  o.require(w_o <= 0.03, "W1(chain, grid M=400)=" + fmt(w_o) + " <= 0.03");
  return o;
}

Outcome criterion_3() {
  Outcome o;
  const auto& s = gene_constant_estimate();
  const double occ = mean_y(s.occupation), chain = mean_y(s.chain);
  const auto g = grid(*gene_expression_model({1, 1, 1, 1}), 400, 15.0);
  const auto c = oracle_correspondence(g, 1e-6);
  const double g_phi = grid_mean(g, c.phi), g_psi = grid_mean(g, c.psi);
  o.require(std::abs(occ - 1.0) <= 0.05, "occupation mean " + fmt(occ) + " = 1 +- 0.05");
  o.require(std::abs(chain - 2.0) <= 0.05, "chain mean " + fmt(chain) + " = 2 +- 0.05");
  o.require(std::abs(g_psi - 1.0) <= 0.02, "oracle occupation mean " + fmt(g_psi) + " = 1 +- 0.02");
  o.require(std::abs(g_phi - 2.0) <= 0.02, "oracle chain mean " + fmt(g_phi) + " = 2 +- 0.02");
  return o;
}

Outcome criterion_4() {
  Outcome o;
  const auto g = grid(*gene_expression_model(), 200, 15.0);
  const auto f = check_factorization(g, 1e-6);
  o.require(f.residual_g_w <= 1e-6, "|GW-P|=" + fmt(f.residual_g_w) + " <= 1e-6");
  o.require(f.residual_gt_wt <= 1e-6, "|G~W~-P|=" + fmt(f.residual_gt_wt) + " <= 1e-6");

  // In law: n = 10^5 input states drawn from the chain estimate.
  const auto m = gene_expression_model();
  const auto& atoms = gene_sd_estimate().chain.atoms();
  const std::size_t n = 100000;
  WeightedMeasure input;
  for (std::size_t k = 0; k < n; ++k) input.add(atoms[k * 10].x, 1.0);
  const auto gw = apply_w_tilde(*m, apply_g_tilde(*m, input, 41, 1).measure, 42, 1);
  Rng rng = make_stream(43, 0);
  std::vector<Weighted1d> direct(n);
  for (std::size_t k = 0; k < n; ++k) direct[k] = {step_chain(*m, {input.atoms()[k].x, 0.0}, rng).x.y, 1.0};
  const auto comp = project(gw.measure);
  const double d = ks_statistic(comp, direct);
  const double ne = ks_two_sample_size(effective_size(comp), static_cast<double>(n));
  o.require(d <= kKs1pct / std::sqrt(ne), "KS(G~W~, P)=" + fmt(d) + " <= " + fmt(kKs1pct / std::sqrt(ne)));
  return o;
}

Outcome criterion_5() {
  Outcome o;
  for (const auto& [m, s] : {std::pair{gene_expression_model({1, 1, 1, 1}), &gene_constant_estimate()},
                             std::pair{gene_expression_model(), &gene_sd_estimate()}}) {
    const double g = apply_g_tilde(*m, s->chain, 51, 1).report.normalizer;
    const double w = apply_w_tilde(*m, s->occupation, 52, 1).report.normalizer;
    o.require(std::abs(g * w - 1.0) <= 0.01, m->name() + " MC product " + fmt(g * w) + " = 1 +- 0.01");
    const auto c = oracle_correspondence(grid(*m, 200, 15.0), 1e-6);
    o.require(std::abs(c.normalizer_product - 1.0) <= 1e-8,
              "oracle product - 1 = " + fmt(c.normalizer_product - 1.0));
  }
  return o;
}

Outcome criterion_6() {
  Outcome o;
  const std::size_t n = 100000;
  const double crit = kKs1pct / std::sqrt(double(n));
  const double crit2 = kKs1pct / std::sqrt(ks_two_sample_size(n, n));
  const std::pair<std::shared_ptr<const ModelSpec>, StatePoint> cases[] = {
      {gene_expression_model(), {1.0, 0}},
      {gene_expression_model(), {6.0, 0}},
      {two_regime_model(), {0.2, 0}},
      {two_regime_model(), {0.9, 1}}};
  std::uint64_t seed = 60;
  for (const auto& [m, x] : cases) {
    Rng rng = make_stream(++seed, 0);
    std::vector<double> inv(n), thin(n);
    for (auto& t : inv) t = sample_holding(*m, x, rng, HoldingMethod::inversion);
    for (auto& t : thin) t = sample_holding(*m, x, rng, HoldingMethod::thinning);
    auto cdf = [&](double t) { return 1.0 - std::exp(-m->hazard()(x, t)); };
    const double a = ks_statistic(inv, cdf), b = ks_statistic(thin, cdf), c = ks_statistic(inv, thin);
    const std::string tag = m->name() + " y=" + fmt(x.y) + " i=" + std::to_string(x.regime);
    o.require(a <= crit && b <= crit && c <= crit2,
              tag + " KS inv=" + fmt(a) + " thin=" + fmt(b) + " two-sample=" + fmt(c));
  }
  return o;
}

Outcome criterion_7() {
  Outcome o;
  const std::vector<double> times{0.5, 1.0, 2.0};
  const std::size_t reps = 1000000;
  const auto sd = jump_count_stats(*gene_expression_model(), {{0.0, 0}, 0.0}, times, 10, reps, 71, 1);
  const auto cst = jump_count_stats(*gene_expression_model({1, 1, 1, 1}), {{0.0, 0}, 0.0}, times, 10, reps, 72, 1);
  double worst_bound = -1e9, worst_poisson = 0.0, sum_z2 = 0.0;
  int cells = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    for (std::size_t n = 0; n <= 10; ++n) {
      const double fact = std::tgamma(n + 1.0);
      const double bound = std::exp(-t) * std::pow(1.5 * t, double(n)) / fact;
      worst_bound = std::max(worst_bound, sd.count[k][n] - bound - 3 * sd.count_se[k][n]);
      const double p = std::exp(-t) * std::pow(t, double(n)) / fact;
      const double se = std::sqrt(p * (1 - p) / double(reps));
      if (se > 0) {
        const double z = (cst.count[k][n] - p) / se;
        worst_poisson = std::max(worst_poisson, std::abs(z));
        sum_z2 += z * z;
        ++cells;
      }
      else if (cst.count[k][n] != 0.0) worst_poisson = 1e9;
    }
  }
  o.require(worst_bound <= 0.0, "max(P^ - bound - 3se)=" + fmt(worst_bound) + " <= 0");
  o.require(worst_poisson <= 3.0, "constant rate: max |P^ - Poisson|/se=" + fmt(worst_poisson) + " <= 3");
  // Context only: the sum of z^2 over the cells is about their number when the sampler is unbiased.
  o.detail += "; sum z^2=" + fmt(sum_z2) + " over " + std::to_string(cells) + " cells";
  return o;
}

Outcome criterion_8() {
  Outcome o;
  const std::pair<std::shared_ptr<const ModelSpec>, StatePoint> models[] = {
      {gene_expression_model(), {0.0, 0}}, {two_regime_model(), {0.0, 0}}};
  for (const auto& [m, x0] : models) {
    Rng rng = make_stream(81, 0);
    const auto traj = run_chain(*m, {x0, 0.0}, 200000, rng);
    const auto dt = traj.holding_times();
    const double lo = m->lambda_lower(), hi = m->lambda_upper();
    double fact = 1.0;
    for (int r = 1; r <= 3; ++r) {
      fact *= r;
      double s = 0.0, s2 = 0.0;
      for (double t : dt) {
        const double p = std::pow(t, r);
        s += p;
        s2 += p * p;
      }
      const double n = double(dt.size()), est = s / n;
      const double se = std::sqrt((s2 / n - est * est) / n);
      const double a = lo * std::pow(hi, -(r + 1)) * fact, b = hi * std::pow(lo, -(r + 1)) * fact;
      o.require(est >= a - 3 * se && est <= b + 3 * se,
                m->name() + " r=" + std::to_string(r) + ": " + fmt(a) + " <= " + fmt(est) + " <= " + fmt(b));
    }
  }
  return o;
}

Outcome criterion_9() {
  Outcome o;
  const auto m = gene_expression_model({1, 1, 1, 1});
  const auto c = drift_constants(*m);
  o.require(c.a == 0.5 && c.b == 1.0, "a=" + fmt(c.a) + " b=" + fmt(c.b));
  std::vector<StatePoint> probes;
  for (double y : {0.0, 1.0, 2.0, 4.0, 8.0}) probes.push_back({y, 0});
  const auto r = verify_drift_empirically(*m, c, probes, 100000, 91, 1);
  for (const auto& p : r.probes) {
    o.require(p.passed, "PV(" + fmt(p.x.y) + ")=" + fmt(p.pv) + " <= " + fmt(p.bound) + " + 3se");
  }
  const double tight = r.probes[3].pv;
  o.require(std::abs(tight - 3.0) <= 0.02, "tightness PV(4)=" + fmt(tight) + " = 3 +- 0.02");
  return o;
}

Outcome criterion_10() {
  Outcome o;
  for (const auto& m : {gene_expression_model(), two_regime_model()}) {
    const auto r = run_assumption_suite(*m);
    std::string failed;
    for (const auto& id : r.failed_ids()) failed += id + " ";
    bool all_pass = r.failed_ids().empty();
    for (const auto& c : r.checks) all_pass = all_pass && c.status == CheckStatus::pass;
    o.require(all_pass, m->name() + " all checks pass" + (failed.empty() ? "" : " (failed " + failed + ")"));
  }
  for (const auto& m : {expanding_flow_model(), overdriven_gene_model(), absorbing_switching_model()}) {
    const auto r = run_assumption_suite(*m);
    const auto f = r.failed_ids();
    o.require(f.size() == 1 && f[0] == m->designated_failure(),
              m->name() + " fails exactly " + m->designated_failure());
  }
  return o;
}

Outcome criterion_11() {
  Outcome o;
  const auto m = two_regime_model();
  const auto a = estimate(*m, {0.0, 0}, 1101);
  const auto b = estimate(*m, {m->domain().upper, 1}, 1102);
  const auto dc = compare_measures(a.chain, b.chain);
  const auto dp = compare_measures(a.occupation, b.occupation);
  o.require(dc.combined <= 0.02, "chain W1=" + fmt(dc.combined) + " (BL >= " + fmt(dc.bl_lower) + ") <= 0.02");
  o.require(dp.combined <= 0.02, "occupation W1=" + fmt(dp.combined) + " (BL >= " + fmt(dp.bl_lower) + ") <= 0.02");
  return o;
}

Outcome criterion_12() {
  Outcome o;
  for (const auto& m : {gene_expression_model({1, 1, 1, 1}), gene_expression_model(), two_regime_model(),
                        two_regime_model({1, TwoRegimeJump::bursts, 1}), expanding_flow_model(),
                        overdriven_gene_model(), absorbing_switching_model()}) {
    Rng rng = make_stream(121, 0);
    SemigroupSampling s;
    s.y_lower = m->domain().lower;
    s.y_upper = m->domain().bounded() ? m->domain().upper : 10.0;
    if (m->flow().contraction()->alpha > 0) s.t_upper = 1.0;
    const auto r = check_semigroup(m->flow(), 10000, 1e-10, rng, s);
    o.require(r.passed && r.max_identity_violation == 0.0,
              m->name() + " violation " + fmt(r.max_violation));
  }
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome criterion_13() {
  Outcome o;
  const auto root = fs::temp_directory_path() / "pdmp_acceptance_determinism";
  fs::remove_all(root);
  const nlohmann::json configs[] = {
      nlohmann::json::parse(R"({"model": {"name": "gene"}, "seed": 5, "replicas": 4, "steps": 40000,
        "occupation_samples": 20000, "counting": {"replicas": 20000},
        "grid": {"nodes": 100, "write_matrices": true}, "drift": {"replicas": 20000}})"),
      nlohmann::json::parse(R"({"model": {"name": "two_regime"}, "seed": 6, "replicas": 3, "steps": 40000,
        "occupation_samples": 20000, "counting": {"replicas": 20000},
        "grid": {"nodes": 60, "y_max": 1.0}, "drift": {"replicas": 20000}})")};
  int idx = 0;
  for (const auto& doc : configs) {
    const auto cfg = cli::parse_config(doc);
    for (const char* cmd : {"simulate", "correspondence", "oracle", "diagnostics"}) {
      const auto base = root / (std::to_string(idx) + cmd);
      const int c1 = cli::run_command(cmd, cfg, base / "t1", 1);
      const int c1b = cli::run_command(cmd, cfg, base / "t1b", 1);
      const int c4 = cli::run_command(cmd, cfg, base / "t4", 4);
      bool same = c1 == c4 && c1 == c1b;
      std::size_t files = 0;
      for (const auto& e : fs::directory_iterator(base / "t1")) {
        const auto name = e.path().filename();
        ++files;
        const std::string ref = slurp(e.path());
        same = same && ref == slurp(base / "t1b" / name) && ref == slurp(base / "t4" / name);
      }
      o.require(same && files > 0, std::string(cmd) + "[" + std::to_string(idx) + "] " +
                                       std::to_string(files) + " files identical");
    }
    ++idx;
  }
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"correspondence, constant-rate gene model", criterion_1},
      {"correspondence, state-dependent rate", criterion_2},
      {"closed-form stationary laws", criterion_3},
      {"factorization", criterion_4},
      {"normalizer identity", criterion_5},
      {"hazard law samplers", criterion_6},
      {"counting bound", criterion_7},
      {"holding-time moment bounds", criterion_8},
      {"drift", criterion_9},
      {"assumption suite", criterion_10},
      {"uniqueness probe", criterion_11},
      {"flow axioms", criterion_12},
      {"determinism", criterion_13}};
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.passed;
    std::printf("%s criterion %2zu (%s): %s [%.1fs]\n", o.passed ? "PASS" : "FAIL", k + 1,
                criteria[k].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

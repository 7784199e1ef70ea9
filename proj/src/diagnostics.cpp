#include "pdmp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pdmp/error.hpp"
#include "pdmp/parallel.hpp"
#include "pdmp/quadrature.hpp"
#include "pdmp/simulate.hpp"
#include "pdmp/transforms.hpp"

namespace pdmp {

namespace {

double window_lower(const ModelSpec& m) { return m.domain().lower; }
double window_upper(const ModelSpec& m) { return m.probe_upper(); }

double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform_open(rng); }

// Random pair in the probe window; every other pair is a close pair so that
// local slopes are probed as well as global ones.
std::pair<double, double> probe_pair(const ModelSpec& m, Rng& rng, std::size_t k) {
  const double lo = window_lower(m), hi = window_upper(m);
  const double u = uniform_in(rng, lo, hi);
  if (k % 2 == 0) return {u, uniform_in(rng, lo, hi)};
  const double gap = 1e-3 * (hi - lo) * (0.1 + 0.9 * uniform_open(rng));
  const double v = u + gap <= hi ? u + gap : u - gap;
  return {u, v};
}

// int f(theta) p_theta(y) d theta over the kernel's reference rule.
template <class F>
double theta_integral(const IfsKernel& J, const std::vector<ThetaNode>& rule, double y,
                      F&& f) {
  double s = 0.0;
  for (const ThetaNode& n : rule) s += n.weight * f(n.theta) * J.density(n.theta, y);
  return s;
}

}  // namespace

FlowContractionEstimate estimate_flow_contraction(const ModelSpec& model,
                                                  const ProbeSpec& spec) {
  const Semiflow& flow = model.flow();
  const DeclaredConstants& d = model.declared();
  constexpr std::size_t kSlices = 20;
  std::vector<double> times(kSlices), sup_ratio(kSlices, 0.0);
  for (std::size_t s = 0; s < kSlices; ++s) {
    times[s] = spec.t_upper * static_cast<double>(s + 1) / static_cast<double>(kSlices);
  }
  FlowContractionEstimate est;
  Rng rng = make_stream(spec.seed, 49);
  struct Sample {
    std::size_t slice, regime;
    double u, v, ratio;
  };
  std::vector<Sample> samples;
  samples.reserve(spec.probes);
  for (std::size_t k = 0; k < spec.probes; ++k) {
    auto [u, v] = probe_pair(model, rng, k);
    if (u == v) continue;
    const std::size_t slice = k % kSlices;
    const std::size_t i = (k / kSlices) % model.regimes();
    const double t = times[slice];
    const double ratio = std::abs(flow(i, t, u) - flow(i, t, v)) / std::abs(u - v);
    sup_ratio[slice] = std::max(sup_ratio[slice], ratio);
    samples.push_back({slice, i, u, v, ratio});
  }
  // Envelope fit: steepest log-slope of the per-slice sup, anchored at t = 0
  // where the ratio is exactly one.
  double alpha = -std::numeric_limits<double>::infinity();
  std::vector<double> ts{0.0}, logs{0.0};
  for (std::size_t s = 0; s < kSlices; ++s) {
    if (sup_ratio[s] > 0.0) {
      ts.push_back(times[s]);
      logs.push_back(std::log(sup_ratio[s]));
    }
  }
  for (std::size_t a = 0; a < ts.size(); ++a) {
    for (std::size_t b = a + 1; b < ts.size(); ++b) {
      alpha = std::max(alpha, (logs[b] - logs[a]) / (ts[b] - ts[a]));
    }
  }
  est.alpha = alpha;
  double L = 0.0;
  for (std::size_t s = 0; s < ts.size(); ++s) L = std::max(L, std::exp(logs[s] - alpha * ts[s]));
  est.L = L;
  for (const Sample& s : samples) {
    const double t = times[s.slice];
    const double r = s.ratio / (d.L * std::exp(d.alpha * t));
    if (r > est.worst_declared_ratio) {
      est.worst_declared_ratio = r;
      est.witness_u = s.u;
      est.witness_v = s.v;
      est.witness_t = t;
      est.witness_regime = s.regime;
    }
  }
  return est;
}

double compute_beta(const ModelSpec& model, double y_star) {
  const double lower = model.lambda_lower();
  const double horizon = time_horizon(model);
  double beta = 0.0;
  for (std::size_t i = 0; i < model.regimes(); ++i) {
    auto f = [&](double t) {
      return std::exp(-lower * t) * std::abs(model.flow()(i, t, y_star) - y_star);
    };
    const double tail = f(horizon);
    if (!std::isfinite(tail) || tail > 1e-8) {
      std::ostringstream msg;
      msg << "compute_beta: integrand has not decayed at t=" << horizon << " in regime "
          << i << " (value " << tail << ")";
      throw NumericalError(msg.str());
    }
    beta = std::max(beta, adaptive_simpson(f, 0.0, horizon, {1e-11, 48}));
  }
  return beta;
}

double compute_gamma(const ModelSpec& model, double y_star, std::size_t probes) {
  const IfsKernel& J = model.jump();
  const auto rule = J.reference_rule();
  const double lo = window_lower(model), hi = window_upper(model);
  std::vector<double> jump_size(rule.size());
  for (std::size_t k = 0; k < rule.size(); ++k) {
    jump_size[k] = std::abs(J.map(rule[k].theta, y_star) - y_star);
  }
  double gamma = 0.0;
  for (std::size_t p = 0; p < probes; ++p) {
    const double y = lo + (hi - lo) * static_cast<double>(p) /
                              static_cast<double>(std::max<std::size_t>(1, probes - 1));
    double s = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
      s += rule[k].weight * jump_size[k] * J.density(rule[k].theta, y);
    }
    gamma = std::max(gamma, s);
  }
  return gamma;
}

IfsConstants estimate_ifs_constants(const ModelSpec& model, const ProbeSpec& spec) {
  const IfsKernel& J = model.jump();
  const auto rule = J.reference_rule();
  const double L_w_declared = model.declared().L_w;
  Rng rng = make_stream(spec.seed, 74);
  IfsConstants c;
  c.delta_p = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < spec.probes; ++k) {
    auto [u, v] = probe_pair(model, rng, k);
    const double d = std::abs(u - v);
    if (d == 0.0) continue;
    double lw = 0.0, lp = 0.0, overlap = 0.0;
    for (const ThetaNode& n : rule) {
      const double pu = J.density(n.theta, u), pv = J.density(n.theta, v);
      const double wu = J.map(n.theta, u), wv = J.map(n.theta, v);
      const double gap = std::abs(wu - wv);
      // Rounding slack on the images for the overlap test.
      const double slack = 1e-12 * (1.0 + std::abs(wu) + std::abs(wv));
      lw += n.weight * gap * pu;
      lp += n.weight * std::abs(pu - pv);
      if (gap <= L_w_declared * d + slack) overlap += n.weight * std::min(pu, pv);
    }
    c.L_w = std::max(c.L_w, lw / d);
    c.L_p = std::max(c.L_p, lp / d);
    c.delta_p = std::min(c.delta_p, overlap);
  }
  if (!std::isfinite(c.delta_p)) c.delta_p = 0.0;
  return c;
}

PiConstants estimate_pi_constants(const ModelSpec& model, const ProbeSpec& spec) {
  const SwitchingMatrix& pi = model.switching();
  const std::size_t n = pi.size();
  PiConstants c;
  c.delta_pi = std::numeric_limits<double>::infinity();
  auto visit = [&](double u, double v) {
    const double d = std::abs(u - v);
    for (std::size_t i = 0; i < n; ++i) {
      if (d > 0.0) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += std::abs(pi(i, j, u) - pi(i, j, v));
        c.L_pi = std::max(c.L_pi, s / d);
      }
      for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += std::min(pi(i, j, u), pi(k, j, v));
        c.delta_pi = std::min(c.delta_pi, s);
      }
    }
  };
  Rng rng = make_stream(spec.seed, 72);
  for (std::size_t k = 0; k < spec.probes; ++k) {
    auto [u, v] = probe_pair(model, rng, k);
    visit(u, v);
  }
  const double lo = window_lower(model), hi = window_upper(model);
  constexpr int kGrid = 101;
  for (int a = 0; a < kGrid; ++a) {
    for (int b = 0; b < kGrid; ++b) {
      visit(lo + (hi - lo) * a / (kGrid - 1), lo + (hi - lo) * b / (kGrid - 1));
    }
  }
  return c;
}

RegimeSplitReport check_regime_split(const ModelSpec& model, const ProbeSpec& spec) {
  const DeclaredConstants& d = model.declared();
  const Semiflow& flow = model.flow();
  RegimeSplitReport r;
  r.worst_excess = -std::numeric_limits<double>::infinity();
  Rng rng = make_stream(spec.seed, 71);
  const std::size_t n = model.regimes();
  for (std::size_t k = 0; k < spec.probes; ++k) {
    const double t = spec.t_upper * uniform_open(rng);
    const double y = uniform_in(rng, window_lower(model), window_upper(model));
    const double bound = d.phi(t) * d.ell(y);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double excess = std::abs(flow(i, t, y) - flow(j, t, y)) - bound;
        if (excess > r.worst_excess) {
          r.worst_excess = excess;
          r.witness_t = t;
          r.witness_y = y;
        }
      }
    }
  }
  if (n == 1) r.worst_excess = 0.0;
  const double lower = model.lambda_lower();
  const double horizon = time_horizon(model);
  auto f = [&](double t) { return std::exp(-lower * t) * d.phi(t); };
  r.phi_integral = adaptive_simpson(f, 0.0, horizon, {1e-11, 48});
  const bool integrable = std::isfinite(r.phi_integral) && f(horizon) < 1e-8;
  r.passed = r.worst_excess <= 1e-12 && integrable;
  return r;
}

double estimate_lambda_lipschitz(const ModelSpec& model, std::size_t probes) {
  const Intensity& lambda = model.intensity();
  const double lo = window_lower(model), hi = window_upper(model);
  const double step = (hi - lo) / static_cast<double>(std::max<std::size_t>(1, probes));
  double slope = 0.0;
  double prev = lambda(lo);
  for (std::size_t k = 1; k <= probes; ++k) {
    const double y = lo + step * static_cast<double>(k);
    const double cur = lambda(y);
    slope = std::max(slope, std::abs(cur - prev) / step);
    prev = cur;
  }
  return slope;
}

DriftConstants drift_constants(double lower, double upper, double L, double alpha,
                               double L_w, double beta, double gamma) {
  if (!(lower > alpha)) {
    std::ostringstream msg;
    msg << "drift_constants: lambda_lower (" << lower << ") must exceed alpha (" << alpha
        << ")";
    throw std::domain_error(msg.str());
  }
  DriftConstants c;
  c.a_tilde = L_w;
  c.b_tilde = gamma;
  c.beta = beta;
  c.gamma = gamma;
  c.a = upper * L_w * L / (lower - alpha);
  c.b = upper * (L_w * beta + gamma / lower);
  c.margin = lower - (L * L_w * upper + alpha);
  // a < 1 is the same inequality as margin > 0, divided by lower - alpha.
  if ((c.a < 1.0) != (c.margin > 0.0) &&
      std::abs(c.a - 1.0) > 1e-12 && std::abs(c.margin) > 1e-12) {
    throw std::logic_error("drift_constants: a < 1 disagrees with the rate condition");
  }
  return c;
}

DriftConstants drift_constants(const ModelSpec& model) {
  const DeclaredConstants& d = model.declared();
  return drift_constants(model.lambda_lower(), model.lambda_upper(), d.L, d.alpha, d.L_w,
                         d.beta, d.gamma);
}

DriftReport verify_drift_empirically(const ModelSpec& model, const DriftConstants& c,
                                     const std::vector<StatePoint>& probes,
                                     std::size_t replicas, std::uint64_t seed,
                                     unsigned threads) {
  if (replicas < 2) throw std::invalid_argument("verify_drift_empirically: need >= 2 replicas");
  const LyapunovV V(model.declared().y_star);
  DriftReport report;
  report.probes.resize(probes.size());
  parallel_for(probes.size(), threads, [&](std::size_t k) {
    Rng rng = make_stream(seed, k);
    const ExtendedState start{probes[k], 0.0};
    double mean = 0.0, m2 = 0.0;
    for (std::size_t r = 0; r < replicas; ++r) {
      const double v = V(step_chain(model, start, rng).x);
      const double delta = v - mean;
      mean += delta / static_cast<double>(r + 1);
      m2 += delta * (v - mean);
    }
    DriftProbe& p = report.probes[k];
    p.x = probes[k];
    p.v = V(probes[k]);
    p.pv = mean;
    p.standard_error = std::sqrt(m2 / static_cast<double>(replicas - 1) /
                                 static_cast<double>(replicas));
    p.bound = c.a * p.v + c.b;
    p.passed = p.pv <= p.bound + 3.0 * p.standard_error;
  });
  report.passed = std::all_of(report.probes.begin(), report.probes.end(),
                              [](const DriftProbe& p) { return p.passed; });
  return report;
}

std::vector<StatePoint> default_drift_probes(const ModelSpec& model) {
  std::vector<double> ys;
  if (model.domain().bounded()) {
    const double lo = model.domain().lower, hi = model.domain().upper;
    for (int k = 0; k < 5; ++k) ys.push_back(lo + (hi - lo) * k / 4.0);
  } else {
    ys = {0.0, 1.0, 2.0, 4.0, 8.0};
  }
  std::vector<StatePoint> out;
  for (std::size_t i = 0; i < model.regimes(); ++i) {
    for (double y : ys) out.push_back({y, i});
  }
  return out;
}

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
  }
  return "unknown";
}

std::vector<std::string> AssumptionReport::failed_ids() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (c.status == CheckStatus::fail) out.push_back(c.id);
  }
  return out;
}

const CheckResult& AssumptionReport::check(const std::string& id) const {
  for (const auto& c : checks) {
    if (c.id == id) return c;
  }
  throw std::out_of_range("AssumptionReport: no check '" + id + "'");
}

bool AssumptionReport::matches_designation() const {
  const auto failed = failed_ids();
  if (designated_failure.empty()) return failed.empty();
  return failed.size() == 1 && failed.front() == designated_failure;
}

namespace {

CheckStatus status_of(bool ok) { return ok ? CheckStatus::pass : CheckStatus::fail; }

// Estimated sup must not exceed the declared bound beyond the tolerance.
bool within_upper(double estimate, double declared, double tol) {
  return estimate <= declared * (1.0 + tol) + 1e-9;
}
// Estimated inf must not fall below the declared bound beyond the tolerance.
bool within_lower(double estimate, double declared, double tol) {
  return estimate >= declared * (1.0 - tol) - 1e-9;
}

std::string fmt(const char* label, double v) {
  std::ostringstream s;
  s << label << "=" << v;
  return s.str();
}

}  // namespace

AssumptionReport run_assumption_suite(const ModelSpec& model,
                                      const DiagnosticsOptions& options) {
  const DeclaredConstants& d = model.declared();
  const double tol = options.tolerance;
  const double lower = model.lambda_lower(), upper = model.lambda_upper();
  AssumptionReport rep;
  rep.model = model.name();
  rep.designated_failure = model.designated_failure();
  rep.declared = {{"L", d.L},           {"alpha", d.alpha},       {"L_w", d.L_w},
                  {"L_p", d.L_p},       {"delta_p", d.delta_p},   {"L_pi", d.L_pi},
                  {"delta_pi", d.delta_pi}, {"L_lambda", d.L_lambda}, {"y_star", d.y_star},
                  {"beta", d.beta},     {"gamma", d.gamma},
                  {"lambda_lower", lower}, {"lambda_upper", upper}};

  {
    // Intensity bracket on a dense probe grid.
    const double lo = model.domain().lower, hi = model.probe_upper();
    double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
    const std::size_t n = options.probes.probes;
    for (std::size_t k = 0; k <= n; ++k) {
      const double v = model.intensity()(lo + (hi - lo) * static_cast<double>(k) /
                                                  static_cast<double>(n));
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    const bool ok = lower > 0.0 && mn >= lower * (1.0 - 1e-12) && mx <= upper * (1.0 + 1e-12);
    rep.checks.push_back({"intensity_bounds", "intensity bounds", status_of(ok),
                          fmt("min", mn) + ", " + fmt("max", mx),
                          {{"min", mn}, {"max", mx}}});
  }

  {
    CheckResult c{"beta_finite", "finite beta(y*)", CheckStatus::fail, "", {}};
    try {
      const double beta = compute_beta(model, d.y_star);
      rep.estimates["beta"] = beta;
      c.values = {{"beta", beta}};
      c.status = status_of(std::isfinite(beta) && within_upper(beta, d.beta, tol));
      c.detail = fmt("beta", beta);
    } catch (const NumericalError& e) {
      c.detail = e.what();
    }
    rep.checks.push_back(std::move(c));
  }

  const FlowContractionEstimate flow = estimate_flow_contraction(model, options.probes);
  rep.estimates["L"] = flow.L;
  rep.estimates["alpha"] = flow.alpha;
  {
    const bool declared_holds = flow.worst_declared_ratio <= 1.0 + 1e-9;
    const bool rate_ok = d.alpha < lower && flow.alpha < lower;
    const bool consistent =
        flow.alpha <= d.alpha + tol * std::max(1.0, std::abs(d.alpha)) && flow.L <= d.L * (1.0 + tol);
    std::ostringstream detail;
    detail << "L=" << flow.L << ", alpha=" << flow.alpha << ", lambda_lower=" << lower;
    if (!declared_holds) {
      detail << "; declared envelope violated at u=" << flow.witness_u << ", v="
             << flow.witness_v << ", t=" << flow.witness_t << ", i=" << flow.witness_regime;
    }
    if (!rate_ok) detail << "; alpha is not below lambda_lower";
    rep.checks.push_back({"flow_envelope", "exponential flow envelope with alpha < lambda_lower",
                          status_of(declared_holds && rate_ok && consistent), detail.str(),
                          {{"L", flow.L},
                           {"alpha", flow.alpha},
                           {"worst_declared_ratio", flow.worst_declared_ratio}}});
  }

  {
    const RegimeSplitReport a = check_regime_split(model, options.probes);
    rep.estimates["phi_integral"] = a.phi_integral;
    std::ostringstream detail;
    detail << "worst excess=" << a.worst_excess << " (t=" << a.witness_t
           << ", y=" << a.witness_y << "), phi integral=" << a.phi_integral;
    rep.checks.push_back({"regime_split", "regime-split bound phi(t) L(y)", status_of(a.passed),
                          detail.str(),
                          {{"worst_excess", a.worst_excess}, {"phi_integral", a.phi_integral}}});
  }

  {
    const PiConstants pc = estimate_pi_constants(model, options.probes);
    rep.estimates["L_pi"] = pc.L_pi;
    rep.estimates["delta_pi"] = pc.delta_pi;
    const bool ok = pc.delta_pi > 0.0 && d.delta_pi > 0.0 &&
                    within_lower(pc.delta_pi, d.delta_pi, tol) &&
                    within_upper(pc.L_pi, d.L_pi, tol);
    rep.checks.push_back({"switching", "switching Lipschitz and overlap", status_of(ok),
                          fmt("L_pi", pc.L_pi) + ", " + fmt("delta_pi", pc.delta_pi),
                          {{"L_pi", pc.L_pi}, {"delta_pi", pc.delta_pi}}});
  }

  {
    const double gamma = compute_gamma(model, d.y_star, options.probes.probes);
    rep.estimates["gamma"] = gamma;
    rep.checks.push_back({"gamma_finite", "finite gamma(y*)",
                          status_of(std::isfinite(gamma) && within_upper(gamma, d.gamma, tol)),
                          fmt("gamma", gamma), {{"gamma", gamma}}});
  }

  bool ifs_ok = false;
  {
    const IfsConstants ic = estimate_ifs_constants(model, options.probes);
    rep.estimates["L_w"] = ic.L_w;
    rep.estimates["L_p"] = ic.L_p;
    rep.estimates["delta_p"] = ic.delta_p;
    ifs_ok = d.L_w > 0.0 && d.delta_p > 0.0 && ic.delta_p > 0.0 &&
             within_upper(ic.L_w, d.L_w, tol) && within_upper(ic.L_p, d.L_p, tol) &&
             within_lower(ic.delta_p, d.delta_p, tol);
    rep.checks.push_back({"ifs_contraction", "IFS contraction on average, density Lipschitz, overlap",
                          status_of(ifs_ok),
                          fmt("L_w", ic.L_w) + ", " + fmt("L_p", ic.L_p) + ", " +
                              fmt("delta_p", ic.delta_p),
                          {{"L_w", ic.L_w}, {"L_p", ic.L_p}, {"delta_p", ic.delta_p}}});
  }

  rep.rate_condition_margin = lower - (d.L * d.L_w * upper + d.alpha);
  {
    CheckResult c{"rate_condition", "rate condition L L_w lambda_upper + alpha < lambda_lower",
                  CheckStatus::skipped, "", {{"margin", rep.rate_condition_margin}}};
    const bool prerequisites = rep.check("flow_envelope").status == CheckStatus::pass && ifs_ok;
    if (!prerequisites) {
      c.detail = "skipped: the flow envelope or IFS constants failed their own checks";
    } else {
      c.status = status_of(rep.rate_condition_margin > 0.0);
      c.detail = fmt("margin", rep.rate_condition_margin);
      const DriftConstants dc = drift_constants(model);
      c.values["a"] = dc.a;
      c.values["b"] = dc.b;
    }
    rep.checks.push_back(std::move(c));
  }

  {
    const double slope = estimate_lambda_lipschitz(model, options.probes.probes);
    rep.estimates["L_lambda"] = slope;
    rep.checks.push_back({"lambda_lipschitz", "Lipschitz intensity",
                          status_of(std::isfinite(slope) && within_upper(slope, d.L_lambda, tol)),
                          fmt("slope", slope), {{"slope", slope}}});
  }
  return rep;
}

nlohmann::json to_json(const AssumptionReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"id", c.id},
                      {"title", c.title},
                      {"status", to_string(c.status)},
                      {"detail", c.detail},
                      {"values", c.values}});
  }
  return {{"model", r.model},
          {"checks", checks},
          {"rate_condition_margin", r.rate_condition_margin},
          {"estimated", r.estimates},
          {"declared", r.declared},
          {"designated_failure", r.designated_failure},
          {"failed", r.failed_ids()},
          {"matches_designation", r.matches_designation()}};
}

nlohmann::json to_json(const DriftConstants& c) {
  return {{"a", c.a},         {"b", c.b},         {"a_tilde", c.a_tilde},
          {"b_tilde", c.b_tilde}, {"beta", c.beta}, {"gamma", c.gamma},
          {"margin", c.margin}};
}

nlohmann::json to_json(const DriftReport& r) {
  nlohmann::json probes = nlohmann::json::array();
  for (const auto& p : r.probes) {
    probes.push_back({{"y", p.x.y},
                      {"i", p.x.regime},
                      {"V", p.v},
                      {"PV", p.pv},
                      {"standard_error", p.standard_error},
                      {"bound", p.bound},
                      {"passed", p.passed}});
  }
  return {{"probes", probes}, {"passed", r.passed}};
}

void write_drift_csv(std::ostream& out, const DriftReport& r) {
  out << "y,i,V,PV,se,bound,passed\n";
  for (const auto& p : r.probes) {
    out << format_double(p.x.y) << ',' << p.x.regime << ',' << format_double(p.v) << ','
        << format_double(p.pv) << ',' << format_double(p.standard_error) << ','
        << format_double(p.bound) << ',' << (p.passed ? 1 : 0) << '\n';
  }
}

}  // namespace pdmp

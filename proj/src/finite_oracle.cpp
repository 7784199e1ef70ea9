#include "pdmp/finite_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "pdmp/error.hpp"
#include "pdmp/parallel.hpp"
#include "pdmp/transforms.hpp"

namespace pdmp {

std::size_t GridModel::project(double value, bool* outside) const noexcept {
  const double k = std::round((value - lower) / h);
  const double top = static_cast<double>(nodes - 1);
  if (outside) *outside = !(k >= 0.0 && k <= top);
  if (!(k >= 0.0)) return 0;
  if (k > top) return nodes - 1;
  return static_cast<std::size_t>(k);
}

namespace {

struct Mass {
  std::size_t node;
  double mass;
};

// Law of the pre-jump node from state (u, i), aggregated per node. The time
// axis is cut into cells centred at k dt with exact survival differences as
// weights; the tail beyond t_max goes to the last cell.
std::vector<Mass> pre_jump_law(const ModelSpec& model, const GridModel& g, double u,
                               std::size_t i, double dt, double t_max, double& leak) {
  const CumulativeHazard& hazard = model.hazard();
  const Semiflow& flow = model.flow();
  const StatePoint x{u, i};
  const auto cells = static_cast<std::size_t>(std::llround(t_max / dt));
  std::vector<double> per_node(g.nodes, 0.0);
  double survival_a = 1.0;
  for (std::size_t k = 0; k <= cells; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double survival_b =
        k == cells ? 0.0 : std::exp(-hazard(x, (static_cast<double>(k) + 0.5) * dt));
    const bool last = k == cells || survival_b < 1e-17;
    const double mass = last ? survival_a : survival_a - survival_b;
    bool outside = false;
    const std::size_t n = g.project(flow(i, t, u), &outside);
    per_node[n] += mass;
    if (outside) leak += mass;
    if (last) break;
    survival_a = survival_b;
  }
  std::vector<Mass> out;
  for (std::size_t n = 0; n < g.nodes; ++n) {
    if (per_node[n] > 0.0) out.push_back({n, per_node[n]});
  }
  return out;
}

// Jump-plus-switch law from pre-jump state (u, i) as (state index, mass).
std::vector<Mass> post_jump_law(const ModelSpec& model, const GridModel& g, double u,
                                std::size_t i, double& leak) {
  const IfsKernel& jump = model.jump();
  const SwitchingMatrix& pi = model.switching();
  const double top = g.lower + g.h * static_cast<double>(g.nodes - 1);
  std::vector<Mass> out;
  for (const ThetaNode& node : jump.discretize(u, g.h, top - u + g.h)) {
    if (node.weight <= 0.0) continue;
    const double w = jump.map(node.theta, u);
    bool outside = false;
    const std::size_t n = g.project(w, &outside);
    if (outside) leak += node.weight;
    for (std::size_t j = 0; j < g.regimes; ++j) {
      const double p = pi(i, j, w);
      if (p > 0.0) out.push_back({g.index(n, j), node.weight * p});
    }
  }
  return out;
}

void check_rows(const Eigen::MatrixXd& m, double lo, double hi, const char* name) {
  const Eigen::VectorXd sums = m.rowwise().sum();
  for (Eigen::Index r = 0; r < sums.size(); ++r) {
    if (!(sums[r] >= lo && sums[r] <= hi)) {
      std::ostringstream msg;
      msg << "build_grid_model: row " << r << " of " << name << " sums to " << sums[r]
          << ", outside [" << lo << ", " << hi << "]";
      throw NumericalError(msg.str());
    }
  }
}

}  // namespace

GridModel build_grid_model(const ModelSpec& model, const GridOptions& options) {
  if (options.nodes < 2) throw std::invalid_argument("build_grid_model: need M >= 2");
  if (!(options.dt > 0.0)) throw std::invalid_argument("build_grid_model: dt must be > 0");
  GridModel g;
  g.nodes = options.nodes;
  g.regimes = model.regimes();
  g.lower = model.domain().lower;
  const double top = std::min(options.y_max, model.domain().upper);
  if (!(top > g.lower)) throw std::invalid_argument("build_grid_model: empty y-range");
  g.h = (top - g.lower) / static_cast<double>(g.nodes - 1);
  g.t_max = options.t_max > 0.0 ? options.t_max : time_horizon(model);
  const double p_t_max = options.p_hat_t_max.value_or(g.t_max);

  const std::size_t n = g.size();
  const auto N = static_cast<Eigen::Index>(n);
  g.G = Eigen::MatrixXd::Zero(N, N);
  g.GT = Eigen::MatrixXd::Zero(N, N);
  g.W = Eigen::MatrixXd::Zero(N, N);
  g.P = Eigen::MatrixXd::Zero(N, N);
  g.leakage = Eigen::VectorXd::Zero(N);
  const Intensity& lambda = model.intensity();

  parallel_for(n, options.threads, [&](std::size_t s) {
    const auto r = static_cast<Eigen::Index>(s);
    const double u = g.y(s);
    const std::size_t i = g.regime(s);
    double flow_leak = 0.0;
    for (const Mass& m : pre_jump_law(model, g, u, i, options.dt, g.t_max, flow_leak)) {
      const auto c = static_cast<Eigen::Index>(g.index(m.node, i));
      g.G(r, c) += m.mass;
      g.GT(r, c) += m.mass / lambda(g.y(g.index(m.node, i)));
    }
    double jump_leak = 0.0;
    for (const Mass& m : post_jump_law(model, g, u, i, jump_leak)) {
      g.W(r, static_cast<Eigen::Index>(m.node)) += m.mass;
    }
    // P straight from the one-step law: pre-jump point, then jump and switch.
    double p_leak = 0.0;
    for (const Mass& pre : pre_jump_law(model, g, u, i, options.dt, p_t_max, p_leak)) {
      double leak = 0.0;
      for (const Mass& post : post_jump_law(model, g, g.y(pre.node), i, leak)) {
        g.P(r, static_cast<Eigen::Index>(post.node)) += pre.mass * post.mass;
      }
      p_leak += pre.mass * leak;
    }
    g.leakage[r] = p_leak;
  });

  Eigen::VectorXd rate(N);
  for (std::size_t s = 0; s < n; ++s) rate[static_cast<Eigen::Index>(s)] = lambda(g.y(s));
  g.WT = rate.asDiagonal() * g.W;

  const double lo = 1.0 - options.row_tol, hi = 1.0 + options.row_tol;
  check_rows(g.P, lo, hi, "P");
  check_rows(g.G, lo, hi, "G");
  check_rows(g.W, lo, hi, "W");
  check_rows(g.GT, (1.0 - options.row_tol) / lambda.upper(),
             (1.0 + options.row_tol) / lambda.lower(), "G~");
  check_rows(g.WT, lambda.lower() * lo, lambda.upper() * hi, "W~");

  g.stationary =
      power_iteration(g.P, Eigen::RowVectorXd::Constant(N, 1.0 / static_cast<double>(n)))
          .vector;
  g.stationary_leakage = g.stationary.dot(g.leakage.transpose());
  if (g.stationary_leakage > options.mass_tol) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto contribution = [&](std::size_t s) {
      const auto r = static_cast<Eigen::Index>(s);
      return g.stationary[r] * g.leakage[r];
    };
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return contribution(a) > contribution(b); });
    std::ostringstream msg;
    msg << "build_grid_model: stationary mass leaving [" << g.lower << ", " << top
        << "] is " << g.stationary_leakage << " > " << options.mass_tol
        << "; worst rows:";
    for (std::size_t k = 0; k < std::min<std::size_t>(5, n); ++k) {
      const std::size_t s = order[k];
      msg << " (row " << s << ": y=" << g.y(s) << ", i=" << g.regime(s)
          << ", leak=" << g.leakage[static_cast<Eigen::Index>(s)] << ")";
    }
    throw GridLeakageError(msg.str());
  }
  return g;
}

FactorizationReport check_factorization(const GridModel& g, double tol) {
  FactorizationReport r;
  r.tolerance = tol;
  r.residual_g_w = (g.G * g.W - g.P).cwiseAbs().maxCoeff();
  r.residual_gt_wt = (g.GT * g.WT - g.P).cwiseAbs().maxCoeff();
  r.passed = r.residual_g_w <= tol && r.residual_gt_wt <= tol;
  return r;
}

PowerResult power_iteration(const Eigen::MatrixXd& matrix, const Eigen::RowVectorXd& v0,
                            double tol, std::size_t max_iter) {
  if (matrix.rows() != matrix.cols() || v0.size() != matrix.rows()) {
    throw std::invalid_argument("power_iteration: dimension mismatch");
  }
  PowerResult r;
  r.vector = v0 / v0.sum();
  for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
    Eigen::RowVectorXd next = r.vector * matrix;
    next /= next.sum();
    r.residual = (next - r.vector).lpNorm<1>();
    r.vector = std::move(next);
    if (r.residual <= tol) return r;
  }
  std::ostringstream msg;
  msg << "power_iteration: no convergence after " << max_iter
      << " iterations (residual " << r.residual << ", tol " << tol << ")";
  throw NumericalError(msg.str());
}

StationaryResult stationary_probe(const Eigen::MatrixXd& matrix, double tol,
                                  std::size_t max_iter) {
  const Eigen::Index n = matrix.rows();
  StationaryResult r;
  r.first = power_iteration(matrix, Eigen::RowVectorXd::Unit(n, 0), tol, max_iter);
  r.second = power_iteration(matrix, Eigen::RowVectorXd::Unit(n, n - 1), tol, max_iter);
  r.start_gap = (r.first.vector - r.second.vector).lpNorm<1>();
  r.unique = r.start_gap <= std::max(1e-8, 1e3 * tol);
  return r;
}

OracleCorrespondence oracle_correspondence(const GridModel& g, double tol) {
  OracleCorrespondence r;
  r.tolerance = tol;
  r.phi = g.stationary;
  const Eigen::RowVectorXd psi_raw = r.phi * g.GT;
  r.g_normalizer = psi_raw.sum();
  r.psi = psi_raw / r.g_normalizer;
  const Eigen::RowVectorXd back_raw = r.psi * g.WT;
  r.w_normalizer = back_raw.sum();
  const Eigen::RowVectorXd back = back_raw / r.w_normalizer;
  const Eigen::RowVectorXd again_raw = back_raw * g.GT;
  r.residual_psi_fixed = (again_raw / again_raw.sum() - r.psi).lpNorm<1>();
  r.residual_phi_back = (back - r.phi).lpNorm<1>();
  r.normalizer_product = r.g_normalizer * r.w_normalizer;
  r.passed = r.residual_psi_fixed <= tol && r.residual_phi_back <= tol;
  return r;
}

WeightedMeasure grid_measure(const GridModel& g, const Eigen::RowVectorXd& v) {
  WeightedMeasure mu;
  mu.reserve(g.size());
  for (std::size_t s = 0; s < g.size(); ++s) {
    const double w = v[static_cast<Eigen::Index>(s)];
    if (w > 0.0) mu.add({g.y(s), g.regime(s)}, w);
  }
  return mu;
}

double grid_mean(const GridModel& g, const Eigen::RowVectorXd& v) {
  double m = 0.0;
  for (std::size_t s = 0; s < g.size(); ++s) m += v[static_cast<Eigen::Index>(s)] * g.y(s);
  return m;
}

nlohmann::json to_json(const FactorizationReport& r) {
  return {{"residual_g_w", r.residual_g_w},
          {"residual_gtilde_wtilde", r.residual_gt_wt},
          {"tolerance", r.tolerance},
          {"passed", r.passed}};
}

nlohmann::json to_json(const OracleCorrespondence& r) {
  return {{"g_normalizer", r.g_normalizer},
          {"w_normalizer", r.w_normalizer},
          {"normalizer_product", r.normalizer_product},
          {"residual_psi_fixed_point", r.residual_psi_fixed},
          {"residual_phi_round_trip", r.residual_phi_back},
          {"tolerance", r.tolerance},
          {"passed", r.passed}};
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  out << "state";
  for (Eigen::Index c = 0; c < m.cols(); ++c) out << ",s" << c;
  out << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << r;
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << ',' << format_double(m(r, c));
    out << '\n';
  }
}

void write_grid_vector_csv(std::ostream& out, const GridModel& g,
                           const Eigen::RowVectorXd& v) {
  out << "y,i,mass\n";
  for (std::size_t s = 0; s < g.size(); ++s) {
    out << format_double(g.y(s)) << ',' << g.regime(s) << ','
        << format_double(v[static_cast<Eigen::Index>(s)]) << '\n';
  }
}

}  // namespace pdmp

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pdmp/model.hpp"
#include "pdmp/state.hpp"

namespace pdmp {

struct GridOptions {
  std::size_t nodes = 200;
  /// Upper end of the y-grid; capped at the domain's upper bound.
  double y_max = 15.0;
  double dt = 0.01;
  /// Time truncation; 0 selects the survival-tail horizon of the transforms.
  double t_max = 0.0;
  /// Deliberately different truncation for P only (negative control).
  std::optional<double> p_hat_t_max;
  double row_tol = 1e-8;
  double mass_tol = 1e-4;
  unsigned threads = 1;
};

/// Finite discretization of X = {y_0 < ... < y_{M-1}} x I with kernels as
/// dense matrices indexed by state s = regime * M + node. Images are projected
/// to the nearest node; images further than h/2 outside the grid count as
/// leakage of their row.
struct GridModel {
  std::size_t nodes = 0;
  std::size_t regimes = 0;
  double lower = 0.0;
  double h = 0.0;
  double t_max = 0.0;
  Eigen::MatrixXd P, G, W, GT, WT;
  /// Per-row mass of P whose images left the grid.
  Eigen::VectorXd leakage;
  /// Fixed point of P computed during the build for the leakage check.
  Eigen::RowVectorXd stationary;
  double stationary_leakage = 0.0;

  std::size_t size() const noexcept { return nodes * regimes; }
  std::size_t index(std::size_t node, std::size_t regime) const noexcept {
    return regime * nodes + node;
  }
  double y(std::size_t state) const noexcept {
    return lower + h * static_cast<double>(state % nodes);
  }
  std::size_t regime(std::size_t state) const noexcept { return state / nodes; }
  /// Nearest node; `outside` is set when y lies more than h/2 off the grid.
  std::size_t project(double y, bool* outside = nullptr) const noexcept;
};

/// Assembles all five matrices and checks stochasticity and leakage.
/// Throws GridLeakageError naming the worst rows when the stationary-weighted
/// leakage exceeds mass_tol, NumericalError when a row sum is off.
GridModel build_grid_model(const ModelSpec& model, const GridOptions& options = {});

struct FactorizationReport {
  double residual_g_w = 0.0;      // max |(G W - P)_{rs}|
  double residual_gt_wt = 0.0;    // max |(G~ W~ - P)_{rs}|
  double tolerance = 0.0;
  bool passed = false;
};

FactorizationReport check_factorization(const GridModel& grid, double tol);

struct PowerResult {
  Eigen::RowVectorXd vector;
  double residual = 0.0;  // || v P - v ||_1
  std::size_t iterations = 0;
};

/// Fixed point of a row-stochastic matrix from start v0. Throws
/// NumericalError with the residual after max_iter iterations.
PowerResult power_iteration(const Eigen::MatrixXd& matrix, const Eigen::RowVectorXd& v0,
                            double tol = 1e-12, std::size_t max_iter = 200000);

struct StationaryResult {
  PowerResult first;
  PowerResult second;
  /// || first - second ||_1 between runs from two different starts.
  double start_gap = 0.0;
  bool unique = false;
};

/// Power iteration from the first and the last basis vector.
StationaryResult stationary_probe(const Eigen::MatrixXd& matrix, double tol = 1e-12,
                                  std::size_t max_iter = 200000);

struct OracleCorrespondence {
  Eigen::RowVectorXd phi;
  Eigen::RowVectorXd psi;
  double g_normalizer = 0.0;  // phi G~ (X)
  double w_normalizer = 0.0;  // psi W~ (X)
  double normalizer_product = 0.0;
  double residual_psi_fixed = 0.0;  // || psi W~ G~ / mass - psi ||_1
  double residual_phi_back = 0.0;   // || psi W~ / mass - phi ||_1
  double tolerance = 0.0;
  bool passed = false;
};

OracleCorrespondence oracle_correspondence(const GridModel& grid, double tol);

/// Atoms at the grid nodes carrying the entries of v.
WeightedMeasure grid_measure(const GridModel& grid, const Eigen::RowVectorXd& v);
/// sum_s v_s y(s)
double grid_mean(const GridModel& grid, const Eigen::RowVectorXd& v);

nlohmann::json to_json(const FactorizationReport& report);
nlohmann::json to_json(const OracleCorrespondence& report);

/// Header "state,s0,s1,..."; one row per state.
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);
/// Header "y,i,mass".
void write_grid_vector_csv(std::ostream& out, const GridModel& grid,
                           const Eigen::RowVectorXd& v);

}  // namespace pdmp

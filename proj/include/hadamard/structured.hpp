#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hadamard/linear_solvers.hpp"
#include "hadamard/model.hpp"

namespace hadamard {

using GridCoord = std::array<int, 3>;

/// Lattice extents; 2-D grids use d3 = 1.
struct GridDims {
  int d1 = 1;
  int d2 = 1;
  int d3 = 1;
  long volume() const { return static_cast<long>(d1) * d2 * d3; }
};

/// Active sites of a regular lattice with nearest-neighbour adjacency
/// (4 neighbours in 2-D, 6 in 3-D). Sites are stored in raster order,
/// lexicographic in (i, j, k). With torus = true every axis longer than
/// two wraps around.
class GridGraph {
 public:
  static GridGraph full(GridDims dims, bool torus = false);

  /// Active subset; coordinates must be distinct, inside dims and in raster order.
  static GridGraph from_sites(GridDims dims, std::vector<GridCoord> sites, bool torus = false);

  const GridDims& dims() const { return dims_; }
  bool torus() const { return torus_; }
  Index size() const { return static_cast<Index>(sites_.size()); }
  const GridCoord& coord(Index s) const { return sites_[s]; }
  const std::vector<Index>& neighbors(Index s) const { return neighbors_[s]; }
  Index neighbor_count(Index s) const { return static_cast<Index>(neighbors_[s].size()); }

  /// Position of the active site at c, or -1 when c is inactive or outside the grid.
  Index site_at(const GridCoord& c) const;

  long lattice_index(const GridCoord& c) const {
    return (static_cast<long>(c[0]) * dims_.d2 + c[1]) * dims_.d3 + c[2];
  }

 private:
  GridGraph() = default;
  void build();

  GridDims dims_;
  bool torus_ = false;
  std::vector<GridCoord> sites_;
  std::vector<long> lookup_;  // lattice index -> site position or -1
  std::vector<std::vector<Index>> neighbors_;
};

/// CAR covariance Sigma = tau^2 (I - rho G)^{-1} with g_ij = 1/n_i.
struct CarSpec {
  double rho = 0.95;
  double tau_sq = 1.0;

  /// Throws ArgumentError unless |rho| < 1 and tau_sq > 0.
  void validate() const;
};

/// z ~ N(theta, I) on the active sites of a grid, theta = u o v.
class SignalProblem {
 public:
  SignalProblem(VectorXd z, GridGraph graph, CarSpec car);

  const VectorXd& z() const { return z_; }
  const GridGraph& graph() const { return graph_; }
  const CarSpec& car() const { return car_; }
  Index p() const { return z_.size(); }

 private:
  VectorXd z_;
  GridGraph graph_;
  CarSpec car_;
};

/// (G w)_i: mean of w over the neighbours of i, 0 for isolated sites.
VectorXd neighbor_mean(const GridGraph& graph, const VectorXd& w);

/// Sigma^{-1} w = (w - rho G w) / tau^2 without forming any matrix.
VectorXd car_precision_apply(const GridGraph& graph, const CarSpec& car, const VectorXd& w);

/// Dense (I - rho G) / tau^2. Not symmetric unless every site has the same
/// neighbour count.
MatrixXd car_precision_dense(const GridGraph& graph, const CarSpec& car);

/// max(n_i, 1) per site.
VectorXd car_site_weights(const GridGraph& graph);

/// Symmetric (N - rho A) / tau^2 with N = diag(max(n_i, 1)) and A the
/// adjacency matrix; equals diag(N) times car_precision_dense.
MatrixXd car_weighted_precision_dense(const GridGraph& graph, const CarSpec& car);

struct ShppState {
  VectorXd u;
  VectorXd v;
  VectorXd theta() const { return u.cwiseProduct(v); }
};

/// u = |z|, v = sign(z) with v = 1 where z = 0.
ShppState shpp_default_init(const VectorXd& z);

/// g(u, v) = |z - u o v|^2 + u^T Sigma^{-1} u + v^T Sigma^{-1} v.
double shpp_energy(const SignalProblem& problem, const ShppState& state);

/// sum_i w_i (z_i - u_i v_i)^2 + (u^T (N - rho A) u + v^T (N - rho A) v) / tau^2
/// with w = car_site_weights. Every site update is an exact coordinate
/// minimizer of this energy; it is a positive multiple of shpp_energy when
/// all sites have the same neighbour count.
double shpp_weighted_energy(const SignalProblem& problem, const ShppState& state);

/// One Gauss-Seidel pass in raster order: u_i, then v_i, for each site.
ShppState shpp_site_sweep(const SignalProblem& problem, ShppState state);

struct ShppConfig {
  double rel_tol = 1e-10;
  int max_sweeps = 10000;
  /// Log shpp_weighted_energy after every single-site update (O(p) each).
  bool record_updates = false;
};

inline constexpr double kShppDenominatorFloor = 1e-300;

/// Sweeps until |theta_new - theta_old|^2 / max(|theta_old|^2, 1e-300) < rel_tol.
/// objective holds shpp_energy per sweep, surrogate shpp_weighted_energy.
SolverTrace solve_shpp(const SignalProblem& problem, const std::optional<ShppState>& init,
                       const ShppConfig& config = {});

inline constexpr Index kDenseShppMaxP = 5000;

/// Alternating ridge updates u = (Q o v v^T + P_u)^{-1}(l o v) and the same
/// for v, with P = Sigma^{-1}. Throws ArgumentError for non-SPD covariances
/// or p above kDenseShppMaxP.
SolverTrace solve_shpp_dense(const RegressionProblem& problem, const MatrixXd& sigma_u,
                             const MatrixXd& sigma_v, const FactorState& init,
                             ConvergenceConfig conv);

/// Same iteration for a structured PenaltySpec (precisions already formed).
SolverTrace solve_shpp_dense(const RegressionProblem& problem, const PenaltySpec& spec,
                             const FactorState& init, ConvergenceConfig conv);

/// Moment plug-in for (rho, tau^2): tau^2 + 1 matches the sample variance
/// of z and rho the correlation between z_i and its neighbour mean, clamped
/// to [-0.99, 0.99] and tau^2 >= 1e-3. A heuristic, not a likelihood fit.
CarSpec estimate_car_moments(const GridGraph& graph, const VectorXd& z);

inline constexpr double kSignalZeroThreshold = 1e-6;

/// Fraction of sites with |theta_i| < threshold.
double sparsity_fraction(const VectorXd& theta, double threshold = kSignalZeroThreshold);

/// Fraction of nonzero sites having at least one nonzero neighbour; 1 when
/// there are no nonzero sites.
double contiguity_score(const GridGraph& graph, const VectorXd& theta,
                        double threshold = kSignalZeroThreshold);

/// Axis-aligned box of constant signal.
struct SignalBlock {
  GridCoord origin{0, 0, 0};
  GridCoord extent{1, 1, 1};
  double height = 1.0;
};

struct GridExperimentReport {
  int sweeps = 0;
  bool converged = false;
  double sparsity = 0.0;
  double precision = 0.0;  // of the estimated support against theta_true != 0
  double recall = 0.0;
  double contiguity = 0.0;
  int lasso_sweeps = 0;
  double lasso_sparsity = 0.0;
  double lasso_contiguity = 0.0;
};

struct GridExperimentResult {
  VectorXd z;
  VectorXd theta_true;
  VectorXd theta_hat;
  VectorXd theta_lasso;  // rho = 0 with the same tau^2, i.e. lambda = 2 / tau^2
  GridExperimentReport report;
  SolverTrace trace;
};

/// Simulates z = theta_true + noise_sd * N(0, I) on the graph and runs
/// solve_shpp with the given CAR parameters and with rho = 0 on the same z.
GridExperimentResult synthetic_grid_experiment(const GridGraph& graph,
                                               const std::vector<SignalBlock>& blocks,
                                               const CarSpec& car, std::uint64_t seed,
                                               const ShppConfig& config = {},
                                               double noise_sd = 1.0);

std::string grid_report_json(const GridExperimentReport& report);

struct GridSignal {
  GridGraph graph;
  VectorXd values;
};

/// Rows "i,j,k,value" (an optional non-numeric header line is skipped).
/// Dims are the bounding box of the listed sites; rows may come in any order.
GridSignal read_grid_csv(const std::string& path, bool torus = false);

void write_grid_csv(const std::string& path, const GridGraph& graph, const VectorXd& values);

enum class SlicePalette {
  /// positive green, negative blue, |value| < 1e-6 pink
  estimate,
  /// green / blue beyond +-1.96, light green / light blue beyond +-1.2816
  scores,
};

/// SVG heatmap of the slice k = slice of a grid signal; inactive cells are left blank.
std::string slice_svg(const GridGraph& graph, const VectorXd& values, int slice,
                      SlicePalette palette, int cell_px = 12);

}  // namespace hadamard

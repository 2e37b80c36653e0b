#include "hadamard/structured.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "hadamard/errors.hpp"
#include "hadamard/io.hpp"
#include "hadamard/random.hpp"
#include "json.hpp"
#include "solver_detail.hpp"

namespace hadamard {

namespace {

constexpr Index kPdCheckMaxSites = 500;

bool in_range(const GridDims& d, const GridCoord& c) {
  return c[0] >= 0 && c[0] < d.d1 && c[1] >= 0 && c[1] < d.d2 && c[2] >= 0 && c[2] < d.d3;
}

double neighbor_sum(const GridGraph& graph, const VectorXd& w, Index s) {
  double total = 0.0;
  for (Index t : graph.neighbors(s)) total += w[t];
  return total;
}

double neighbor_average(const GridGraph& graph, const VectorXd& w, Index s) {
  const Index n = graph.neighbor_count(s);
  return n == 0 ? 0.0 : neighbor_sum(graph, w, s) / static_cast<double>(n);
}

// (N - rho A) w with N = diag(max(n_i, 1)).
VectorXd weighted_precision_apply(const GridGraph& graph, double rho, const VectorXd& w) {
  VectorXd out(w.size());
  for (Index s = 0; s < w.size(); ++s) {
    const double weight = static_cast<double>(std::max<Index>(graph.neighbor_count(s), 1));
    out[s] = weight * w[s] - rho * neighbor_sum(graph, w, s);
  }
  return out;
}

void check_state(const ShppState& state, Index p) {
  if (state.u.size() != p || state.v.size() != p) {
    throw ArgumentError("SHPP state has " + std::to_string(state.u.size()) + "/" +
                        std::to_string(state.v.size()) + " entries, expected " +
                        std::to_string(p));
  }
}

// Raster-order Gauss-Seidel pass; on_update runs after every single-site update.
template <typename OnUpdate>
void sweep_in_place(const SignalProblem& problem, ShppState& state, OnUpdate on_update) {
  const double inv_tau = 1.0 / problem.car().tau_sq;
  const double rho = problem.car().rho;
  const GridGraph& graph = problem.graph();
  const VectorXd& z = problem.z();
  for (Index i = 0; i < z.size(); ++i) {
    const double ubar = neighbor_average(graph, state.u, i);
    state.u[i] = (z[i] * state.v[i] + rho * ubar * inv_tau) / (state.v[i] * state.v[i] + inv_tau);
    on_update();
    const double vbar = neighbor_average(graph, state.v, i);
    state.v[i] = (z[i] * state.u[i] + rho * vbar * inv_tau) / (state.u[i] * state.u[i] + inv_tau);
    on_update();
  }
}

std::string hex_color(double intensity, int r, int g, int b) {
  // Blends white toward (r, g, b) by intensity in [0, 1].
  auto mix = [&](int c) { return static_cast<int>(std::lround(255 - (255 - c) * intensity)); };
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", mix(r), mix(g), mix(b));
  return buf;
}

std::string cell_color(double x, SlicePalette palette) {
  if (palette == SlicePalette::estimate) {
    if (std::abs(x) < kSignalZeroThreshold) return "#f4b6c8";
    return x > 0.0 ? "#1a9850" : "#2c7bb6";
  }
  if (x >= 1.959963984540054) return "#1a9850";
  if (x <= -1.959963984540054) return "#2c7bb6";
  if (x >= 1.2815515655446004) return hex_color(0.45, 0x1a, 0x98, 0x50);
  if (x <= -1.2815515655446004) return hex_color(0.45, 0x2c, 0x7b, 0xb6);
  return "#ffffff";
}

}  // namespace

GridGraph GridGraph::full(GridDims dims, bool torus) {
  if (dims.d1 < 1 || dims.d2 < 1 || dims.d3 < 1) {
    throw ArgumentError("grid dimensions must be positive");
  }
  GridGraph g;
  g.dims_ = dims;
  g.torus_ = torus;
  g.sites_.reserve(static_cast<std::size_t>(dims.volume()));
  for (int i = 0; i < dims.d1; ++i)
    for (int j = 0; j < dims.d2; ++j)
      for (int k = 0; k < dims.d3; ++k) g.sites_.push_back({i, j, k});
  g.build();
  return g;
}

GridGraph GridGraph::from_sites(GridDims dims, std::vector<GridCoord> sites, bool torus) {
  if (dims.d1 < 1 || dims.d2 < 1 || dims.d3 < 1) {
    throw ArgumentError("grid dimensions must be positive");
  }
  GridGraph g;
  g.dims_ = dims;
  g.torus_ = torus;
  for (std::size_t s = 0; s < sites.size(); ++s) {
    if (!in_range(dims, sites[s])) {
      throw ArgumentError("site " + std::to_string(s) + " lies outside the grid");
    }
    if (s > 0 && !(g.lattice_index(sites[s - 1]) < g.lattice_index(sites[s]))) {
      throw ArgumentError("sites must be distinct and in raster order");
    }
  }
  g.sites_ = std::move(sites);
  g.build();
  return g;
}

void GridGraph::build() {
  lookup_.assign(static_cast<std::size_t>(dims_.volume()), -1);
  for (std::size_t s = 0; s < sites_.size(); ++s) {
    lookup_[static_cast<std::size_t>(lattice_index(sites_[s]))] = static_cast<long>(s);
  }
  const int extent[3] = {dims_.d1, dims_.d2, dims_.d3};
  neighbors_.assign(sites_.size(), {});
  for (std::size_t s = 0; s < sites_.size(); ++s) {
    auto& list = neighbors_[s];
    for (int axis = 0; axis < 3; ++axis) {
      if (extent[axis] == 1) continue;
      for (int step : {-1, 1}) {
        GridCoord c = sites_[s];
        c[axis] += step;
        if (c[axis] < 0 || c[axis] >= extent[axis]) {
          if (!torus_ || extent[axis] <= 2) continue;
          c[axis] = (c[axis] + extent[axis]) % extent[axis];
        }
        const Index t = site_at(c);
        if (t >= 0) list.push_back(t);
      }
    }
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

Index GridGraph::site_at(const GridCoord& c) const {
  if (!in_range(dims_, c)) return -1;
  return lookup_[static_cast<std::size_t>(lattice_index(c))];
}

void CarSpec::validate() const {
  if (!(std::abs(rho) < 1.0)) {
    throw ArgumentError("CAR rho must satisfy |rho| < 1");
  }
  if (!(tau_sq > 0.0) || !std::isfinite(tau_sq)) {
    throw ArgumentError("CAR tau^2 must be positive and finite");
  }
}

SignalProblem::SignalProblem(VectorXd z, GridGraph graph, CarSpec car)
    : z_(std::move(z)), graph_(std::move(graph)), car_(car) {
  car_.validate();
  if (z_.size() != graph_.size()) {
    throw ArgumentError("signal has " + std::to_string(z_.size()) + " entries, graph has " +
                        std::to_string(graph_.size()) + " active sites");
  }
  if (!z_.allFinite()) {
    throw ArgumentError("signal contains non-finite values");
  }
  if (graph_.size() <= kPdCheckMaxSites) {
    Eigen::LLT<MatrixXd> llt(car_weighted_precision_dense(graph_, car_));
    if (llt.info() != Eigen::Success) {
      throw NumericalError("CAR precision is not positive definite");
    }
  }
}

VectorXd neighbor_mean(const GridGraph& graph, const VectorXd& w) {
  if (w.size() != graph.size()) {
    throw ArgumentError("vector length does not match the number of active sites");
  }
  VectorXd out(w.size());
  for (Index s = 0; s < w.size(); ++s) out[s] = neighbor_average(graph, w, s);
  return out;
}

VectorXd car_precision_apply(const GridGraph& graph, const CarSpec& car, const VectorXd& w) {
  car.validate();
  return (w - car.rho * neighbor_mean(graph, w)) / car.tau_sq;
}

MatrixXd car_precision_dense(const GridGraph& graph, const CarSpec& car) {
  car.validate();
  const Index p = graph.size();
  MatrixXd P = MatrixXd::Identity(p, p);
  for (Index s = 0; s < p; ++s) {
    const double n = static_cast<double>(graph.neighbor_count(s));
    for (Index t : graph.neighbors(s)) P(s, t) -= car.rho / n;
  }
  return P / car.tau_sq;
}

VectorXd car_site_weights(const GridGraph& graph) {
  VectorXd w(graph.size());
  for (Index s = 0; s < w.size(); ++s) {
    w[s] = static_cast<double>(std::max<Index>(graph.neighbor_count(s), 1));
  }
  return w;
}

MatrixXd car_weighted_precision_dense(const GridGraph& graph, const CarSpec& car) {
  car.validate();
  const Index p = graph.size();
  MatrixXd P = MatrixXd(car_site_weights(graph).asDiagonal());
  for (Index s = 0; s < p; ++s) {
    for (Index t : graph.neighbors(s)) P(s, t) -= car.rho;
  }
  return P / car.tau_sq;
}

ShppState shpp_default_init(const VectorXd& z) {
  ShppState state{z.cwiseAbs(), VectorXd::Ones(z.size())};
  for (Index i = 0; i < z.size(); ++i) {
    if (z[i] < 0.0) state.v[i] = -1.0;
  }
  return state;
}

double shpp_energy(const SignalProblem& problem, const ShppState& state) {
  check_state(state, problem.p());
  const GridGraph& g = problem.graph();
  const CarSpec& car = problem.car();
  return (problem.z() - state.theta()).squaredNorm() +
         state.u.dot(car_precision_apply(g, car, state.u)) +
         state.v.dot(car_precision_apply(g, car, state.v));
}

double shpp_weighted_energy(const SignalProblem& problem, const ShppState& state) {
  check_state(state, problem.p());
  const GridGraph& g = problem.graph();
  const double rho = problem.car().rho;
  const VectorXd r = problem.z() - state.theta();
  const double fit = car_site_weights(g).dot(r.cwiseProduct(r));
  return fit + (state.u.dot(weighted_precision_apply(g, rho, state.u)) +
                state.v.dot(weighted_precision_apply(g, rho, state.v))) /
                   problem.car().tau_sq;
}

ShppState shpp_site_sweep(const SignalProblem& problem, ShppState state) {
  check_state(state, problem.p());
  sweep_in_place(problem, state, [] {});
  return state;
}

SolverTrace solve_shpp(const SignalProblem& problem, const std::optional<ShppState>& init,
                       const ShppConfig& config) {
  if (!(config.rel_tol > 0.0)) {
    throw ArgumentError("SHPP relative tolerance must be positive");
  }
  ShppState state = init ? *init : shpp_default_init(problem.z());
  check_state(state, problem.p());

  SolverTrace trace;
  trace.algorithm = "shpp";
  trace.initial_objective = shpp_energy(problem, state);
  VectorXd theta = state.theta();
  while (trace.iterations < config.max_sweeps) {
    if (config.record_updates) {
      sweep_in_place(problem, state, [&] {
        trace.update_objectives.push_back(shpp_weighted_energy(problem, state));
      });
    } else {
      sweep_in_place(problem, state, [] {});
    }
    ++trace.iterations;
    ++trace.coordinate_sweeps;
    VectorXd next = state.theta();
    const double change = (next - theta).squaredNorm() /
                          std::max(theta.squaredNorm(), kShppDenominatorFloor);
    theta = std::move(next);
    trace.objective.push_back(shpp_energy(problem, state));
    trace.surrogate.push_back(shpp_weighted_energy(problem, state));
    trace.statistic.push_back(change);
    trace.ridge_solves_cumulative.push_back(0);
    if (change < config.rel_tol) {
      trace.converged = true;
      break;
    }
  }
  trace.final_beta = theta;
  trace.final_factors = FactorState({state.u, state.v});
  return trace;
}

SolverTrace solve_shpp_dense(const RegressionProblem& problem, const MatrixXd& sigma_u,
                             const MatrixXd& sigma_v, const FactorState& init,
                             ConvergenceConfig conv) {
  if (sigma_u.rows() != problem.p() || sigma_v.rows() != problem.p()) {
    throw ArgumentError("covariance dimensions do not match the problem");
  }
  if (problem.p() > kDenseShppMaxP) {
    throw ArgumentError("dense SHPP is limited to p <= " + std::to_string(kDenseShppMaxP));
  }
  return solve_shpp_dense(problem,
                          PenaltySpec(0.0, StructuredPenalty::from_covariances(sigma_u, sigma_v)),
                          init, std::move(conv));
}

SolverTrace solve_shpp_dense(const RegressionProblem& problem, const PenaltySpec& spec,
                             const FactorState& init, ConvergenceConfig conv) {
  if (!spec.is_structured()) {
    throw ArgumentError("dense SHPP needs a structured penalty");
  }
  if (problem.p() > kDenseShppMaxP) {
    throw ArgumentError("dense SHPP is limited to p <= " + std::to_string(kDenseShppMaxP));
  }
  const StructuredPenalty& pen = spec.structure();
  if (pen.precision_u.rows() != problem.p()) {
    throw ArgumentError("structured precision dimensions do not match the problem");
  }
  if (init.K() != 2) {
    throw ArgumentError("SHPP uses exactly two factors");
  }
  detail::require_length(init.beta, problem.p(), "initial factors");
  detail::prepare(conv, problem.column_norms_sq());

  SolverTrace trace;
  trace.algorithm = "shpp-dense";
  detail::IterationLog log(trace, conv);
  FactorState state = init;
  state.refresh();
  trace.initial_objective = objective_factors(problem, spec, state);
  if (!log.exhausted()) {
    while (true) {
      const VectorXd prev = state.beta;
      state.factors[0] = hadamard_ridge_update(problem.Q(), problem.l(), state.factors[1],
                                               pen.precision_u);
      state.refresh();
      if (conv.record_updates) trace.update_objectives.push_back(objective_factors(problem, spec, state));
      state.factors[1] = hadamard_ridge_update(problem.Q(), problem.l(), state.factors[0],
                                               pen.precision_v);
      state.refresh();
      trace.ridge_solves += 2;
      const double g = objective_factors(problem, spec, state);
      if (conv.record_updates) trace.update_objectives.push_back(g);
      if (log.finish(prev, state.beta, g, g)) break;
    }
  }
  trace.final_beta = state.beta;
  trace.final_factors = std::move(state);
  return trace;
}

CarSpec estimate_car_moments(const GridGraph& graph, const VectorXd& z) {
  if (z.size() != graph.size() || z.size() < 2) {
    throw ArgumentError("moment estimate needs one value per active site and at least two sites");
  }
  const double mean = z.mean();
  const double var = (z.array() - mean).square().sum() / static_cast<double>(z.size() - 1);
  CarSpec car;
  car.tau_sq = std::max(var - 1.0, 1e-3);

  std::vector<double> a, b;
  for (Index s = 0; s < z.size(); ++s) {
    if (graph.neighbor_count(s) == 0) continue;
    a.push_back(z[s]);
    b.push_back(neighbor_average(graph, z, s));
  }
  double rho = 0.0;
  if (a.size() >= 2) {
    const Eigen::Map<const VectorXd> x(a.data(), static_cast<Index>(a.size()));
    const Eigen::Map<const VectorXd> y(b.data(), static_cast<Index>(b.size()));
    const VectorXd xc = x.array() - x.mean();
    const VectorXd yc = y.array() - y.mean();
    const double denom = std::sqrt(xc.squaredNorm() * yc.squaredNorm());
    if (denom > 0.0) rho = xc.dot(yc) / denom;
  }
  car.rho = std::clamp(rho, -0.99, 0.99);
  return car;
}

double sparsity_fraction(const VectorXd& theta, double threshold) {
  if (theta.size() == 0) return 1.0;
  return static_cast<double>((theta.array().abs() < threshold).count()) /
         static_cast<double>(theta.size());
}

double contiguity_score(const GridGraph& graph, const VectorXd& theta, double threshold) {
  if (theta.size() != graph.size()) {
    throw ArgumentError("theta length does not match the number of active sites");
  }
  long nonzero = 0, connected = 0;
  for (Index s = 0; s < theta.size(); ++s) {
    if (!(std::abs(theta[s]) >= threshold)) continue;
    ++nonzero;
    for (Index t : graph.neighbors(s)) {
      if (std::abs(theta[t]) >= threshold) {
        ++connected;
        break;
      }
    }
  }
  return nonzero == 0 ? 1.0 : static_cast<double>(connected) / static_cast<double>(nonzero);
}

GridExperimentResult synthetic_grid_experiment(const GridGraph& graph,
                                               const std::vector<SignalBlock>& blocks,
                                               const CarSpec& car, std::uint64_t seed,
                                               const ShppConfig& config, double noise_sd) {
  car.validate();
  if (!(noise_sd >= 0.0)) {
    throw ArgumentError("noise standard deviation must be nonnegative");
  }
  const Index p = graph.size();
  GridExperimentResult result;
  result.theta_true = VectorXd::Zero(p);
  for (const auto& block : blocks) {
    for (Index s = 0; s < p; ++s) {
      const GridCoord& c = graph.coord(s);
      bool inside = true;
      for (int a = 0; a < 3; ++a) {
        inside = inside && c[a] >= block.origin[a] && c[a] < block.origin[a] + block.extent[a];
      }
      if (inside) result.theta_true[s] = block.height;
    }
  }
  Rng rng(seed);
  result.z = result.theta_true + noise_sd * rng.normal_vector(p);

  SignalProblem structured(result.z, graph, car);
  result.trace = solve_shpp(structured, std::nullopt, config);
  result.theta_hat = result.trace.final_beta;

  SignalProblem plain(result.z, graph, CarSpec{0.0, car.tau_sq});
  const SolverTrace lasso = solve_shpp(plain, std::nullopt, config);
  result.theta_lasso = lasso.final_beta;

  GridExperimentReport& rep = result.report;
  rep.sweeps = result.trace.iterations;
  rep.converged = result.trace.converged;
  rep.sparsity = sparsity_fraction(result.theta_hat);
  rep.contiguity = contiguity_score(graph, result.theta_hat);
  rep.lasso_sweeps = lasso.iterations;
  rep.lasso_sparsity = sparsity_fraction(result.theta_lasso);
  rep.lasso_contiguity = contiguity_score(graph, result.theta_lasso);
  long tp = 0, est = 0, truth = 0;
  for (Index s = 0; s < p; ++s) {
    const bool e = std::abs(result.theta_hat[s]) >= kSignalZeroThreshold;
    const bool t = result.theta_true[s] != 0.0;
    est += e;
    truth += t;
    tp += e && t;
  }
  rep.precision = est == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(est);
  rep.recall = truth == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(truth);
  return result;
}

std::string grid_report_json(const GridExperimentReport& r) {
  nlohmann::ordered_json j;
  j["sweeps"] = r.sweeps;
  j["converged"] = r.converged;
  j["sparsity"] = r.sparsity;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["contiguity"] = r.contiguity;
  j["lasso_sweeps"] = r.lasso_sweeps;
  j["lasso_sparsity"] = r.lasso_sparsity;
  j["lasso_contiguity"] = r.lasso_contiguity;
  return j.dump(2);
}

GridSignal read_grid_csv(const std::string& path, bool torus) {
  const MatrixXd M = io::read_csv_matrix(path, true);
  if (M.cols() != 4) {
    throw IoError(path + ": expected 4 columns (i, j, k, value), found " + std::to_string(M.cols()));
  }
  std::vector<std::pair<GridCoord, double>> rows;
  GridDims dims;
  for (Index r = 0; r < M.rows(); ++r) {
    GridCoord c{};
    for (int a = 0; a < 3; ++a) {
      const double x = M(r, a);
      if (!(x >= 0.0) || x != std::floor(x) || x > 1e7) {
        throw IoError(path + ": row " + std::to_string(r + 1) +
                      " has a coordinate that is not a nonnegative integer");
      }
      c[a] = static_cast<int>(x);
    }
    dims.d1 = std::max(dims.d1, c[0] + 1);
    dims.d2 = std::max(dims.d2, c[1] + 1);
    dims.d3 = std::max(dims.d3, c[2] + 1);
    rows.emplace_back(c, M(r, 3));
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].first == rows[r - 1].first) {
      throw IoError(path + ": duplicate site (" + std::to_string(rows[r].first[0]) + ", " +
                    std::to_string(rows[r].first[1]) + ", " + std::to_string(rows[r].first[2]) +
                    ")");
    }
  }
  std::vector<GridCoord> sites;
  VectorXd values(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    sites.push_back(rows[r].first);
    values[static_cast<Index>(r)] = rows[r].second;
  }
  return {GridGraph::from_sites(dims, std::move(sites), torus), std::move(values)};
}

void write_grid_csv(const std::string& path, const GridGraph& graph, const VectorXd& values) {
  if (values.size() != graph.size()) {
    throw ArgumentError("values length does not match the number of active sites");
  }
  MatrixXd M(graph.size(), 4);
  for (Index s = 0; s < graph.size(); ++s) {
    const GridCoord& c = graph.coord(s);
    M.row(s) << c[0], c[1], c[2], values[s];
  }
  io::write_csv_matrix(path, M);
}

std::string slice_svg(const GridGraph& graph, const VectorXd& values, int slice,
                      SlicePalette palette, int cell_px) {
  if (values.size() != graph.size()) {
    throw ArgumentError("values length does not match the number of active sites");
  }
  if (slice < 0 || slice >= graph.dims().d3) {
    throw ArgumentError("slice index outside the grid");
  }
  const int w = graph.dims().d2 * cell_px;
  const int h = graph.dims().d1 * cell_px;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  os << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"#ffffff\"/>\n";
  for (Index s = 0; s < graph.size(); ++s) {
    const GridCoord& c = graph.coord(s);
    if (c[2] != slice) continue;
    os << "<rect x=\"" << c[1] * cell_px << "\" y=\"" << c[0] * cell_px << "\" width=\"" << cell_px
       << "\" height=\"" << cell_px << "\" fill=\"" << cell_color(values[s], palette) << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace hadamard

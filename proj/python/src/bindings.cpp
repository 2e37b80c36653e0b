#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "hadamard/bench.hpp"
#include "hadamard/errors.hpp"
#include "hadamard/glm.hpp"
#include "hadamard/linear_solvers.hpp"
#include "hadamard/simgen.hpp"
#include "hadamard/structured.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace hadamard;

namespace {

py::dict trace_dict(const SolverTrace& t) {
  return py::dict("algorithm"_a = t.algorithm, "beta"_a = t.final_beta, "converged"_a = t.converged,
                  "iterations"_a = t.iterations, "ridge_solves"_a = t.ridge_solves,
                  "inner_steps"_a = t.inner_steps, "initial_objective"_a = t.initial_objective,
                  "objective"_a = t.objective, "surrogate"_a = t.surrogate, "statistic"_a = t.statistic,
                  "numerical_warning"_a = t.numerical_warning);
}

SolverTrace run_linear(const RegressionProblem& problem, const std::string& algorithm, double lambda, int K,
                       double delta, int max_iter, double epsilon, double inner_delta) {
  const PenaltySpec spec(K, lambda);
  const auto conv = ConvergenceConfig::for_problem(problem, delta, max_iter);
  const VectorXd start = default_initial_beta(problem, lambda);
  const bool lasso_only = algorithm == "ccd" || algorithm == "hpcd" || algorithm == "lqcd";
  if (lasso_only && K != 2) throw ArgumentError(algorithm + " solves the lasso only (K = 2)");
  if (algorithm == "hpp") return solve_hpp(problem, spec, initial_factors(start, K), conv);
  if (algorithm == "lqa") return solve_lqa(problem, spec, start, LqaConfig{epsilon}, conv);
  if (algorithm == "ccd") return solve_ccd(problem, lambda, std::nullopt, start, conv);
  if (algorithm == "hpcd") return solve_hpcd(problem, lambda, start, conv);
  if (algorithm == "lqcd") return solve_lqcd(problem, lambda, start, LqaConfig{epsilon}, conv);
  if (algorithm == "lla") {
    return solve_lla(problem, spec, start, conv, ConvergenceConfig::for_problem(problem, inner_delta, max_iter));
  }
  throw ArgumentError("unknown algorithm '" + algorithm + "'");
}

py::dict solve(const MatrixXd& X, const VectorXd& y, std::optional<double> lambda, int K,
               const std::string& algorithm, double delta, int max_iter, double epsilon, double inner_delta) {
  const auto problem = RegressionProblem::from_data(X, y);
  const double lam = lambda ? *lambda : moment_lambda(problem, 2.0 / K);
  SolverTrace t;
  {
    py::gil_scoped_release release;
    t = run_linear(problem, algorithm, lam, K, delta, max_iter, epsilon, inner_delta);
  }
  py::dict d = trace_dict(t);
  d["lambda"] = lam;
  d["q"] = 2.0 / K;
  return d;
}

py::dict glm_solve(const MatrixXd& X, const VectorXd& y, const std::string& family, double lambda, int K,
                   const std::string& algorithm, double delta, int max_iter, double epsilon, double inner_delta) {
  const GlmProblem problem(X, y, GlmFamily::from_name(family));
  const PenaltySpec spec(K, lambda);
  ConvergenceConfig conv;
  conv.delta = delta;
  conv.max_iterations = max_iter;
  SolverTrace t;
  {
    py::gil_scoped_release release;
    const VectorXd start = glm_ridge_start(problem, lambda / 2.0);
    if (algorithm == "hpp") {
      t = solve_hpp_glm(problem, spec, initial_factors(start, K), conv);
    } else if (algorithm == "lqa") {
      t = solve_lqa_glm(problem, spec, start, LqaConfig{epsilon}, conv);
    } else if (algorithm == "lla") {
      ConvergenceConfig inner = conv;
      inner.delta = inner_delta;
      t = solve_lla_glm(problem, spec, start, conv, inner);
    } else {
      throw ArgumentError("unknown GLM algorithm '" + algorithm + "'");
    }
  }
  py::dict d = trace_dict(t);
  d["lambda"] = lambda;
  d["q"] = 2.0 / K;
  d["family"] = problem.family().name();
  return d;
}

py::dict simulate(Index n, Index p, double sparsity, double beta_sd, const std::string& design,
                  double rank_fraction, const std::string& family, std::uint64_t seed) {
  SimDesign d;
  d.n = n;
  d.p = p;
  d.sparsity = sparsity;
  d.beta_sd = beta_sd;
  d.design_kind = design_kind_from_name(design);
  d.rank_fraction = rank_fraction;
  d.family = GlmFamily::from_name(family).kind();
  d.seed = seed;
  const Dataset data = generate_dataset(d);
  return py::dict("X"_a = data.X, "y"_a = data.y, "beta_true"_a = data.beta_true);
}

py::dict shpp(py::array_t<double, py::array::c_style | py::array::forcecast> z, double rho, double tau_sq,
              bool torus, double rel_tol, int max_sweeps) {
  if (z.ndim() < 1 || z.ndim() > 3) throw ArgumentError("z must be a 1-, 2- or 3-dimensional array");
  GridDims dims;
  dims.d1 = static_cast<int>(z.shape(0));
  if (z.ndim() > 1) dims.d2 = static_cast<int>(z.shape(1));
  if (z.ndim() > 2) dims.d3 = static_cast<int>(z.shape(2));
  const GridGraph graph = GridGraph::full(dims, torus);
  // full grids store sites in C order
  const VectorXd values = Eigen::Map<const VectorXd>(z.data(), graph.size());
  const SignalProblem problem(values, graph, CarSpec{rho, tau_sq});
  SolverTrace t;
  {
    py::gil_scoped_release release;
    t = solve_shpp(problem, std::nullopt, ShppConfig{rel_tol, max_sweeps});
  }
  py::array_t<double> theta(std::vector<py::ssize_t>(z.shape(), z.shape() + z.ndim()));
  std::copy(t.final_beta.data(), t.final_beta.data() + t.final_beta.size(), theta.mutable_data());
  py::dict d = trace_dict(t);
  d["theta"] = theta;
  d["sweeps"] = t.iterations;
  d["sparsity"] = sparsity_fraction(t.final_beta);
  d["contiguity"] = contiguity_score(graph, t.final_beta);
  return d;
}

py::object run_suite(const std::string& config_json) {
  const auto cfg = bench::SuiteConfig::from_json(nlohmann::json::parse(config_json));
  bench::SuiteReport report;
  {
    py::gil_scoped_release release;
    report = bench::run_suite(cfg);
  }
  auto json = py::module_::import("json");
  py::dict out;
  out["aggregate"] = json.attr("loads")(bench::aggregate_json(report).dump());
  out["report_csv"] = bench::report_csv(report);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "L_q penalized regression via Hadamard product parametrization";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("solve", &solve, "X"_a, "y"_a, "lam"_a = py::none(), "K"_a = 2, "algorithm"_a = "hpp", "delta"_a = 1e-6,
        "max_iter"_a = 10000, "epsilon"_a = LqaConfig{}.epsilon, "inner_delta"_a = 1e-10,
        "Penalized least squares with penalty lam * sum |b_j|^(2/K). lam=None uses the moment plug-in (n > p).");
  m.def("glm_solve", &glm_solve, "X"_a, "y"_a, "family"_a, "lam"_a, "K"_a = 2, "algorithm"_a = "hpp",
        "delta"_a = 1e-6, "max_iter"_a = 10000, "epsilon"_a = LqaConfig{}.epsilon, "inner_delta"_a = 1e-10,
        "Penalized GLM (gaussian, logistic, poisson) with an L_q penalty, q = 2/K.");
  m.def(
      "objective",
      [](const MatrixXd& X, const VectorXd& y, const VectorXd& beta, double lam, int K) {
        return objective_beta(RegressionProblem::from_data(X, y), PenaltySpec(K, lam), beta);
      },
      "X"_a, "y"_a, "beta"_a, "lam"_a, "K"_a = 2, "b^T X^T X b - 2 b^T X^T y + lam sum |b_j|^(2/K).");
  m.def(
      "moment_lambda",
      [](const MatrixXd& X, const VectorXd& y, double q) {
        return moment_lambda(RegressionProblem::from_data(X, y), q);
      },
      "X"_a, "y"_a, "q"_a = 1.0, "Moment plug-in penalty (heuristic); needs n > p.");
  m.def(
      "kkt_check",
      [](const MatrixXd& X, const VectorXd& y, double lam, const VectorXd& beta, double tol,
         double zero_threshold) {
        const KktReport r = kkt_check(RegressionProblem::from_data(X, y), lam, beta, tol, zero_threshold);
        return py::dict("is_optimal"_a = r.is_optimal, "max_violation"_a = r.max_violation,
                        "subgradient"_a = r.subgradient, "per_coordinate"_a = r.per_coordinate);
      },
      "X"_a, "y"_a, "lam"_a, "beta"_a, "tol"_a = kDefaultKktTol, "zero_threshold"_a = 0.0,
      "Lasso optimality check.");
  m.def(
      "lemma1_inner_min",
      [](const VectorXd& beta) {
        const InnerMinimum r = lemma1_inner_min(beta);
        return py::make_tuple(r.v, r.value);
      },
      "beta"_a, "Minimizer v and minimum of |beta / v|^2 + |v|^2.");
  m.def("simulate", &simulate, "n"_a = 150, "p"_a = 100, "sparsity"_a = 0.5, "beta_sd"_a = 0.5,
        "design"_a = "iid_normal", "rank_fraction"_a = 0.1, "family"_a = "gaussian", "seed"_a = 0,
        "Simulated dataset as a dict with X, y and beta_true.");
  m.def("shpp", &shpp, "z"_a, "rho"_a = CarSpec{}.rho, "tau_sq"_a = CarSpec{}.tau_sq, "torus"_a = false,
        "rel_tol"_a = ShppConfig{}.rel_tol, "max_sweeps"_a = ShppConfig{}.max_sweeps,
        "Structured sparse estimate of a signal on a full 1-, 2- or 3-D grid with a CAR prior.");
  m.def("run_suite", &run_suite, "config_json"_a,
        "Runs a benchmark suite from its JSON config; returns the aggregate and the per-run CSV.");
}

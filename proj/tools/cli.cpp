#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hadamard/bench.hpp"
#include "hadamard/errors.hpp"
#include "hadamard/glm.hpp"
#include "hadamard/io.hpp"
#include "hadamard/linear_solvers.hpp"
#include "hadamard/simgen.hpp"
#include "hadamard/structured.hpp"
#include "json.hpp"

namespace hadamard::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kSolveKktZeroThreshold = 1e-6;

// JSON text with every floating-point value printed to 17 significant digits.
void dump17(const Json& j, std::ostream& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out << '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out << ',';
        first = false;
        out << Json(key).dump() << ':';
        dump17(value, out);
      }
      out << '}';
      break;
    }
    case Json::value_t::array: {
      out << '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out << ',';
        dump17(j[i], out);
      }
      out << ']';
      break;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      if (std::isfinite(x)) {
        out << io::format_double(x);
      } else {
        out << "null";
      }
      break;
    }
    default:
      out << j.dump();
  }
}

std::string json_line(const Json& j) {
  std::ostringstream out;
  dump17(j, out);
  return out.str();
}

Json vector_json(const VectorXd& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

// --out, then the environment variable, then fallback (empty: no files).
fs::path resolve_out(const std::string& flag, const fs::path& fallback = {}) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return fallback;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << text;
}

int resolve_K(std::optional<int> K, std::optional<double> q) {
  if (K && q) throw UsageError("give either --K/--factors or --q, not both");
  if (K) {
    if (*K < 1) throw UsageError("--K must be a positive integer");
    return *K;
  }
  if (q) {
    if (!(*q > 0.0 && *q <= 2.0)) throw UsageError("--q must lie in (0, 2]");
    const long k = std::lround(2.0 / *q);
    if (k < 1 || std::abs(2.0 / static_cast<double>(k) - *q) > 1e-12) {
      throw UsageError("--q must equal 2/K for an integer K >= 1");
    }
    return static_cast<int>(k);
  }
  return 2;
}

double parse_lambda(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(value > 0.0) || !std::isfinite(value)) {
    throw UsageError("--lambda must be a positive number or 'auto', got '" + text + "'");
  }
  return value;
}

struct SolveOptions {
  std::string x_path, y_path, alg = "hpp", lambda, out;
  std::optional<int> K;
  std::optional<double> q;
  double delta = 1e-6;
  int max_iter = 10000;
  double epsilon = LqaConfig{}.epsilon;
  double inner_delta = 1e-10;
  std::string family = "logistic";
};

void add_penalty_flags(CLI::App* cmd, SolveOptions& o) {
  cmd->add_option("--lambda", o.lambda, "Penalty multiplier lambda, or 'auto' for the moment plug-in (n > p)")
      ->required();
  auto* k = cmd->add_option("--K,--factors", o.K, "Number of Hadamard factors; q = 2/K (default 2)");
  auto* q = cmd->add_option("--q", o.q, "Penalty exponent; must equal 2/K for an integer K");
  k->excludes(q);
  cmd->add_option("--delta", o.delta, "Convergence threshold on max_j (db_j)^2 sum_k x_kj^2")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-iter", o.max_iter, "Iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--epsilon", o.epsilon, "LQA perturbation")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--inner-delta", o.inner_delta, "Convergence threshold of LLA inner solves")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--out", o.out,
                  std::string("Output directory for beta.csv, trace.csv, result.json (default $") +
                      kOutDirEnv + ", else none)");
}

void write_solve_outputs(const fs::path& dir, const SolverTrace& trace, const Json& result) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  io::write_csv_vector(dir / "beta.csv", trace.final_beta);
  write_text(dir / "trace.csv", bench::trace_csv(trace));
  write_text(dir / "result.json", json_line(result) + "\n");
}

int cmd_solve(const SolveOptions& o, std::ostream& out) {
  const RegressionProblem problem = io::load_problem(o.x_path, o.y_path);
  const int K = resolve_K(o.K, o.q);
  const bool lasso_only = o.alg == "ccd" || o.alg == "hpcd" || o.alg == "lqcd";
  if (lasso_only && K != 2) throw UsageError("--alg " + o.alg + " solves the lasso only (K = 2)");
  if (o.alg == "hpp" && K < 2) throw UsageError("--alg hpp needs K >= 2");
  if (o.alg == "lla" && K < 3) throw UsageError("--alg lla needs q < 1 (K >= 3)");

  const bool automatic = o.lambda == "auto";
  const double lambda = automatic ? moment_lambda(problem, 2.0 / K) : parse_lambda(o.lambda);
  const PenaltySpec spec(K, lambda);
  const ConvergenceConfig conv = ConvergenceConfig::for_problem(problem, o.delta, o.max_iter);
  const VectorXd beta0 = default_initial_beta(problem, lambda);
  const LqaConfig lqa{o.epsilon};

  SolverTrace trace;
  if (o.alg == "hpp") {
    trace = solve_hpp(problem, spec, initial_factors(beta0, K), conv);
  } else if (o.alg == "lqa") {
    trace = solve_lqa(problem, spec, beta0, lqa, conv);
  } else if (o.alg == "ccd") {
    trace = solve_ccd(problem, lambda, std::nullopt, beta0, conv);
  } else if (o.alg == "hpcd") {
    trace = solve_hpcd(problem, lambda, beta0, conv);
  } else if (o.alg == "lqcd") {
    trace = solve_lqcd(problem, lambda, beta0, lqa, conv);
  } else {
    trace = solve_lla(problem, spec, beta0, conv,
                      ConvergenceConfig::for_problem(problem, o.inner_delta, o.max_iter));
  }

  Json result;
  result["algorithm"] = trace.algorithm;
  result["converged"] = trace.converged;
  result["iterations"] = trace.iterations;
  result["ridge_solves"] = trace.ridge_solves;
  result["lambda"] = lambda;
  result["lambda_source"] = automatic ? "moment plug-in (heuristic)" : "fixed";
  result["K"] = K;
  result["q"] = spec.q();
  result["final_objective"] = trace.final_objective();
  if (K == 2) {
    result["kkt_max_violation"] =
        kkt_check(problem, lambda, trace.final_beta, kDefaultKktTol, kSolveKktZeroThreshold).max_violation;
  } else {
    result["kkt_max_violation"] = nullptr;
  }
  result["beta"] = vector_json(trace.final_beta);
  write_solve_outputs(resolve_out(o.out), trace, result);
  out << json_line(result) << '\n';
  return trace.converged ? kExitOk : kExitNotConverged;
}

int cmd_glm_solve(const SolveOptions& o, std::ostream& out) {
  const GlmFamily family = GlmFamily::from_name(o.family);
  const MatrixXd X = io::read_csv_matrix(o.x_path);
  const VectorXd y = io::read_csv_vector(o.y_path);
  if (X.rows() != y.size()) {
    throw UsageError(o.y_path + ": " + std::to_string(y.size()) + " responses for " +
                     std::to_string(X.rows()) + " design rows");
  }
  const GlmProblem problem(X, y, family);
  const int K = resolve_K(o.K, o.q);
  if (o.lambda == "auto") throw UsageError("--lambda auto is available for linear models only (solve)");
  if (o.alg == "hpp" && K < 2) throw UsageError("--alg hpp needs K >= 2");
  if (o.alg == "lla" && K < 3) throw UsageError("--alg lla needs q < 1 (K >= 3)");
  const double lambda = parse_lambda(o.lambda);
  const PenaltySpec spec(K, lambda);
  ConvergenceConfig conv;
  conv.delta = o.delta;
  conv.max_iterations = o.max_iter;
  const VectorXd beta0 = glm_ridge_start(problem, lambda / 2.0);

  SolverTrace trace;
  if (o.alg == "hpp") {
    trace = solve_hpp_glm(problem, spec, initial_factors(beta0, K), conv);
  } else if (o.alg == "lqa") {
    trace = solve_lqa_glm(problem, spec, beta0, LqaConfig{o.epsilon}, conv);
  } else {
    ConvergenceConfig inner;
    inner.delta = o.inner_delta;
    inner.max_iterations = o.max_iter;
    trace = solve_lla_glm(problem, spec, beta0, conv, inner);
  }

  Json result;
  result["algorithm"] = trace.algorithm;
  result["family"] = family.name();
  result["converged"] = trace.converged;
  result["iterations"] = trace.iterations;
  result["newton_steps"] = trace.inner_steps;
  result["numerical_warning"] = trace.numerical_warning;
  result["lambda"] = lambda;
  result["K"] = K;
  result["q"] = spec.q();
  result["final_objective"] = trace.final_objective();
  result["beta"] = vector_json(trace.final_beta);
  write_solve_outputs(resolve_out(o.out), trace, result);
  out << json_line(result) << '\n';
  return trace.converged ? kExitOk : kExitNotConverged;
}

struct SimulateOptions {
  SimDesign design;
  std::string design_kind = "iid_normal";
  std::string family = "gaussian";
  std::string out;
};

int cmd_simulate(SimulateOptions o, std::ostream& out) {
  o.design.design_kind = design_kind_from_name(o.design_kind);
  o.design.family = GlmFamily::from_name(o.family).kind();
  const Dataset data = generate_dataset(o.design);
  const fs::path dir = resolve_out(o.out, ".");
  export_dataset(data, o.design, dir);
  Json result;
  result["out"] = dir.string();
  result["design"] = nlohmann::json(o.design);
  result["nonzero"] = static_cast<long>((data.beta_true.array() != 0.0).count());
  out << json_line(result) << '\n';
  return kExitOk;
}

struct BenchOptions {
  std::string config;
  std::optional<int> threads;
  std::string out;
};

int cmd_bench(const BenchOptions& o, std::ostream& out) {
  std::ifstream in(o.config);
  if (!in) throw IoError(o.config + ": cannot open");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(o.config + ": invalid JSON: " + e.what());
  }
  bench::SuiteConfig cfg = bench::SuiteConfig::from_json(j);
  if (o.threads) {
    if (*o.threads < 1) throw UsageError("--threads must be at least 1");
    cfg.threads = *o.threads;
  }
  const bench::SuiteReport report = bench::run_suite(cfg);
  const fs::path dir = bench::write_suite(report, resolve_out(o.out, "."));

  Json result;
  result["run_dir"] = dir.string();
  result["datasets"] = cfg.repetitions;
  Json algs = Json::object();
  for (const auto& a : report.aggregates) {
    algs[a.algorithm] = {{"median_iterations", a.median_iterations},
                         {"converged", a.converged},
                         {"failures", a.failures},
                         {"mean_relative_mse", a.mean_relative_mse}};
  }
  result["algorithms"] = algs;
  out << json_line(result) << '\n';
  return kExitOk;
}

struct ShppOptions {
  std::string grid;
  bool synthetic = false;
  std::string dims = "20x20";
  std::vector<std::string> blocks;
  std::uint64_t seed = 0;
  double noise_sd = 1.0;
  double rho = CarSpec{}.rho;
  double tau_sq = CarSpec{}.tau_sq;
  bool estimate_car = false;
  bool torus = false;
  double rel_tol = ShppConfig{}.rel_tol;
  int max_sweeps = ShppConfig{}.max_sweeps;
  int slice = 0;
  std::string out;
};

std::vector<int> split_ints(const std::string& text, char sep, const std::string& what) {
  std::vector<int> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      values.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(what + ": cannot parse '" + text + "'");
    }
  }
  return values;
}

SignalBlock parse_block(const std::string& text, bool three_d) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  const std::size_t expected = three_d ? 7 : 5;
  if (parts.size() != expected) {
    throw UsageError("--block '" + text + "': expected " +
                     (three_d ? std::string("i,j,k,di,dj,dk,height") : std::string("i,j,di,dj,height")));
  }
  SignalBlock b;
  try {
    const std::size_t nc = three_d ? 3 : 2;
    for (std::size_t a = 0; a < nc; ++a) {
      b.origin[a] = std::stoi(parts[a]);
      b.extent[a] = std::stoi(parts[nc + a]);
    }
    b.height = std::stod(parts.back());
  } catch (const std::exception&) {
    throw UsageError("--block '" + text + "': cannot parse");
  }
  return b;
}

int cmd_shpp(const ShppOptions& o, std::ostream& out) {
  if (o.synthetic == !o.grid.empty()) throw UsageError("give exactly one of --grid or --synthetic");
  ShppConfig config;
  config.rel_tol = o.rel_tol;
  config.max_sweeps = o.max_sweeps;

  Json result;
  std::optional<GridGraph> graph;
  VectorXd z, theta;
  SolverTrace trace;
  CarSpec car{o.rho, o.tau_sq};
  if (o.synthetic) {
    const std::vector<int> d = split_ints(o.dims, 'x', "--dims");
    if (d.size() < 2 || d.size() > 3) throw UsageError("--dims must look like 20x20 or 10x10x5");
    const GridDims dims{d[0], d[1], d.size() == 3 ? d[2] : 1};
    graph = GridGraph::full(dims, o.torus);
    std::vector<SignalBlock> blocks;
    for (const auto& b : o.blocks) blocks.push_back(parse_block(b, d.size() == 3));
    if (o.estimate_car) throw UsageError("--estimate-car applies to --grid input");
    car.validate();
    GridExperimentResult exp = synthetic_grid_experiment(*graph, blocks, car, o.seed, config, o.noise_sd);
    z = exp.z;
    theta = exp.theta_hat;
    trace = exp.trace;
    result["report"] = Json::parse(grid_report_json(exp.report));
  } else {
    GridSignal signal = read_grid_csv(o.grid, o.torus);
    graph = signal.graph;
    z = signal.values;
    if (o.estimate_car) car = estimate_car_moments(*graph, z);
    trace = solve_shpp(SignalProblem(z, *graph, car), std::nullopt, config);
    theta = trace.final_beta;
  }

  result["sweeps"] = trace.iterations;
  result["converged"] = trace.converged;
  result["rho"] = car.rho;
  result["tau_sq"] = car.tau_sq;
  result["car_source"] = o.estimate_car ? "moment plug-in (heuristic)" : "fixed";
  result["sites"] = static_cast<long>(graph->size());
  result["final_energy"] = trace.final_objective();
  result["sparsity"] = sparsity_fraction(theta);
  result["contiguity"] = contiguity_score(*graph, theta);

  const fs::path dir = resolve_out(o.out);
  if (!dir.empty()) {
    fs::create_directories(dir);
    write_grid_csv((dir / "theta.csv").string(), *graph, theta);
    write_grid_csv((dir / "z.csv").string(), *graph, z);
    write_text(dir / "trace.csv", bench::trace_csv(trace));
    write_text(dir / "estimate.svg", slice_svg(*graph, theta, o.slice, SlicePalette::estimate));
    write_text(dir / "scores.svg", slice_svg(*graph, z, o.slice, SlicePalette::scores));
    write_text(dir / "result.json", json_line(result) + "\n");
  }
  out << json_line(result) << '\n';
  return trace.converged ? kExitOk : kExitNotConverged;
}

struct KktOptions {
  std::string x_path, y_path, beta_path, lambda;
  double tol = 1e-4;
  double zero_threshold = 0.0;
};

int cmd_kkt(const KktOptions& o, std::ostream& out) {
  const RegressionProblem problem = io::load_problem(o.x_path, o.y_path);
  const VectorXd beta = io::read_csv_vector(o.beta_path);
  if (beta.size() != problem.p()) {
    throw UsageError(o.beta_path + ": " + std::to_string(beta.size()) + " coefficients for " +
                     std::to_string(problem.p()) + " columns");
  }
  const double lambda = parse_lambda(o.lambda);
  const KktReport report = kkt_check(problem, lambda, beta, o.tol, o.zero_threshold);
  Json result;
  result["is_optimal"] = report.is_optimal;
  result["max_violation"] = report.max_violation;
  result["tol"] = o.tol;
  result["lambda"] = lambda;
  result["subgradient"] = vector_json(report.subgradient);
  out << json_line(result) << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hadamard-product-parametrized penalized regression: solvers, simulation and benchmarks",
               "hadamard"};
  app.require_subcommand(1, 1);
  app.fallthrough(false);

  SolveOptions solve_opts;
  auto* solve = app.add_subcommand("solve", "Penalized least squares with an L_q penalty, q = 2/K");
  solve->add_option("-X,--design", solve_opts.x_path, "Design matrix CSV (no header)")->required();
  solve->add_option("-y,--response", solve_opts.y_path, "Response CSV, one value per line")->required();
  solve->add_option("--alg", solve_opts.alg, "Algorithm")
      ->check(CLI::IsMember({"hpp", "lqa", "ccd", "lla", "hpcd", "lqcd"}))
      ->capture_default_str();
  add_penalty_flags(solve, solve_opts);

  SolveOptions glm_opts;
  auto* glm = app.add_subcommand("glm-solve", "Penalized generalized linear model with an L_q penalty");
  glm->add_option("-X,--design", glm_opts.x_path, "Design matrix CSV (no header)")->required();
  glm->add_option("-y,--response", glm_opts.y_path, "Response CSV, one value per line")->required();
  glm->add_option("--family", glm_opts.family, "Response family")
      ->check(CLI::IsMember({"gaussian", "poisson", "logistic", "binomial"}))
      ->capture_default_str();
  glm->add_option("--alg", glm_opts.alg, "Algorithm")
      ->check(CLI::IsMember({"hpp", "lqa", "lla"}))
      ->capture_default_str();
  add_penalty_flags(glm, glm_opts);

  SimulateOptions sim_opts;
  auto* sim = app.add_subcommand("simulate", "Generate a simulated dataset (X.csv, y.csv, beta_true.csv)");
  sim->add_option("--n", sim_opts.design.n, "Observations")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--p", sim_opts.design.p, "Predictors")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--sparsity", sim_opts.design.sparsity, "Probability that a coefficient is zero")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sim->add_option("--beta-sd", sim_opts.design.beta_sd, "Standard deviation of nonzero coefficients")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim->add_option("--design", sim_opts.design_kind, "Design kind")
      ->check(CLI::IsMember({"iid_normal", "low_rank_plus_noise"}))
      ->capture_default_str();
  sim->add_option("--rank-fraction", sim_opts.design.rank_fraction, "r / p for low_rank_plus_noise")
      ->capture_default_str();
  sim->add_option("--family", sim_opts.family, "Response family")
      ->check(CLI::IsMember({"gaussian", "logistic"}))
      ->capture_default_str();
  sim->add_option("--seed", sim_opts.design.seed, "Random seed")->capture_default_str();
  sim->add_option("--out", sim_opts.out, std::string("Output directory (default $") + kOutDirEnv + ", else .)");

  BenchOptions bench_opts;
  auto* bench_cmd = app.add_subcommand("bench", "Run a simulation suite described by a JSON config");
  bench_cmd->add_option("--config", bench_opts.config, "Suite config JSON")->required();
  bench_cmd->add_option("--threads", bench_opts.threads, "Datasets run in parallel (overrides the config)");
  bench_cmd->add_option("--out", bench_opts.out,
                        std::string("Root for the run directory (default $") + kOutDirEnv + ", else .)");

  ShppOptions shpp_opts;
  auto* shpp = app.add_subcommand("shpp", "Structured (CAR) sparse signal estimation on a grid");
  auto* grid_opt = shpp->add_option("--grid", shpp_opts.grid, "Grid CSV with rows i,j,k,value");
  auto* synth_opt = shpp->add_flag("--synthetic", shpp_opts.synthetic, "Simulate z = theta + noise on a full grid");
  grid_opt->excludes(synth_opt);
  shpp->add_option("--dims", shpp_opts.dims, "Synthetic grid size, e.g. 20x20 or 10x10x5")->capture_default_str();
  shpp->add_option("--block", shpp_opts.blocks, "Synthetic signal block i,j,di,dj,height (2-D) or i,j,k,di,dj,dk,height");
  shpp->add_option("--seed", shpp_opts.seed, "Synthetic noise seed")->capture_default_str();
  shpp->add_option("--noise-sd", shpp_opts.noise_sd, "Synthetic noise standard deviation")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  shpp->add_option("--rho", shpp_opts.rho, "CAR dependence, |rho| < 1")->capture_default_str();
  shpp->add_option("--tau-sq", shpp_opts.tau_sq, "CAR conditional variance")->check(CLI::PositiveNumber)->capture_default_str();
  shpp->add_flag("--estimate-car", shpp_opts.estimate_car, "Moment plug-in for rho and tau^2 from z (--grid only)");
  shpp->add_flag("--torus", shpp_opts.torus, "Wrap every axis longer than two");
  shpp->add_option("--rel-tol", shpp_opts.rel_tol, "Stop when |dtheta|^2 / |theta|^2 < rel-tol")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  shpp->add_option("--max-sweeps", shpp_opts.max_sweeps, "Sweep cap")->check(CLI::PositiveNumber)->capture_default_str();
  shpp->add_option("--slice", shpp_opts.slice, "k index drawn in the SVG outputs")->capture_default_str();
  shpp->add_option("--out", shpp_opts.out,
                   std::string("Output directory (default $") + kOutDirEnv + ", else none)");

  KktOptions kkt_opts;
  auto* kkt = app.add_subcommand("kkt", "Check lasso optimality conditions of a coefficient vector");
  kkt->add_option("-X,--design", kkt_opts.x_path, "Design matrix CSV (no header)")->required();
  kkt->add_option("-y,--response", kkt_opts.y_path, "Response CSV")->required();
  kkt->add_option("--beta", kkt_opts.beta_path, "Coefficient CSV")->required();
  kkt->add_option("--lambda", kkt_opts.lambda, "Lasso penalty multiplier")->required();
  kkt->add_option("--tol", kkt_opts.tol, "Allowed violation")->check(CLI::NonNegativeNumber)->capture_default_str();
  kkt->add_option("--zero-threshold", kkt_opts.zero_threshold, "|beta_j| at or below this is treated as zero")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_opts, out);
    if (glm->parsed()) return cmd_glm_solve(glm_opts, out);
    if (sim->parsed()) return cmd_simulate(sim_opts, out);
    if (bench_cmd->parsed()) return cmd_bench(bench_opts, out);
    if (shpp->parsed()) return cmd_shpp(shpp_opts, out);
    if (kkt->parsed()) return cmd_kkt(kkt_opts, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace hadamard::cli

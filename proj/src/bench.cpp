#include "hadamard/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "hadamard/errors.hpp"
#include "hadamard/glm.hpp"
#include "hadamard/io.hpp"

namespace hadamard::bench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kKktTol = 1e-4;
constexpr double kKktZeroThreshold = 1e-6;

bool is_lasso_only(const std::string& alg) { return alg == "ccd" || alg == "hpcd" || alg == "lqcd"; }

bool is_known(const std::string& alg) {
  return alg == "hpp" || alg == "lqa" || alg == "lla" || is_lasso_only(alg);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

double relative_error(const VectorXd& est, const VectorXd& truth) {
  const double denom = truth.squaredNorm();
  return denom > 0.0 ? (est - truth).squaredNorm() / denom : kNaN;
}

struct Prepared {
  double lambda = 0.0;
  VectorXd beta0;
};

SolverTrace run_linear(const std::string& alg, const RegressionProblem& problem,
                       const PenaltySpec& spec, const VectorXd& beta0, const SuiteConfig& cfg,
                       const ConvergenceConfig& conv) {
  const LqaConfig lqa{cfg.lqa_epsilon};
  if (alg == "hpp") return solve_hpp(problem, spec, initial_factors(beta0, spec.K()), conv);
  if (alg == "lqa") return solve_lqa(problem, spec, beta0, lqa, conv);
  if (alg == "ccd") return solve_ccd(problem, spec.lambda(), std::nullopt, beta0, conv);
  if (alg == "hpcd") return solve_hpcd(problem, spec.lambda(), beta0, conv);
  if (alg == "lqcd") return solve_lqcd(problem, spec.lambda(), beta0, lqa, conv);
  ConvergenceConfig inner = ConvergenceConfig::for_problem(problem, cfg.inner_delta, cfg.max_iterations);
  return solve_lla(problem, spec, beta0, conv, inner);
}

SolverTrace run_glm(const std::string& alg, const GlmProblem& problem, const PenaltySpec& spec,
                    const VectorXd& beta0, const SuiteConfig& cfg, const ConvergenceConfig& conv) {
  if (alg == "hpp") return solve_hpp_glm(problem, spec, initial_factors(beta0, spec.K()), conv);
  if (alg == "lqa") return solve_lqa_glm(problem, spec, beta0, LqaConfig{cfg.lqa_epsilon}, conv);
  ConvergenceConfig inner;
  inner.delta = cfg.inner_delta;
  inner.max_iterations = cfg.max_iterations;
  return solve_lla_glm(problem, spec, beta0, conv, inner);
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

const char* kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};

}  // namespace

std::map<std::string, ProgressCurve> progress_normalize(
    const std::map<std::string, std::vector<double>>& objectives,
    const std::map<std::string, std::vector<long>>& ridge_solves) {
  if (objectives.empty()) {
    throw ArgumentError("progress_normalize needs at least one algorithm");
  }
  std::size_t common = std::numeric_limits<std::size_t>::max();
  double f_max = -std::numeric_limits<double>::infinity();
  for (const auto& [alg, f] : objectives) {
    if (f.empty()) {
      throw ArgumentError("algorithm '" + alg + "' has no iterations");
    }
    common = std::min(common, f.size());
    f_max = std::max(f_max, f.front());
  }
  double f_min = std::numeric_limits<double>::infinity();
  for (const auto& [alg, f] : objectives) f_min = std::min(f_min, f[common - 1]);
  const bool degenerate = !(f_max > f_min);

  std::map<std::string, ProgressCurve> out;
  for (const auto& [alg, f] : objectives) {
    ProgressCurve c;
    c.f_max = f_max;
    c.f_min = f_min;
    c.degenerate = degenerate;
    c.w.resize(common);
    for (std::size_t i = 0; i < common; ++i) {
      c.w[i] = degenerate ? 1.0 : (f_max - f[i]) / (f_max - f_min);
    }
    const auto it = ridge_solves.find(alg);
    if (it != ridge_solves.end()) {
      const std::size_t m = std::min(common, it->second.size());
      c.ridge_solves_per_point.assign(it->second.begin(), it->second.begin() + m);
    }
    out.emplace(alg, std::move(c));
  }
  return out;
}

std::map<std::string, ProgressCurve> average_curves(
    const std::vector<std::map<std::string, ProgressCurve>>& per_dataset) {
  std::map<std::string, std::vector<const ProgressCurve*>> by_alg;
  for (const auto& ds : per_dataset)
    for (const auto& [alg, c] : ds) by_alg[alg].push_back(&c);

  std::map<std::string, ProgressCurve> out;
  for (const auto& [alg, curves] : by_alg) {
    std::size_t len = std::numeric_limits<std::size_t>::max();
    std::size_t solves_len = std::numeric_limits<std::size_t>::max();
    for (const auto* c : curves) {
      len = std::min(len, c->w.size());
      solves_len = std::min(solves_len, c->ridge_solves_per_point.size());
    }
    solves_len = std::min(solves_len, len);
    ProgressCurve mean;
    mean.w.assign(len, 0.0);
    mean.ridge_solves_per_point.assign(solves_len, 0.0);
    const double count = static_cast<double>(curves.size());
    for (const auto* c : curves) {
      for (std::size_t i = 0; i < len; ++i) mean.w[i] += c->w[i] / count;
      for (std::size_t i = 0; i < solves_len; ++i)
        mean.ridge_solves_per_point[i] += c->ridge_solves_per_point[i] / count;
      mean.f_max += c->f_max / count;
      mean.f_min += c->f_min / count;
      mean.degenerate = mean.degenerate || c->degenerate;
    }
    out.emplace(alg, std::move(mean));
  }
  return out;
}

void SuiteConfig::validate() const {
  design.validate();
  if (repetitions < 1) throw ArgumentError("repetitions must be at least 1");
  if (algorithms.empty()) throw ArgumentError("suite needs at least one algorithm");
  if (K < 1) throw ArgumentError("K must be a positive integer");
  if (lambda && !(*lambda > 0.0 && std::isfinite(*lambda)))
    throw ArgumentError("lambda must be positive and finite");
  if (!(delta > 0.0) || !(inner_delta > 0.0)) throw ArgumentError("delta values must be positive");
  if (!(lqa_epsilon > 0.0)) throw ArgumentError("lqa_epsilon must be positive");
  if (max_iterations < 1 || fixed_iterations < 1) throw ArgumentError("iteration counts must be positive");
  if (threads < 1) throw ArgumentError("threads must be at least 1");
  const bool gaussian = design.family == Family::gaussian;
  if (!gaussian && !lambda) {
    throw ArgumentError("lambda \"auto\" needs a gaussian design; pin lambda for logistic suites");
  }
  for (const auto& alg : algorithms) {
    if (!is_known(alg)) throw ArgumentError("unknown algorithm '" + alg + "'");
    if (std::count(algorithms.begin(), algorithms.end(), alg) > 1)
      throw ArgumentError("algorithm '" + alg + "' listed twice");
    if (is_lasso_only(alg) && (K != 2 || !gaussian))
      throw ArgumentError("'" + alg + "' solves the gaussian lasso only (K = 2)");
    if (alg == "hpp" && K < 2) throw ArgumentError("hpp needs K >= 2");
    if (alg == "lla" && K < 3) throw ArgumentError("lla needs q < 1 (K >= 3)");
  }
}

nlohmann::json SuiteConfig::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["design"] = design;
  j["repetitions"] = repetitions;
  j["algorithms"] = algorithms;
  j["K"] = K;
  if (lambda) {
    j["lambda"] = *lambda;
  } else {
    j["lambda"] = "auto";
  }
  j["lqa_epsilon"] = lqa_epsilon;
  j["delta"] = delta;
  j["inner_delta"] = inner_delta;
  j["max_iterations"] = max_iterations;
  j["mode"] = mode == RunMode::fixed ? "fixed" : "converge";
  j["fixed_iterations"] = fixed_iterations;
  j["threads"] = threads;
  return j;
}

SuiteConfig SuiteConfig::from_json(const nlohmann::json& j) {
  static const char* known[] = {"name",        "design",         "repetitions", "algorithms",
                                "K",           "lambda",         "lqa_epsilon", "delta",
                                "inner_delta", "max_iterations", "mode",        "fixed_iterations",
                                "threads"};
  if (!j.is_object()) throw ArgumentError("suite config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw ArgumentError("unknown suite config key '" + key + "'");
  }
  try {
    SuiteConfig c;
    c.name = j.value("name", c.name);
    if (j.contains("design")) c.design = j.at("design").get<SimDesign>();
    c.repetitions = j.value("repetitions", c.repetitions);
    if (j.contains("algorithms")) c.algorithms = j.at("algorithms").get<std::vector<std::string>>();
    c.K = j.value("K", c.K);
    if (j.contains("lambda")) {
      const auto& l = j.at("lambda");
      if (l.is_string()) {
        if (l.get<std::string>() != "auto") throw ArgumentError("lambda must be a number or \"auto\"");
        c.lambda.reset();
      } else {
        c.lambda = l.get<double>();
      }
    }
    c.lqa_epsilon = j.value("lqa_epsilon", c.lqa_epsilon);
    c.delta = j.value("delta", c.delta);
    c.inner_delta = j.value("inner_delta", c.inner_delta);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    const std::string mode = j.value("mode", std::string("converge"));
    if (mode == "fixed") {
      c.mode = RunMode::fixed;
    } else if (mode == "converge") {
      c.mode = RunMode::converge;
    } else {
      throw ArgumentError("mode must be \"converge\" or \"fixed\"");
    }
    c.fixed_iterations = j.value("fixed_iterations", c.fixed_iterations);
    c.threads = j.value("threads", c.threads);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("malformed suite config: ") + e.what());
  }
}

std::string SuiteConfig::hash() const {
  nlohmann::json j = to_json();
  j.erase("threads");
  return fnv1a_hex(j.dump());
}

double median(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double x) { return std::isnan(x); }),
               values.end());
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

namespace {

double mean(const std::vector<double>& values) {
  double total = 0.0;
  int count = 0;
  for (double x : values) {
    if (std::isnan(x)) continue;
    total += x;
    ++count;
  }
  return count ? total / count : kNaN;
}

}  // namespace

std::vector<AlgorithmAggregate> aggregate_rows(const std::vector<SuiteRow>& rows,
                                               const std::vector<std::string>& algorithms) {
  std::vector<AlgorithmAggregate> out;
  for (const auto& alg : algorithms) {
    AlgorithmAggregate a;
    a.algorithm = alg;
    std::vector<double> its, solves, mse, pred;
    double kkt = kNaN;
    for (const auto& r : rows) {
      if (r.algorithm != alg) continue;
      ++a.runs;
      if (!r.error.empty()) {
        ++a.failures;
        continue;
      }
      if (r.converged) {
        ++a.converged;
        if (!std::isnan(r.kkt_max_violation))
          kkt = std::isnan(kkt) ? r.kkt_max_violation : std::max(kkt, r.kkt_max_violation);
      }
      its.push_back(r.iterations);
      solves.push_back(static_cast<double>(r.ridge_solves));
      mse.push_back(r.relative_mse);
      pred.push_back(r.relative_prediction_error);
    }
    a.median_iterations = median(its);
    a.mean_iterations = mean(its);
    a.median_ridge_solves = median(solves);
    a.mean_ridge_solves = mean(solves);
    a.median_relative_mse = median(mse);
    a.mean_relative_mse = mean(mse);
    a.median_relative_prediction_error = median(pred);
    a.mean_relative_prediction_error = mean(pred);
    a.max_kkt_violation = kkt;
    out.push_back(a);
  }
  return out;
}

std::vector<PairwiseComparison> pairwise_comparisons(const std::vector<SuiteRow>& rows,
                                                     const std::vector<std::string>& algorithms) {
  std::map<std::pair<int, std::string>, double> f;
  for (const auto& r : rows) {
    if (r.error.empty()) f[{r.dataset, r.algorithm}] = r.final_objective;
  }
  std::vector<int> datasets;
  for (const auto& r : rows) datasets.push_back(r.dataset);
  std::sort(datasets.begin(), datasets.end());
  datasets.erase(std::unique(datasets.begin(), datasets.end()), datasets.end());

  std::vector<PairwiseComparison> out;
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    for (std::size_t k = i + 1; k < algorithms.size(); ++k) {
      PairwiseComparison c;
      c.a = algorithms[i];
      c.b = algorithms[k];
      std::vector<double> diffs;
      for (int d : datasets) {
        const auto fa = f.find({d, c.a});
        const auto fb = f.find({d, c.b});
        if (fa == f.end() || fb == f.end()) continue;
        const double scale = std::max(std::abs(fa->second), std::abs(fb->second));
        diffs.push_back(scale > 0.0 ? std::abs(fa->second - fb->second) / scale : 0.0);
        if (fa->second <= fb->second) ++c.a_not_worse;
      }
      c.compared = static_cast<int>(diffs.size());
      c.max_relative_difference = diffs.empty() ? kNaN : *std::max_element(diffs.begin(), diffs.end());
      c.median_relative_difference = median(diffs);
      out.push_back(c);
    }
  }
  return out;
}

DatasetResult run_dataset(const SuiteConfig& cfg, const Dataset& data, Family family, int index,
                          std::uint64_t seed) {
  cfg.validate();
  const bool gaussian = family == Family::gaussian;
  if (!gaussian && !cfg.lambda) {
    throw ArgumentError("GLM datasets need a fixed lambda");
  }
  ConvergenceConfig conv;
  conv.delta = cfg.delta;
  if (cfg.mode == RunMode::fixed) {
    conv.max_iterations = cfg.fixed_iterations;
    conv.stop_on_convergence = false;
  } else {
    conv.max_iterations = cfg.max_iterations;
  }

  DatasetResult result;
  auto base_row = [&](const std::string& alg) {
    SuiteRow row;
    row.dataset = index;
    row.seed = seed;
    row.algorithm = alg;
    row.kkt_max_violation = kNaN;
    return row;
  };

  std::optional<RegressionProblem> linear;
  std::optional<GlmProblem> glm;
  Prepared prep;
  try {
    if (gaussian) {
      linear = RegressionProblem::from_data(data.X, data.y);
      prep.lambda = cfg.lambda ? *cfg.lambda : moment_lambda(*linear, 2.0 / cfg.K);
      prep.beta0 = default_initial_beta(*linear, prep.lambda);
    } else {
      glm = GlmProblem(data.X, data.y, GlmFamily(family));
      prep.lambda = *cfg.lambda;
      prep.beta0 = glm_ridge_start(*glm, prep.lambda / 2.0);
    }
  } catch (const std::exception& e) {
    for (const auto& alg : cfg.algorithms) {
      SuiteRow row = base_row(alg);
      row.error = std::string("setup: ") + e.what();
      row.final_objective = row.penalized_loss = row.relative_mse = row.relative_prediction_error = kNaN;
      result.rows.push_back(row);
    }
    return result;
  }

  const PenaltySpec spec(cfg.K, prep.lambda);
  const VectorXd Xb = data.X * data.beta_true;
  const double yty = data.y.squaredNorm();
  std::map<std::string, std::vector<double>> objectives;
  std::map<std::string, std::vector<long>> solves;
  for (const auto& alg : cfg.algorithms) {
    SuiteRow row = base_row(alg);
    row.lambda = prep.lambda;
    const auto start = std::chrono::steady_clock::now();
    try {
      const SolverTrace trace = gaussian ? run_linear(alg, *linear, spec, prep.beta0, cfg, conv)
                                         : run_glm(alg, *glm, spec, prep.beta0, cfg, conv);
      row.iterations = trace.iterations;
      row.ridge_solves = trace.ridge_solves;
      row.converged = trace.converged;
      row.final_objective = trace.final_objective();
      row.penalized_loss = gaussian ? row.final_objective + yty : row.final_objective;
      row.relative_mse = relative_error(trace.final_beta, data.beta_true);
      const double pd = Xb.squaredNorm();
      row.relative_prediction_error =
          pd > 0.0 ? (data.X * trace.final_beta - Xb).squaredNorm() / pd : kNaN;
      if (gaussian && cfg.K == 2) {
        row.kkt_max_violation =
            kkt_check(*linear, prep.lambda, trace.final_beta, kKktTol, kKktZeroThreshold).max_violation;
      }
      if (!trace.objective.empty()) {
        objectives[alg] = trace.objective;
        solves[alg] = trace.ridge_solves_cumulative;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
      row.final_objective = row.penalized_loss = row.relative_mse = row.relative_prediction_error = kNaN;
    }
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.rows.push_back(std::move(row));
  }
  if (!objectives.empty()) result.progress = progress_normalize(objectives, solves);
  return result;
}

SuiteReport run_suite(const SuiteConfig& config) {
  config.validate();
  const int reps = config.repetitions;
  std::vector<DatasetResult> results(reps);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < reps; i = next++) {
      SimDesign design = config.design;
      design.seed = config.design.seed + static_cast<std::uint64_t>(i);
      results[i] = run_dataset(config, generate_dataset(design), design.family, i, design.seed);
    }
  };
  const int nthreads = std::min(config.threads, reps);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SuiteReport report;
  report.config = config;
  std::vector<std::map<std::string, ProgressCurve>> curves;
  for (auto& r : results) {
    for (auto& row : r.rows) report.rows.push_back(std::move(row));
    if (!r.progress.empty()) curves.push_back(std::move(r.progress));
  }
  report.aggregates = aggregate_rows(report.rows, config.algorithms);
  report.pairwise = pairwise_comparisons(report.rows, config.algorithms);
  report.mean_progress = average_curves(curves);
  return report;
}

std::string report_csv(const SuiteReport& report, bool include_wall_time) {
  std::ostringstream out;
  out << "dataset,seed,algorithm,lambda,iterations,ridge_solves,converged,final_objective,"
         "penalized_loss,kkt_max_violation,relative_mse,relative_prediction_error,error";
  if (include_wall_time) out << ",wall_seconds";
  out << '\n';
  for (const auto& r : report.rows) {
    out << r.dataset << ',' << r.seed << ',' << r.algorithm << ',' << io::format_double(r.lambda)
        << ',' << r.iterations << ',' << r.ridge_solves << ',' << (r.converged ? "true" : "false")
        << ',' << io::format_double(r.final_objective) << ',' << io::format_double(r.penalized_loss)
        << ',' << io::format_double(r.kkt_max_violation) << ',' << io::format_double(r.relative_mse)
        << ',' << io::format_double(r.relative_prediction_error) << ',' << csv_field(r.error);
    if (include_wall_time) out << ',' << io::format_double(r.wall_seconds);
    out << '\n';
  }
  return out.str();
}

nlohmann::ordered_json aggregate_json(const SuiteReport& report) {
  nlohmann::ordered_json j;
  j["name"] = report.config.name;
  j["config_hash"] = report.config.hash();
  j["config"] = report.config.to_json();
  j["lambda_source"] = report.config.lambda
                           ? "fixed by config"
                           : "moment plug-in estimate (heuristic, not a likelihood method)";
  j["datasets"] = report.config.repetitions;
  auto& algs = j["algorithms"];
  algs = nlohmann::ordered_json::array();
  for (const auto& a : report.aggregates) {
    algs.push_back({{"algorithm", a.algorithm},
                    {"runs", a.runs},
                    {"failures", a.failures},
                    {"converged", a.converged},
                    {"median_iterations", a.median_iterations},
                    {"mean_iterations", a.mean_iterations},
                    {"median_ridge_solves", a.median_ridge_solves},
                    {"mean_ridge_solves", a.mean_ridge_solves},
                    {"median_relative_mse", a.median_relative_mse},
                    {"mean_relative_mse", a.mean_relative_mse},
                    {"median_relative_prediction_error", a.median_relative_prediction_error},
                    {"mean_relative_prediction_error", a.mean_relative_prediction_error},
                    {"max_kkt_violation", a.max_kkt_violation}});
  }
  auto& pairs = j["pairwise"];
  pairs = nlohmann::ordered_json::array();
  for (const auto& c : report.pairwise) {
    pairs.push_back({{"a", c.a},
                     {"b", c.b},
                     {"compared", c.compared},
                     {"max_relative_difference", c.max_relative_difference},
                     {"median_relative_difference", c.median_relative_difference},
                     {"a_not_worse", c.a_not_worse}});
  }
  auto& prog = j["mean_progress"];
  prog = nlohmann::ordered_json::object();
  for (const auto& [alg, c] : report.mean_progress) {
    prog[alg] = {{"w", c.w}, {"ridge_solves", c.ridge_solves_per_point}, {"degenerate", c.degenerate}};
  }
  return j;
}

std::string progress_svg(const std::map<std::string, ProgressCurve>& curves,
                         const std::string& title) {
  constexpr double kPanelW = 420, kPanelH = 300, kPad = 45;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * kPanelW + 20 << "\" height=\""
      << kPanelH + 60 << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    svg << "<text x=\"" << kPanelW << "\" y=\"16\" text-anchor=\"middle\" font-size=\"13\">" << title
        << "</text>\n";
  }
  for (int panel = 0; panel < 2; ++panel) {
    const bool by_solves = panel == 1;
    double x_max = 1.0;
    for (const auto& [alg, c] : curves) {
      const double m = by_solves ? (c.ridge_solves_per_point.empty() ? 0.0 : c.ridge_solves_per_point.back())
                                 : static_cast<double>(c.w.size());
      x_max = std::max(x_max, m);
    }
    const double ox = panel * (kPanelW + 20) + kPad;
    const double oy = 30;
    const double w = kPanelW - kPad - 10;
    const double h = kPanelH - kPad;
    svg << "<rect x=\"" << ox << "\" y=\"" << oy << "\" width=\"" << w << "\" height=\"" << h
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << ox + w / 2 << "\" y=\"" << oy + h + 30 << "\" text-anchor=\"middle\">"
        << (by_solves ? "ridge solves" : "iteration") << "</text>\n";
    svg << "<text x=\"" << ox - 30 << "\" y=\"" << oy + h / 2 << "\">w</text>\n";
    svg << "<text x=\"" << ox - 5 << "\" y=\"" << oy + 4 << "\" text-anchor=\"end\">1</text>\n";
    svg << "<text x=\"" << ox - 5 << "\" y=\"" << oy + h << "\" text-anchor=\"end\">0</text>\n";
    svg << "<text x=\"" << ox + w << "\" y=\"" << oy + h + 14 << "\" text-anchor=\"end\">"
        << io::format_double(x_max) << "</text>\n";
    int color = 0;
    for (const auto& [alg, c] : curves) {
      const char* stroke = kPalette[color++ % 6];
      svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < c.w.size(); ++i) {
        double x;
        if (by_solves) {
          if (i >= c.ridge_solves_per_point.size()) break;
          x = c.ridge_solves_per_point[i];
        } else {
          x = static_cast<double>(i + 1);
        }
        const double y = std::clamp(c.w[i], 0.0, 1.0);
        svg << ox + w * x / x_max << ',' << oy + h * (1.0 - y) << ' ';
      }
      svg << "\"/>\n";
      if (panel == 0) {
        svg << "<text x=\"" << ox + w - 60 << "\" y=\"" << oy + h - 12 * color << "\" fill=\"" << stroke
            << "\">" << alg << "</text>\n";
      }
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

std::filesystem::path write_suite(const SuiteReport& report, const std::filesystem::path& out_root) {
  const auto dir = out_root / (report.config.name + "-" + report.config.hash());
  std::filesystem::create_directories(dir);
  auto write = [&](const char* file, const std::string& content) {
    std::ofstream out(dir / file);
    if (!out) throw IoError((dir / file).string() + ": cannot open for writing");
    out << content;
  };
  write("report.csv", report_csv(report));
  write("aggregate.json", aggregate_json(report).dump(2) + "\n");
  write("progress.svg", progress_svg(report.mean_progress, report.config.name));
  write("config.json", report.config.to_json().dump(2) + "\n");
  return dir;
}

std::string trace_csv(const SolverTrace& trace) {
  std::ostringstream out;
  out << "iteration,objective,surrogate,statistic,ridge_solves\n";
  for (std::size_t i = 0; i < trace.objective.size(); ++i) {
    out << i + 1 << ',' << io::format_double(trace.objective[i]) << ','
        << (i < trace.surrogate.size() ? io::format_double(trace.surrogate[i]) : "") << ','
        << (i < trace.statistic.size() ? io::format_double(trace.statistic[i]) : "") << ','
        << (i < trace.ridge_solves_cumulative.size() ? std::to_string(trace.ridge_solves_cumulative[i]) : "")
        << '\n';
  }
  return out.str();
}

nlohmann::ordered_json trace_json(const SolverTrace& trace) {
  nlohmann::ordered_json j;
  j["algorithm"] = trace.algorithm;
  j["converged"] = trace.converged;
  j["iterations"] = trace.iterations;
  j["ridge_solves"] = trace.ridge_solves;
  j["coordinate_sweeps"] = trace.coordinate_sweeps;
  j["inner_steps"] = trace.inner_steps;
  j["numerical_warning"] = trace.numerical_warning;
  j["initial_objective"] = trace.initial_objective;
  j["final_objective"] = trace.final_objective();
  j["objective"] = trace.objective;
  j["surrogate"] = trace.surrogate;
  j["statistic"] = trace.statistic;
  j["ridge_solves_cumulative"] = trace.ridge_solves_cumulative;
  j["beta"] = std::vector<double>(trace.final_beta.data(), trace.final_beta.data() + trace.final_beta.size());
  return j;
}

}  // namespace hadamard::bench

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hadamard/linear_solvers.hpp"
#include "hadamard/simgen.hpp"
#include "json.hpp"

namespace hadamard::bench {

/// Normalized progress w_i = (f_max - f_i) / (f_max - f_min) of one algorithm.
struct ProgressCurve {
  std::vector<double> w;
  double f_max = 0.0;
  double f_min = 0.0;
  std::vector<double> ridge_solves_per_point;  // cumulative ridge solves at each point
  bool degenerate = false;                     // f_max == f_min; w is all ones
};

/// All algorithms ran on the same dataset. f_max is the largest first-iterate
/// objective, f_min the smallest objective at the last iteration every
/// algorithm reached; longer runs are truncated to that common length.
/// ridge_solves, when given, holds the cumulative counts per algorithm.
std::map<std::string, ProgressCurve> progress_normalize(
    const std::map<std::string, std::vector<double>>& objectives,
    const std::map<std::string, std::vector<long>>& ridge_solves = {});

/// Pointwise mean over datasets, truncated to the shortest curve per algorithm.
std::map<std::string, ProgressCurve> average_curves(
    const std::vector<std::map<std::string, ProgressCurve>>& per_dataset);

enum class RunMode { converge, fixed };

/// Suite description, read from JSON:
///   {"name": "...", "design": {SimDesign fields}, "repetitions": 100,
///    "algorithms": ["hpp", "lqa", "ccd"], "K": 2, "lambda": 1.5 | "auto",
///    "lqa_epsilon": 1e-12, "delta": 1e-6, "inner_delta": 1e-10,
///    "max_iterations": 10000, "mode": "converge" | "fixed",
///    "fixed_iterations": 50, "threads": 1}
/// Dataset r uses seed design.seed + r.
struct SuiteConfig {
  std::string name = "suite";
  SimDesign design;
  int repetitions = 1;
  std::vector<std::string> algorithms{"hpp", "lqa", "ccd"};
  int K = 2;
  std::optional<double> lambda;  // empty: moment plug-in per dataset
  double lqa_epsilon = LqaConfig{}.epsilon;
  double delta = 1e-6;
  double inner_delta = 1e-10;
  int max_iterations = 10000;
  RunMode mode = RunMode::converge;
  int fixed_iterations = 50;
  int threads = 1;

  /// Throws ArgumentError for unknown algorithms, algorithms that do not
  /// apply to q = 2/K or the family, and out-of-range numbers.
  void validate() const;
  nlohmann::json to_json() const;
  static SuiteConfig from_json(const nlohmann::json& j);
  /// 16 hex digits of FNV-1a over the canonical JSON, threads excluded.
  std::string hash() const;
};

struct SuiteRow {
  int dataset = 0;
  std::uint64_t seed = 0;
  std::string algorithm;
  double lambda = 0.0;
  int iterations = 0;
  long ridge_solves = 0;
  bool converged = false;
  double final_objective = 0.0;
  /// |y - X beta|^2 + penalty (final_objective + y^T y) for gaussian rows,
  /// final_objective for GLM rows.
  double penalized_loss = 0.0;
  double kkt_max_violation = 0.0;  // NaN unless gaussian lasso
  double relative_mse = 0.0;       // |beta_hat - beta|^2 / |beta|^2
  double relative_prediction_error = 0.0;  // |X (beta_hat - beta)|^2 / |X beta|^2
  double wall_seconds = 0.0;
  std::string error;  // non-empty when the solver threw
};

struct AlgorithmAggregate {
  std::string algorithm;
  int runs = 0;
  int failures = 0;
  int converged = 0;
  double median_iterations = 0.0;
  double mean_iterations = 0.0;
  double median_ridge_solves = 0.0;
  double mean_ridge_solves = 0.0;
  double median_relative_mse = 0.0;
  double mean_relative_mse = 0.0;
  double median_relative_prediction_error = 0.0;
  double mean_relative_prediction_error = 0.0;
  double max_kkt_violation = 0.0;  // over converged runs, NaN when not applicable
};

/// Final objectives of two algorithms over the datasets where both succeeded.
struct PairwiseComparison {
  std::string a;
  std::string b;
  int compared = 0;
  double max_relative_difference = 0.0;  // |f_a - f_b| / max(|f_a|, |f_b|)
  double median_relative_difference = 0.0;
  int a_not_worse = 0;  // datasets with f_a <= f_b
};

struct SuiteReport {
  SuiteConfig config;
  std::vector<SuiteRow> rows;  // sorted by (dataset, algorithm order in config)
  std::vector<AlgorithmAggregate> aggregates;
  std::vector<PairwiseComparison> pairwise;
  std::map<std::string, ProgressCurve> mean_progress;
};

double median(std::vector<double> values);

/// Deterministic reduction over rows, in config algorithm order.
std::vector<AlgorithmAggregate> aggregate_rows(const std::vector<SuiteRow>& rows,
                                               const std::vector<std::string>& algorithms);

std::vector<PairwiseComparison> pairwise_comparisons(const std::vector<SuiteRow>& rows,
                                                     const std::vector<std::string>& algorithms);

struct DatasetResult {
  std::vector<SuiteRow> rows;  // one per algorithm, in config order
  std::map<std::string, ProgressCurve> progress;
};

/// Runs every configured algorithm on one dataset from the shared start
/// (least squares or ridge for gaussian data, a ridge GLM fit otherwise).
DatasetResult run_dataset(const SuiteConfig& config, const Dataset& data, Family family,
                          int index, std::uint64_t seed);

/// Generates the datasets, runs every algorithm from the shared start and
/// aggregates. Solver exceptions become rows with a non-empty error.
SuiteReport run_suite(const SuiteConfig& config);

/// report.csv content; include_wall_time = false drops the timing column.
std::string report_csv(const SuiteReport& report, bool include_wall_time = true);

nlohmann::ordered_json aggregate_json(const SuiteReport& report);

/// Two panels: mean progress against iteration and against ridge solves.
std::string progress_svg(const std::map<std::string, ProgressCurve>& curves,
                         const std::string& title = "");

/// Writes report.csv, aggregate.json and progress.svg into
/// out_root / (name + "-" + hash) and returns that directory.
std::filesystem::path write_suite(const SuiteReport& report, const std::filesystem::path& out_root);

/// Per-iteration CSV: iteration,objective,surrogate,statistic,ridge_solves.
std::string trace_csv(const SolverTrace& trace);

nlohmann::ordered_json trace_json(const SolverTrace& trace);

}  // namespace hadamard::bench

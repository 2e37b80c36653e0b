#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "hadamard/glm.hpp"
#include "hadamard/model.hpp"
#include "json.hpp"

namespace hadamard {

enum class DesignKind { iid_normal, low_rank_plus_noise };

std::string to_string(DesignKind kind);
DesignKind design_kind_from_name(const std::string& name);

/// Simulation design. Coefficients are exactly zero with probability
/// `sparsity` and N(0, beta_sd^2) otherwise.
struct SimDesign {
  Index n = 150;
  Index p = 100;
  double sparsity = 0.5;
  double beta_sd = 0.5;
  DesignKind design_kind = DesignKind::iid_normal;
  double rank_fraction = 0.1;  // r = round(p * rank_fraction) for low-rank designs
  Family family = Family::gaussian;  // gaussian or logistic
  std::uint64_t seed = 0;

  Index rank() const;
  /// Throws ArgumentError for out-of-range fields.
  void validate() const;
};

void to_json(nlohmann::json& j, const SimDesign& d);
void from_json(const nlohmann::json& j, SimDesign& d);

struct Dataset {
  MatrixXd X;
  VectorXd y;
  VectorXd beta_true;
};

/// Draw order: beta_true, then the design, then the response. Fully
/// determined by design.seed.
Dataset generate_dataset(const SimDesign& design);

/// Centers each column and scales it so that sum_i x_ij^2 = n.
/// Throws ArgumentError for n < 2 or a constant column.
MatrixXd column_standardize(const MatrixXd& X);

struct MomentLambda {
  double lambda = 0.0;
  double sigma_sq = 0.0;  // residual variance estimate
  double m2 = 0.0;        // second-moment estimate of the coefficients, after flooring
  bool floored = false;   // m2 hit its 1e-8 floor
};

inline constexpr double kMomentFloor = 1e-8;

/// Moment plug-in for lambda (not a likelihood method). With OLS estimates
/// beta_hat and residual variance s2, m2 = max(mean(beta_hat^2) - s2 tr((X^T X)^{-1}) / p, 1e-8)
/// is matched to the second moment of the prior proportional to
/// exp(-lambda |b|^q / (2 s2)); for q = 1 this is lambda = s2 sqrt(8 / m2).
/// Throws UnsupportedError when n <= p and ArgumentError without a stored design.
MomentLambda moment_lambda_details(const RegressionProblem& problem, double q = 1.0);

double moment_lambda(const RegressionProblem& problem, double q = 1.0);

/// Writes X.csv, y.csv, beta_true.csv and manifest.json into dir.
void export_dataset(const Dataset& data, const SimDesign& design,
                    const std::filesystem::path& dir);

}  // namespace hadamard

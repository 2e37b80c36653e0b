#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace hadamard {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Index = Eigen::Index;

/// Linear regression data in moment form. Q = X^T X and l = X^T y are
/// computed once on construction and shared read-only by every solver.
class RegressionProblem {
 public:
  /// Builds from a design and response; Q and l are computed here.
  static RegressionProblem from_data(MatrixXd X, VectorXd y, double noise_variance = 1.0);

  /// Builds directly from (Q, l) without a stored design. Q must be
  /// symmetric; n is informational only.
  static RegressionProblem from_moments(MatrixXd Q, VectorXd l, Index n = 1,
                                        double noise_variance = 1.0);

  bool has_design() const { return has_design_; }
  const MatrixXd& X() const;
  const VectorXd& y() const;
  const MatrixXd& Q() const { return Q_; }
  const VectorXd& l() const { return l_; }
  Index n() const { return n_; }
  Index p() const { return Q_.rows(); }
  double noise_variance() const { return noise_variance_; }

  /// sum_k x_{k,j}^2 for every column, i.e. diag(Q).
  VectorXd column_norms_sq() const { return Q_.diagonal(); }

 private:
  RegressionProblem() = default;

  MatrixXd X_;
  VectorXd y_;
  MatrixXd Q_;
  VectorXd l_;
  Index n_ = 0;
  double noise_variance_ = 1.0;
  bool has_design_ = false;
};

/// Gaussian-precision penalties u^T P_u u + v^T P_v v replacing the
/// isotropic factor penalty (K = 2 only).
struct StructuredPenalty {
  MatrixXd precision_u;
  MatrixXd precision_v;

  /// Inverts two symmetric positive definite covariance matrices.
  /// Throws ArgumentError when either is not SPD.
  static StructuredPenalty from_covariances(const MatrixXd& sigma_u, const MatrixXd& sigma_v);
};

/// L_q penalty with q = 2/K and multiplier lambda; optionally structured.
class PenaltySpec {
 public:
  PenaltySpec(int K, double lambda);
  PenaltySpec(double lambda, StructuredPenalty structure);

  int K() const { return K_; }
  double lambda() const { return lambda_; }
  double q() const { return 2.0 / K_; }
  bool is_structured() const { return structure_.has_value(); }
  const StructuredPenalty& structure() const;

 private:
  int K_;
  double lambda_;
  std::optional<StructuredPenalty> structure_;
};

/// K factor vectors whose Hadamard product is beta. The cached product is
/// refreshed by refresh(); solvers call it after every factor update.
struct FactorState {
  std::vector<VectorXd> factors;
  VectorXd beta;

  FactorState() = default;
  explicit FactorState(std::vector<VectorXd> f);

  int K() const { return static_cast<int>(factors.size()); }
  Index p() const { return beta.size(); }
  void refresh();

  /// Product of all factors except factor k, formed by direct multiplication.
  VectorXd leave_one_out(int k) const;
};

/// Canonical K-factor split: |u_{k,j}| = |beta_j|^{1/K}, sign on factor 1.
FactorState factor_split(const VectorXd& beta, int K);

/// |x|^q with 0^q = 0 for every q > 0.
double abs_pow(double x, double q);

/// sum_j |beta_j|^q.
double lq_norm_q(const VectorXd& beta, double q);

/// h(beta) = beta^T Q beta - 2 beta^T l.
double quadratic_loss(const RegressionProblem& problem, const VectorXd& beta);

/// f(beta) = h(beta) + lambda * sum_j |beta_j|^q. Unstructured specs only.
double objective_beta(const RegressionProblem& problem, const PenaltySpec& spec,
                      const VectorXd& beta);

/// g(u_1..u_K) = h(u_1 o ... o u_K) + (lambda/K) sum_k |u_k|^2, or the
/// structured form h(u o v) + u^T P_u u + v^T P_v v.
double objective_factors(const RegressionProblem& problem, const PenaltySpec& spec,
                         const FactorState& state);

struct KktReport {
  double max_violation = 0.0;
  bool is_optimal = true;
  VectorXd per_coordinate;
  VectorXd subgradient;  // s_j = 2 (l_j - [Q beta]_j) / lambda
};

inline constexpr double kDefaultKktTol = 1e-6;

/// Lasso optimality check. Coordinates with |beta_j| <= zero_threshold are
/// held to the zero condition |s_j| <= 1; the default threshold of 0 treats
/// only exact zeros that way.
KktReport kkt_check(const RegressionProblem& problem, double lambda, const VectorXd& beta,
                    double tol = kDefaultKktTol, double zero_threshold = 0.0);

struct InnerMinimum {
  VectorXd v;
  double value;
};

/// Closed-form minimizer of ||beta / v||^2 + ||v||^2 over v: v_j = sqrt|beta_j|,
/// minimum value 2 ||beta||_1.
InnerMinimum lemma1_inner_min(const VectorXd& beta);

}  // namespace hadamard

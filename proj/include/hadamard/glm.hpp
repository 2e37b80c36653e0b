#pragma once

#include <string>
#include <string_view>

#include "hadamard/linear_solvers.hpp"
#include "hadamard/model.hpp"

namespace hadamard {

enum class Family { gaussian, poisson, logistic };

/// Exponential-family cumulant A(eta) with its first two derivatives.
/// Dispersion is fixed at 1.
class GlmFamily {
 public:
  explicit GlmFamily(Family family) : family_(family) {}

  /// "gaussian", "poisson" or "logistic"; throws ArgumentError otherwise.
  static GlmFamily from_name(std::string_view name);

  Family kind() const { return family_; }
  std::string name() const;

  double A(double eta) const;
  double A_dot(double eta) const;
  double A_ddot(double eta) const;

  /// Throws ArgumentError when y is outside the family's support.
  void check_response(const VectorXd& y) const;

 private:
  Family family_;
};

/// GLM data: design, response and family, with ly = X^T y cached.
class GlmProblem {
 public:
  GlmProblem(MatrixXd X, VectorXd y, GlmFamily family);

  const MatrixXd& X() const { return X_; }
  const VectorXd& y() const { return y_; }
  const GlmFamily& family() const { return family_; }
  const VectorXd& ly() const { return ly_; }
  Index n() const { return X_.rows(); }
  Index p() const { return X_.cols(); }
  VectorXd column_norms_sq() const { return X_.colwise().squaredNorm().transpose(); }

 private:
  MatrixXd X_;
  VectorXd y_;
  GlmFamily family_;
  VectorXd ly_;
};

/// 2 sum_i A(x_i^T beta) - 2 beta^T X^T y. Throws OverflowError naming the
/// offending eta when A is not finite.
double glm_loss(const GlmProblem& problem, const VectorXd& beta);

/// glm_loss + lambda sum_j |beta_j|^q.
double glm_objective(const GlmProblem& problem, const PenaltySpec& spec, const VectorXd& beta);

/// glm_loss(u_1 o ... o u_K) + (lambda/K) sum_k |u_k|^2.
double glm_objective_factors(const GlmProblem& problem, const PenaltySpec& spec,
                             const FactorState& state);

struct NewtonConfig {
  double tolerance = 1e-8;  // on the gradient sup-norm
  int max_steps = 50;
  int max_halvings = 30;
};

struct NewtonResult {
  VectorXd u;
  int steps = 0;
  bool converged = false;
};

/// Objective of one factor block with co-factor product v held fixed:
/// 2 sum_i A((u o v)^T x_i) - 2 (u o v)^T X^T y + ridge |u|^2.
double factor_block_objective(const GlmProblem& problem, const VectorXd& v, const VectorXd& u,
                              double ridge);

/// d = 2 (v o X^T (A'(eta) - y) + ridge u).
VectorXd factor_block_gradient(const GlmProblem& problem, const VectorXd& v, const VectorXd& u,
                               double ridge);

/// H = 2 (v v^T o X^T diag(A''(eta)) X + ridge I).
MatrixXd factor_block_hessian(const GlmProblem& problem, const VectorXd& v, const VectorXd& u,
                              double ridge);

/// Damped Newton minimization of factor_block_objective in u. Each step is
/// halved until the objective does not increase.
NewtonResult newton_inner(const GlmProblem& problem, const VectorXd& v, const VectorXd& u_init,
                          double ridge, const NewtonConfig& newton = {});

/// HPP for GLMs: cycles over the K factors, one newton_inner call per factor.
/// ridge_solves and inner_steps count Newton steps.
SolverTrace solve_hpp_glm(const GlmProblem& problem, const PenaltySpec& spec,
                          const FactorState& init, ConvergenceConfig conv,
                          const NewtonConfig& newton = {});

/// LQA for GLMs: each outer iteration freezes D at the current beta and
/// minimizes glm_loss + (q lambda / 2) b^T D b by damped Newton.
SolverTrace solve_lqa_glm(const GlmProblem& problem, const PenaltySpec& spec,
                          const VectorXd& init_beta, const LqaConfig& lqa, ConvergenceConfig conv,
                          const NewtonConfig& newton = {});

/// LLA for GLMs (q < 1). Each outer iteration solves the weighted-L1 GLM
/// problem by IRLS: the quadratic expansion at the current point gives a
/// weighted lasso solved by solve_ccd under inner_conv. Variance weights are
/// floored at 1e-10. newton.max_steps bounds the IRLS iterations.
SolverTrace solve_lla_glm(const GlmProblem& problem, const PenaltySpec& spec,
                          const VectorXd& init_beta, ConvergenceConfig conv,
                          ConvergenceConfig inner_conv, const NewtonConfig& newton = {});

inline constexpr double kIrlsWeightFloor = 1e-10;

/// argmin_b glm_loss(b) + ridge |b|^2 by damped Newton from b = 0. With
/// ridge = lambda / 2 this is the GLM counterpart of the linear ridge start.
VectorXd glm_ridge_start(const GlmProblem& problem, double ridge, const NewtonConfig& newton = {});

}  // namespace hadamard

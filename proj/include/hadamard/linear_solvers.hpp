#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hadamard/model.hpp"

namespace hadamard {

/// Stopping rule shared by every solver: stop once
///   max_j (beta_prev_j - beta_next_j)^2 * sum_k x_{k,j}^2 <= delta.
struct ConvergenceConfig {
  double delta = 1e-6;
  int max_iterations = 10000;
  /// false runs exactly max_iterations iterations (fixed-iteration progress runs).
  bool stop_on_convergence = true;
  /// Log the minimized objective after every block/coordinate update.
  bool record_updates = false;
  /// Empty means diag(Q) of the problem being solved.
  VectorXd column_norms_sq;

  static ConvergenceConfig for_problem(const RegressionProblem& problem, double delta = 1e-6,
                                       int max_iterations = 10000);
};

/// Perturbation for local quadratic approximation.
struct LqaConfig {
  double epsilon = 1e-12;
};

/// Per-run record. Vectors are indexed by iteration (entry 0 = after the
/// first iteration).
struct SolverTrace {
  std::string algorithm;
  std::vector<double> objective;   // f(beta) at each iterate
  std::vector<double> surrogate;   // the objective each iteration minimizes exactly
  std::vector<double> statistic;   // convergence statistic against the previous iterate
  std::vector<long> ridge_solves_cumulative;
  std::vector<double> update_objectives;  // filled when record_updates is set
  double initial_objective = 0.0;
  long ridge_solves = 0;
  long coordinate_sweeps = 0;
  long inner_steps = 0;
  int iterations = 0;
  bool converged = false;
  bool numerical_warning = false;
  VectorXd final_beta;
  std::optional<FactorState> final_factors;

  double final_objective() const { return objective.empty() ? initial_objective : objective.back(); }
};

double convergence_statistic(const VectorXd& beta_prev, const VectorXd& beta_next,
                             const VectorXd& column_norms_sq);

/// S(z, t) = sign(z) max(|z| - t, 0); exactly 0 when |z| <= t.
double soft_threshold(double z, double t);

/// Cholesky solve of a symmetric positive definite system.
/// Throws NumericalError when the factorization fails.
VectorXd spd_solve(const MatrixXd& M, const VectorXd& rhs);

/// (Q o v v^T + ridge I)^{-1} (l o v).
VectorXd hadamard_ridge_update(const MatrixXd& Q, const VectorXd& l, const VectorXd& v,
                               double ridge);

/// (Q o v v^T + P)^{-1} (l o v) for a symmetric positive definite precision P.
VectorXd hadamard_ridge_update(const MatrixXd& Q, const VectorXd& l, const VectorXd& v,
                               const MatrixXd& precision);

/// Unpenalized least squares when n > p, otherwise the ridge solution
/// (Q + lambda/2 I)^{-1} l.
VectorXd default_initial_beta(const RegressionProblem& problem, double lambda);

inline constexpr double kZeroFactorInit = 1e-3;

/// Factor start from beta0: u_1 = sign(beta0)|beta0|^{1/K}, the rest |beta0|^{1/K};
/// zero entries start at 1e-3 in every factor.
FactorState initial_factors(const VectorXd& beta0, int K);

/// LQA diagonal |b|^{q-1} / (|b| + eps), capped at 1/eps^2. Sets *clamped when the cap applies.
double lqa_weight(double beta_j, double q, double epsilon, bool* clamped);

/// Alternating ridge regressions over K Hadamard factors.
SolverTrace solve_hpp(const RegressionProblem& problem, const PenaltySpec& spec,
                      const FactorState& init, ConvergenceConfig conv);

/// Perturbed local quadratic approximation: one ridge solve per iteration.
SolverTrace solve_lqa(const RegressionProblem& problem, const PenaltySpec& spec,
                      const VectorXd& init_beta, const LqaConfig& lqa, ConvergenceConfig conv);

/// Cyclic coordinate descent ("shooting") for sum_j w_j lambda |beta_j|.
/// Infinite weights pin a coordinate at zero.
SolverTrace solve_ccd(const RegressionProblem& problem, double lambda,
                      const std::optional<VectorXd>& weights, const VectorXd& init_beta,
                      ConvergenceConfig conv);

/// Local linear approximation for 0 < q < 1. Each outer step solves the weighted
/// lasso with penalty lambda * sum_j q |beta_j|^{q-1} |b_j| (the tangent of
/// lambda |b|^q); coordinates at exactly zero stay frozen for that step.
SolverTrace solve_lla(const RegressionProblem& problem, const PenaltySpec& spec,
                      const VectorXd& init_beta, ConvergenceConfig conv,
                      ConvergenceConfig inner_conv);

/// One CCD sweep, then two support-restricted Hadamard ridge updates.
SolverTrace solve_hpcd(const RegressionProblem& problem, double lambda, const VectorXd& init_beta,
                       ConvergenceConfig conv);

/// One CCD sweep, then a support-restricted LQA update.
SolverTrace solve_lqcd(const RegressionProblem& problem, double lambda, const VectorXd& init_beta,
                       const LqaConfig& lqa, ConvergenceConfig conv);

}  // namespace hadamard

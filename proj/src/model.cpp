#include "hadamard/model.hpp"

#include <cmath>
#include <string>

#include "hadamard/errors.hpp"

namespace hadamard {

namespace {

void require_square_symmetric(const MatrixXd& M, const char* name) {
  if (M.rows() != M.cols()) {
    throw ArgumentError(std::string(name) + " must be square");
  }
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ArgumentError(std::string(name) + " must be symmetric");
  }
}

}  // namespace

RegressionProblem RegressionProblem::from_data(MatrixXd X, VectorXd y, double noise_variance) {
  if (X.rows() < 1 || X.cols() < 1) {
    throw ArgumentError("design must have at least one row and one column");
  }
  if (X.rows() != y.size()) {
    throw ArgumentError("design has " + std::to_string(X.rows()) + " rows but response has " +
                        std::to_string(y.size()) + " entries");
  }
  if (!(noise_variance > 0.0)) {
    throw ArgumentError("noise variance must be positive");
  }
  RegressionProblem problem;
  problem.Q_.noalias() = X.transpose() * X;
  // Exact symmetry; the product above can differ in the last bit across the diagonal.
  problem.Q_ = 0.5 * (problem.Q_ + problem.Q_.transpose()).eval();
  problem.l_.noalias() = X.transpose() * y;
  problem.n_ = X.rows();
  problem.X_ = std::move(X);
  problem.y_ = std::move(y);
  problem.noise_variance_ = noise_variance;
  problem.has_design_ = true;
  return problem;
}

RegressionProblem RegressionProblem::from_moments(MatrixXd Q, VectorXd l, Index n,
                                                  double noise_variance) {
  if (Q.rows() < 1) {
    throw ArgumentError("Q must be non-empty");
  }
  require_square_symmetric(Q, "Q");
  if (Q.rows() != l.size()) {
    throw ArgumentError("Q is " + std::to_string(Q.rows()) + "x" + std::to_string(Q.cols()) +
                        " but l has " + std::to_string(l.size()) + " entries");
  }
  if (n < 1) {
    throw ArgumentError("n must be at least 1");
  }
  if (!(noise_variance > 0.0)) {
    throw ArgumentError("noise variance must be positive");
  }
  RegressionProblem problem;
  problem.Q_ = std::move(Q);
  problem.l_ = std::move(l);
  problem.n_ = n;
  problem.noise_variance_ = noise_variance;
  return problem;
}

const MatrixXd& RegressionProblem::X() const {
  if (!has_design_) {
    throw ArgumentError("problem was built from moments and carries no design matrix");
  }
  return X_;
}

const VectorXd& RegressionProblem::y() const {
  if (!has_design_) {
    throw ArgumentError("problem was built from moments and carries no response");
  }
  return y_;
}

StructuredPenalty StructuredPenalty::from_covariances(const MatrixXd& sigma_u,
                                                      const MatrixXd& sigma_v) {
  auto invert = [](const MatrixXd& sigma, const char* name) {
    require_square_symmetric(sigma, name);
    Eigen::LLT<MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
      throw ArgumentError(std::string(name) + " is not positive definite");
    }
    MatrixXd precision = llt.solve(MatrixXd::Identity(sigma.rows(), sigma.cols()));
    return MatrixXd(0.5 * (precision + precision.transpose()));
  };
  if (sigma_u.rows() != sigma_v.rows()) {
    throw ArgumentError("sigma_u and sigma_v dimensions differ");
  }
  return {invert(sigma_u, "sigma_u"), invert(sigma_v, "sigma_v")};
}

PenaltySpec::PenaltySpec(int K, double lambda) : K_(K), lambda_(lambda) {
  if (K < 1) {
    throw ArgumentError("number of factors K must be at least 1");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ArgumentError("lambda must be finite and nonnegative");
  }
}

PenaltySpec::PenaltySpec(double lambda, StructuredPenalty structure)
    : K_(2), lambda_(lambda), structure_(std::move(structure)) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ArgumentError("lambda must be finite and nonnegative");
  }
  if (structure_->precision_u.rows() != structure_->precision_v.rows()) {
    throw ArgumentError("structured precisions have different dimensions");
  }
}

const StructuredPenalty& PenaltySpec::structure() const {
  if (!structure_) {
    throw ArgumentError("penalty is isotropic");
  }
  return *structure_;
}

FactorState::FactorState(std::vector<VectorXd> f) : factors(std::move(f)) {
  if (factors.empty()) {
    throw ArgumentError("factor state needs at least one factor");
  }
  for (const auto& u : factors) {
    if (u.size() != factors.front().size()) {
      throw ArgumentError("factor vectors have different lengths");
    }
  }
  refresh();
}

void FactorState::refresh() {
  beta = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) {
    beta.array() *= factors[k].array();
  }
}

VectorXd FactorState::leave_one_out(int k) const {
  VectorXd v = VectorXd::Ones(p());
  for (int other = 0; other < K(); ++other) {
    if (other != k) {
      v.array() *= factors[other].array();
    }
  }
  return v;
}

FactorState factor_split(const VectorXd& beta, int K) {
  if (K < 1) {
    throw ArgumentError("number of factors K must be at least 1");
  }
  const double root = 1.0 / K;
  VectorXd magnitude = beta.unaryExpr([root](double b) { return std::pow(std::abs(b), root); });
  std::vector<VectorXd> factors(K, magnitude);
  factors[0] = beta.unaryExpr([root](double b) {
    const double m = std::pow(std::abs(b), root);
    return b < 0.0 ? -m : m;
  });
  return FactorState(std::move(factors));
}

double abs_pow(double x, double q) {
  if (x == 0.0) {
    return 0.0;
  }
  return q == 1.0 ? std::abs(x) : std::pow(std::abs(x), q);
}

double lq_norm_q(const VectorXd& beta, double q) {
  double total = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    total += abs_pow(beta[j], q);
  }
  return total;
}

double quadratic_loss(const RegressionProblem& problem, const VectorXd& beta) {
  if (beta.size() != problem.p()) {
    throw ArgumentError("beta has " + std::to_string(beta.size()) + " entries, expected " +
                        std::to_string(problem.p()));
  }
  return beta.dot(problem.Q() * beta) - 2.0 * beta.dot(problem.l());
}

double objective_beta(const RegressionProblem& problem, const PenaltySpec& spec,
                      const VectorXd& beta) {
  if (spec.is_structured()) {
    throw ArgumentError("objective_beta is defined for isotropic penalties only");
  }
  return quadratic_loss(problem, beta) + spec.lambda() * lq_norm_q(beta, spec.q());
}

double objective_factors(const RegressionProblem& problem, const PenaltySpec& spec,
                         const FactorState& state) {
  if (state.p() != problem.p()) {
    throw ArgumentError("factor length does not match problem dimension");
  }
  const double loss = quadratic_loss(problem, state.beta);
  if (spec.is_structured()) {
    if (state.K() != 2) {
      throw ArgumentError("structured penalties require exactly two factors");
    }
    const auto& s = spec.structure();
    if (s.precision_u.rows() != problem.p()) {
      throw ArgumentError("structured precision does not match problem dimension");
    }
    const auto& u = state.factors[0];
    const auto& v = state.factors[1];
    return loss + u.dot(s.precision_u * u) + v.dot(s.precision_v * v);
  }
  if (state.K() != spec.K()) {
    throw ArgumentError("factor count does not match penalty K");
  }
  double ridge = 0.0;
  for (const auto& u : state.factors) {
    ridge += u.squaredNorm();
  }
  return loss + spec.lambda() / spec.K() * ridge;
}

KktReport kkt_check(const RegressionProblem& problem, double lambda, const VectorXd& beta,
                    double tol, double zero_threshold) {
  if (!(lambda > 0.0)) {
    throw ArgumentError("KKT conditions need lambda > 0");
  }
  if (beta.size() != problem.p()) {
    throw ArgumentError("beta has " + std::to_string(beta.size()) + " entries, expected " +
                        std::to_string(problem.p()));
  }
  KktReport report;
  report.subgradient = 2.0 * (problem.l() - problem.Q() * beta) / lambda;
  report.per_coordinate.resize(beta.size());
  for (Index j = 0; j < beta.size(); ++j) {
    const double s = report.subgradient[j];
    if (std::abs(beta[j]) > zero_threshold && beta[j] != 0.0) {
      report.per_coordinate[j] = std::abs(s - (beta[j] > 0.0 ? 1.0 : -1.0));
    } else {
      report.per_coordinate[j] = std::max(std::abs(s) - 1.0, 0.0);
    }
  }
  report.max_violation = report.per_coordinate.size() ? report.per_coordinate.maxCoeff() : 0.0;
  report.is_optimal = report.max_violation <= tol;
  return report;
}

InnerMinimum lemma1_inner_min(const VectorXd& beta) {
  InnerMinimum result;
  result.v = beta.cwiseAbs().cwiseSqrt();
  result.value = 2.0 * beta.lpNorm<1>();
  return result;
}

}  // namespace hadamard

#include "hadamard/glm.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "hadamard/errors.hpp"
#include "solver_detail.hpp"

namespace hadamard {

namespace {

using detail::IterationLog;
using detail::require_length;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string eta_message(const GlmFamily& family, double eta) {
  std::ostringstream os;
  os.precision(17);
  os << family.name() << " cumulant overflow at eta = " << eta;
  return os.str();
}

// 2 sum_i A(eta_i) - 2 beta^T ly; +inf on overflow, with the first bad eta in *bad_eta.
double loss_or_inf(const GlmProblem& problem, const VectorXd& beta, double* bad_eta = nullptr) {
  const VectorXd eta = problem.X() * beta;
  double total = 0.0;
  for (Index i = 0; i < eta.size(); ++i) {
    const double a = problem.family().A(eta[i]);
    if (!std::isfinite(a)) {
      if (bad_eta) *bad_eta = eta[i];
      return kInf;
    }
    total += a;
  }
  const double value = 2.0 * total - 2.0 * beta.dot(problem.ly());
  return std::isfinite(value) ? value : kInf;
}

VectorXd mean_vector(const GlmProblem& problem, const VectorXd& eta) {
  VectorXd mu(eta.size());
  for (Index i = 0; i < eta.size(); ++i) mu[i] = problem.family().A_dot(eta[i]);
  return mu;
}

VectorXd variance_vector(const GlmProblem& problem, const VectorXd& eta) {
  VectorXd w(eta.size());
  for (Index i = 0; i < eta.size(); ++i) w[i] = problem.family().A_ddot(eta[i]);
  return w;
}

MatrixXd weighted_gram(const MatrixXd& X, const VectorXd& w) {
  return X.transpose() * (w.asDiagonal() * X);
}

// Damped Newton: full step, halved until the objective does not increase.
template <typename Objective, typename Gradient, typename Hessian>
NewtonResult damped_newton(VectorXd x, Objective objective, Gradient gradient, Hessian hessian,
                           const NewtonConfig& cfg) {
  NewtonResult result;
  double fx = objective(x);
  if (!std::isfinite(fx)) {
    throw NumericalError("Newton start point has a non-finite objective");
  }
  VectorXd d = gradient(x);
  while (result.steps < cfg.max_steps) {
    if (d.lpNorm<Eigen::Infinity>() <= cfg.tolerance) break;
    const VectorXd step = spd_solve(hessian(x), d);
    const double slack = 1e-14 * std::max(1.0, std::abs(fx));
    double t = 1.0;
    bool accepted = false;
    VectorXd candidate;
    double fc = kInf;
    for (int h = 0; h <= cfg.max_halvings; ++h) {
      candidate = x - t * step;
      fc = objective(candidate);
      if (fc <= fx + slack) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    ++result.steps;
    if (!accepted) break;
    x = std::move(candidate);
    fx = fc;
    d = gradient(x);
  }
  result.converged = d.lpNorm<Eigen::Infinity>() <= cfg.tolerance;
  result.u = std::move(x);
  return result;
}

void check_newton(const NewtonConfig& cfg) {
  if (!(cfg.tolerance > 0.0) || cfg.max_steps < 1 || cfg.max_halvings < 0) {
    throw ArgumentError("Newton config needs tolerance > 0, max_steps >= 1, max_halvings >= 0");
  }
}

void check_isotropic(const PenaltySpec& spec, const char* name) {
  if (spec.is_structured()) {
    throw ArgumentError(std::string(name) + " handles isotropic penalties only");
  }
  if (!(spec.lambda() > 0.0)) {
    throw ArgumentError(std::string(name) + " needs lambda > 0");
  }
}

double weighted_l1(const VectorXd& beta, const VectorXd& weights) {
  double total = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) total += weights[j] * std::abs(beta[j]);
  }
  return total;
}

}  // namespace

GlmFamily GlmFamily::from_name(std::string_view name) {
  if (name == "gaussian") return GlmFamily(Family::gaussian);
  if (name == "poisson") return GlmFamily(Family::poisson);
  if (name == "logistic" || name == "binomial") return GlmFamily(Family::logistic);
  throw ArgumentError("unknown family '" + std::string(name) +
                      "' (expected gaussian, poisson or logistic)");
}

std::string GlmFamily::name() const {
  switch (family_) {
    case Family::gaussian:
      return "gaussian";
    case Family::poisson:
      return "poisson";
    case Family::logistic:
      return "logistic";
  }
  return "unknown";
}

double GlmFamily::A(double eta) const {
  switch (family_) {
    case Family::gaussian:
      return 0.5 * eta * eta;
    case Family::poisson:
      return std::exp(eta);
    case Family::logistic:
      return eta > 30.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
  }
  return 0.0;
}

double GlmFamily::A_dot(double eta) const {
  switch (family_) {
    case Family::gaussian:
      return eta;
    case Family::poisson:
      return std::exp(eta);
    case Family::logistic:
      if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
      {
        const double e = std::exp(eta);
        return e / (1.0 + e);
      }
  }
  return 0.0;
}

double GlmFamily::A_ddot(double eta) const {
  switch (family_) {
    case Family::gaussian:
      return 1.0;
    case Family::poisson:
      return std::exp(eta);
    case Family::logistic: {
      const double mu = A_dot(eta);
      return mu * (1.0 - mu);
    }
  }
  return 0.0;
}

void GlmFamily::check_response(const VectorXd& y) const {
  for (Index i = 0; i < y.size(); ++i) {
    const double yi = y[i];
    if (!std::isfinite(yi)) {
      throw ArgumentError("response entry " + std::to_string(i) + " is not finite");
    }
    if (family_ == Family::logistic && yi != 0.0 && yi != 1.0) {
      throw ArgumentError("logistic response entry " + std::to_string(i) + " is not 0 or 1");
    }
    if (family_ == Family::poisson && (yi < 0.0 || yi != std::floor(yi))) {
      throw ArgumentError("poisson response entry " + std::to_string(i) +
                          " is not a nonnegative integer");
    }
  }
}

GlmProblem::GlmProblem(MatrixXd X, VectorXd y, GlmFamily family)
    : X_(std::move(X)), y_(std::move(y)), family_(family) {
  if (X_.rows() < 1 || X_.cols() < 1) {
    throw ArgumentError("design must have at least one row and one column");
  }
  if (y_.size() != X_.rows()) {
    throw ArgumentError("response has " + std::to_string(y_.size()) + " entries, design has " +
                        std::to_string(X_.rows()) + " rows");
  }
  family_.check_response(y_);
  ly_ = X_.transpose() * y_;
}

double glm_loss(const GlmProblem& problem, const VectorXd& beta) {
  require_length(beta, problem.p(), "beta");
  double bad_eta = 0.0;
  const double value = loss_or_inf(problem, beta, &bad_eta);
  if (!std::isfinite(value)) {
    throw OverflowError(eta_message(problem.family(), bad_eta), bad_eta);
  }
  return value;
}

double glm_objective(const GlmProblem& problem, const PenaltySpec& spec, const VectorXd& beta) {
  if (spec.is_structured()) {
    throw ArgumentError("glm_objective takes an isotropic penalty");
  }
  return glm_loss(problem, beta) + spec.lambda() * lq_norm_q(beta, spec.q());
}

double glm_objective_factors(const GlmProblem& problem, const PenaltySpec& spec,
                             const FactorState& state) {
  if (spec.is_structured()) {
    throw ArgumentError("glm_objective_factors takes an isotropic penalty");
  }
  if (state.K() != spec.K()) {
    throw ArgumentError("factor count does not match K");
  }
  double pen = 0.0;
  for (const auto& u : state.factors) pen += u.squaredNorm();
  return glm_loss(problem, state.beta) + spec.lambda() / spec.K() * pen;
}

double factor_block_objective(const GlmProblem& problem, const VectorXd& v, const VectorXd& u,
                              double ridge) {
  require_length(v, problem.p(), "co-factor product");
  require_length(u, problem.p(), "factor");
  return glm_loss(problem, u.cwiseProduct(v)) + ridge * u.squaredNorm();
}

VectorXd factor_block_gradient(const GlmProblem& problem, const VectorXd& v, const VectorXd& u,
                               double ridge) {
  const VectorXd eta = problem.X() * u.cwiseProduct(v);
  const VectorXd score = problem.X().transpose() * (mean_vector(problem, eta) - problem.y());
  return 2.0 * (v.cwiseProduct(score) + ridge * u);
}

MatrixXd factor_block_hessian(const GlmProblem& problem, const VectorXd& v, const VectorXd& u,
                              double ridge) {
  const VectorXd eta = problem.X() * u.cwiseProduct(v);
  MatrixXd H = weighted_gram(problem.X(), variance_vector(problem, eta))
                   .cwiseProduct(v * v.transpose());
  H.diagonal().array() += ridge;
  return 2.0 * H;
}

NewtonResult newton_inner(const GlmProblem& problem, const VectorXd& v, const VectorXd& u_init,
                          double ridge, const NewtonConfig& newton) {
  if (!(ridge > 0.0)) {
    throw ArgumentError("newton_inner needs ridge > 0");
  }
  check_newton(newton);
  require_length(v, problem.p(), "co-factor product");
  require_length(u_init, problem.p(), "initial factor");
  return damped_newton(
      u_init,
      [&](const VectorXd& u) { return loss_or_inf(problem, u.cwiseProduct(v)) + ridge * u.squaredNorm(); },
      [&](const VectorXd& u) { return factor_block_gradient(problem, v, u, ridge); },
      [&](const VectorXd& u) { return factor_block_hessian(problem, v, u, ridge); }, newton);
}

SolverTrace solve_hpp_glm(const GlmProblem& problem, const PenaltySpec& spec,
                          const FactorState& init, ConvergenceConfig conv,
                          const NewtonConfig& newton) {
  check_isotropic(spec, "HPP-GLM");
  if (spec.K() < 2) {
    throw ArgumentError("HPP needs K >= 2 factors");
  }
  if (init.K() != spec.K()) {
    throw ArgumentError("initial state has " + std::to_string(init.K()) +
                        " factors, penalty has K = " + std::to_string(spec.K()));
  }
  require_length(init.beta, problem.p(), "initial factors");
  detail::prepare(conv, problem.column_norms_sq());
  check_newton(newton);

  const int K = spec.K();
  const double ridge = spec.lambda() / K;
  SolverTrace trace;
  trace.algorithm = "hpp-glm";
  IterationLog log(trace, conv);
  FactorState state = init;
  state.refresh();
  trace.initial_objective = glm_objective(problem, spec, state.beta);

  if (!log.exhausted()) {
    while (true) {
      const VectorXd prev = state.beta;
      for (int k = 0; k < K; ++k) {
        const VectorXd v = state.leave_one_out(k);
        NewtonResult step = newton_inner(problem, v, state.factors[k], ridge, newton);
        state.factors[k] = std::move(step.u);
        state.refresh();
        trace.ridge_solves += step.steps;
        trace.inner_steps += step.steps;
        if (!step.converged) trace.numerical_warning = true;
        if (conv.record_updates) {
          trace.update_objectives.push_back(glm_objective_factors(problem, spec, state));
        }
      }
      if (log.finish(prev, state.beta, glm_objective(problem, spec, state.beta),
                     glm_objective_factors(problem, spec, state))) {
        break;
      }
    }
  }
  trace.final_beta = state.beta;
  trace.final_factors = std::move(state);
  return trace;
}

SolverTrace solve_lqa_glm(const GlmProblem& problem, const PenaltySpec& spec,
                          const VectorXd& init_beta, const LqaConfig& lqa, ConvergenceConfig conv,
                          const NewtonConfig& newton) {
  check_isotropic(spec, "LQA-GLM");
  if (!(lqa.epsilon > 0.0)) {
    throw ArgumentError("LQA epsilon must be positive");
  }
  require_length(init_beta, problem.p(), "initial beta");
  detail::prepare(conv, problem.column_norms_sq());
  check_newton(newton);

  const double q = spec.q();
  const double scale = q * spec.lambda() / 2.0;
  SolverTrace trace;
  trace.algorithm = "lqa-glm";
  IterationLog log(trace, conv);
  VectorXd beta = init_beta;
  trace.initial_objective = glm_objective(problem, spec, beta);
  const MatrixXd& X = problem.X();

  if (!log.exhausted()) {
    while (true) {
      VectorXd D(beta.size());
      for (Index j = 0; j < beta.size(); ++j) {
        D[j] = scale * lqa_weight(beta[j], q, lqa.epsilon, &trace.numerical_warning);
      }
      NewtonResult step = damped_newton(
          beta,
          [&](const VectorXd& b) { return loss_or_inf(problem, b) + b.dot(D.cwiseProduct(b)); },
          [&](const VectorXd& b) {
            const VectorXd mu = mean_vector(problem, X * b);
            return VectorXd(2.0 * (X.transpose() * (mu - problem.y()) + D.cwiseProduct(b)));
          },
          [&](const VectorXd& b) {
            MatrixXd H = weighted_gram(X, variance_vector(problem, X * b));
            H.diagonal() += D;
            return MatrixXd(2.0 * H);
          },
          newton);
      trace.ridge_solves += step.steps;
      trace.inner_steps += step.steps;
      if (!step.converged) trace.numerical_warning = true;
      const double f = glm_objective(problem, spec, step.u);
      if (conv.record_updates) trace.update_objectives.push_back(f);
      const VectorXd prev = std::exchange(beta, std::move(step.u));
      if (log.finish(prev, beta, f, f)) break;
    }
  }
  trace.final_beta = beta;
  return trace;
}

SolverTrace solve_lla_glm(const GlmProblem& problem, const PenaltySpec& spec,
                          const VectorXd& init_beta, ConvergenceConfig conv,
                          ConvergenceConfig inner_conv, const NewtonConfig& newton) {
  check_isotropic(spec, "LLA-GLM");
  const double q = spec.q();
  if (!(q < 1.0)) {
    throw ArgumentError("LLA needs a non-convex penalty (q < 1, i.e. K > 2)");
  }
  require_length(init_beta, problem.p(), "initial beta");
  detail::prepare(conv, problem.column_norms_sq());
  check_newton(newton);
  if (!(inner_conv.delta > 0.0)) {
    throw ArgumentError("inner convergence delta must be positive");
  }
  inner_conv.column_norms_sq.resize(0);
  inner_conv.stop_on_convergence = true;
  inner_conv.record_updates = false;

  const double lambda = spec.lambda();
  const MatrixXd& X = problem.X();
  const VectorXd norms = problem.column_norms_sq();
  SolverTrace trace;
  trace.algorithm = "lla-glm";
  IterationLog log(trace, conv);
  VectorXd beta = init_beta;
  trace.initial_objective = glm_objective(problem, spec, beta);

  if (!log.exhausted()) {
    while (true) {
      VectorXd weights(beta.size());
      for (Index j = 0; j < beta.size(); ++j) {
        weights[j] = beta[j] == 0.0 ? kInf : q * std::pow(std::abs(beta[j]), q - 1.0);
      }
      auto penalized = [&](const VectorXd& b) {
        return loss_or_inf(problem, b) + lambda * weighted_l1(b, weights);
      };

      VectorXd b = beta;
      double fb = penalized(b);
      for (int t = 0; t < newton.max_steps; ++t) {
        const VectorXd eta = X * b;
        const VectorXd mu = mean_vector(problem, eta);
        VectorXd w = variance_vector(problem, eta);
        for (Index i = 0; i < w.size(); ++i) {
          if (!(w[i] >= kIrlsWeightFloor)) {
            w[i] = kIrlsWeightFloor;
            trace.numerical_warning = true;
          }
        }
        const VectorXd z = eta + (problem.y() - mu).cwiseQuotient(w);
        const RegressionProblem working = RegressionProblem::from_moments(
            weighted_gram(X, w), X.transpose() * w.cwiseProduct(z), problem.n());
        SolverTrace inner = solve_ccd(working, lambda, weights, b, inner_conv);
        trace.coordinate_sweeps += inner.coordinate_sweeps;
        ++trace.inner_steps;

        VectorXd candidate = inner.final_beta;
        double fc = penalized(candidate);
        const double slack = 1e-14 * std::max(1.0, std::abs(fb));
        for (int h = 0; h < newton.max_halvings && !(fc <= fb + slack); ++h) {
          candidate = 0.5 * (candidate + b);
          fc = penalized(candidate);
        }
        if (!(fc <= fb + slack)) break;
        const double stat = convergence_statistic(b, candidate, norms);
        b = std::move(candidate);
        fb = fc;
        if (stat <= inner_conv.delta) break;
      }

      const double f = glm_objective(problem, spec, b);
      if (conv.record_updates) trace.update_objectives.push_back(f);
      const VectorXd prev = std::exchange(beta, std::move(b));
      if (log.finish(prev, beta, f, f)) break;
    }
  }
  trace.final_beta = beta;
  return trace;
}

VectorXd glm_ridge_start(const GlmProblem& problem, double ridge, const NewtonConfig& newton) {
  if (!(ridge > 0.0)) {
    throw ArgumentError("ridge start needs a positive ridge");
  }
  check_newton(newton);
  const MatrixXd& X = problem.X();
  return damped_newton(
             VectorXd(VectorXd::Zero(problem.p())),
             [&](const VectorXd& b) { return loss_or_inf(problem, b) + ridge * b.squaredNorm(); },
             [&](const VectorXd& b) {
               const VectorXd mu = mean_vector(problem, X * b);
               return VectorXd(2.0 * (X.transpose() * (mu - problem.y()) + ridge * b));
             },
             [&](const VectorXd& b) {
               MatrixXd H = weighted_gram(X, variance_vector(problem, X * b));
               H.diagonal().array() += ridge;
               return MatrixXd(2.0 * H);
             },
             newton)
      .u;
}

}  // namespace hadamard

#include "hadamard/linear_solvers.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "hadamard/errors.hpp"
#include "solver_detail.hpp"

namespace hadamard {

namespace {

using detail::IterationLog;
using detail::require_length;

void prepare(ConvergenceConfig& conv, const RegressionProblem& problem) {
  detail::prepare(conv, problem.column_norms_sq());
}

double weighted_l1(const VectorXd& beta, const VectorXd* weights) {
  double total = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) {
      total += (weights ? (*weights)[j] : 1.0) * std::abs(beta[j]);
    }
  }
  return total;
}

// Lasso objective from the maintained residual r = l - Q beta.
double objective_from_residual(const VectorXd& beta, const VectorXd& r, const VectorXd& l,
                               double lambda, const VectorXd* weights) {
  return -beta.dot(r + l) + lambda * weighted_l1(beta, weights);
}

// One ascending pass of exact coordinate minimizations. Keeps r = l - Q beta current.
void ccd_sweep(const MatrixXd& Q, const VectorXd& l, double lambda, const VectorXd* weights,
               VectorXd& beta, VectorXd& r, std::vector<double>* update_log) {
  const Index p = beta.size();
  for (Index j = 0; j < p; ++j) {
    const double qjj = Q(j, j);
    const double z = r[j] + qjj * beta[j];
    const double w = weights ? (*weights)[j] : 1.0;
    const double next = soft_threshold(z, w * lambda / 2.0) / qjj;
    const double step = next - beta[j];
    if (step != 0.0) {
      r.noalias() -= Q.col(j) * step;
      beta[j] = next;
    }
    if (update_log) {
      update_log->push_back(objective_from_residual(beta, r, l, lambda, weights));
    }
  }
}

void check_diagonal(const MatrixXd& Q) {
  for (Index j = 0; j < Q.rows(); ++j) {
    if (!(Q(j, j) > 0.0)) {
      throw ArgumentError("column " + std::to_string(j) +
                          " is degenerate (Q_jj = 0); coordinate descent needs Q_jj > 0");
    }
  }
}

std::vector<Index> nonzero_support(const VectorXd& beta) {
  std::vector<Index> support;
  for (Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) support.push_back(j);
  }
  return support;
}

// Shared driver for the two hybrid algorithms: CCD sweep then a step on the support.
template <typename SupportStep>
SolverTrace hybrid_descent(const char* name, const RegressionProblem& problem, double lambda,
                           const VectorXd& init_beta, ConvergenceConfig conv,
                           SupportStep support_step) {
  if (!(lambda > 0.0)) {
    throw ArgumentError(std::string(name) + " needs lambda > 0");
  }
  prepare(conv, problem);
  require_length(init_beta, problem.p(), "initial beta");
  const MatrixXd& Q = problem.Q();
  const VectorXd& l = problem.l();
  check_diagonal(Q);

  SolverTrace trace;
  trace.algorithm = name;
  IterationLog log(trace, conv);
  VectorXd beta = init_beta;
  VectorXd r = l - Q * beta;
  const PenaltySpec lasso(2, lambda);
  trace.initial_objective = objective_beta(problem, lasso, beta);
  if (log.exhausted()) {
    trace.final_beta = beta;
    return trace;
  }
  std::vector<double>* updates = conv.record_updates ? &trace.update_objectives : nullptr;
  while (true) {
    const VectorXd prev = beta;
    ccd_sweep(Q, l, lambda, nullptr, beta, r, updates);
    ++trace.coordinate_sweeps;
    const std::vector<Index> support = nonzero_support(beta);
    if (!support.empty()) {
      const VectorXd before = beta(support);
      const VectorXd after = support_step(Q(support, support), l(support), before, trace);
      beta(support) = after;
      r.noalias() -= Q(Eigen::all, support) * (after - before);
      if (updates) updates->push_back(objective_from_residual(beta, r, l, lambda, nullptr));
    }
    const double f = objective_beta(problem, lasso, beta);
    if (log.finish(prev, beta, f, f)) break;
  }
  trace.final_beta = beta;
  return trace;
}

}  // namespace

ConvergenceConfig ConvergenceConfig::for_problem(const RegressionProblem& problem, double delta,
                                                 int max_iterations) {
  ConvergenceConfig conv;
  conv.delta = delta;
  conv.max_iterations = max_iterations;
  conv.column_norms_sq = problem.column_norms_sq();
  return conv;
}

double convergence_statistic(const VectorXd& beta_prev, const VectorXd& beta_next,
                             const VectorXd& column_norms_sq) {
  if (beta_prev.size() != beta_next.size() || beta_prev.size() != column_norms_sq.size()) {
    throw ArgumentError("convergence statistic needs vectors of equal length");
  }
  if (beta_prev.size() == 0) return 0.0;
  return ((beta_prev - beta_next).array().square() * column_norms_sq.array()).maxCoeff();
}

double soft_threshold(double z, double t) {
  const double magnitude = std::abs(z) - t;
  if (!(magnitude > 0.0)) return 0.0;
  return z > 0.0 ? magnitude : -magnitude;
}

VectorXd spd_solve(const MatrixXd& M, const VectorXd& rhs) {
  Eigen::LLT<MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Cholesky factorization failed: ridge matrix is not positive definite");
  }
  return llt.solve(rhs);
}

VectorXd hadamard_ridge_update(const MatrixXd& Q, const VectorXd& l, const VectorXd& v,
                               double ridge) {
  MatrixXd M = Q.cwiseProduct(v * v.transpose());
  M.diagonal().array() += ridge;
  return spd_solve(M, l.cwiseProduct(v));
}

VectorXd hadamard_ridge_update(const MatrixXd& Q, const VectorXd& l, const VectorXd& v,
                               const MatrixXd& precision) {
  MatrixXd M = Q.cwiseProduct(v * v.transpose()) + precision;
  return spd_solve(M, l.cwiseProduct(v));
}

VectorXd default_initial_beta(const RegressionProblem& problem, double lambda) {
  if (problem.n() > problem.p()) {
    Eigen::LLT<MatrixXd> llt(problem.Q());
    if (llt.info() == Eigen::Success) {
      return llt.solve(problem.l());
    }
  }
  MatrixXd M = problem.Q();
  M.diagonal().array() += lambda / 2.0;
  return spd_solve(M, problem.l());
}

FactorState initial_factors(const VectorXd& beta0, int K) {
  FactorState state = factor_split(beta0, K);
  for (Index j = 0; j < beta0.size(); ++j) {
    if (beta0[j] == 0.0) {
      for (auto& u : state.factors) u[j] = kZeroFactorInit;
    }
  }
  state.refresh();
  return state;
}

double lqa_weight(double beta_j, double q, double epsilon, bool* clamped) {
  const double a = std::abs(beta_j);
  double d = (q == 1.0) ? 1.0 / (a + epsilon) : std::pow(a, q - 1.0) / (a + epsilon);
  const double cap = 1.0 / (epsilon * epsilon);
  if (!std::isfinite(d) || d > cap) {
    d = cap;
    if (clamped) *clamped = true;
  }
  return d;
}

SolverTrace solve_hpp(const RegressionProblem& problem, const PenaltySpec& spec,
                      const FactorState& init, ConvergenceConfig conv) {
  if (spec.is_structured()) {
    throw ArgumentError("solve_hpp handles isotropic penalties; use solve_shpp_dense");
  }
  if (spec.K() < 2) {
    throw ArgumentError("HPP needs K >= 2 factors");
  }
  if (init.K() != spec.K()) {
    throw ArgumentError("initial state has " + std::to_string(init.K()) + " factors, penalty has K = " +
                        std::to_string(spec.K()));
  }
  require_length(init.beta, problem.p(), "initial factors");
  prepare(conv, problem);

  const int K = spec.K();
  const double ridge = spec.lambda() / K;
  SolverTrace trace;
  trace.algorithm = "hpp";
  IterationLog log(trace, conv);
  FactorState state = init;
  state.refresh();
  trace.initial_objective = objective_beta(problem, spec, state.beta);

  if (!log.exhausted()) {
    while (true) {
      const VectorXd prev = state.beta;
      for (int k = 0; k < K; ++k) {
        const VectorXd v = state.leave_one_out(k);
        state.factors[k] = hadamard_ridge_update(problem.Q(), problem.l(), v, ridge);
        state.refresh();
        ++trace.ridge_solves;
        if (conv.record_updates) {
          trace.update_objectives.push_back(objective_factors(problem, spec, state));
        }
      }
      if (log.finish(prev, state.beta, objective_beta(problem, spec, state.beta),
                     objective_factors(problem, spec, state))) {
        break;
      }
    }
  }
  trace.final_beta = state.beta;
  trace.final_factors = std::move(state);
  return trace;
}

SolverTrace solve_lqa(const RegressionProblem& problem, const PenaltySpec& spec,
                      const VectorXd& init_beta, const LqaConfig& lqa, ConvergenceConfig conv) {
  if (spec.is_structured()) {
    throw ArgumentError("LQA handles isotropic penalties only");
  }
  if (!(spec.lambda() > 0.0)) {
    throw ArgumentError("LQA needs lambda > 0");
  }
  if (!(lqa.epsilon > 0.0)) {
    throw ArgumentError("LQA epsilon must be positive");
  }
  require_length(init_beta, problem.p(), "initial beta");
  prepare(conv, problem);

  const double q = spec.q();
  const double scale = q * spec.lambda() / 2.0;
  SolverTrace trace;
  trace.algorithm = "lqa";
  IterationLog log(trace, conv);
  VectorXd beta = init_beta;
  trace.initial_objective = objective_beta(problem, spec, beta);

  if (!log.exhausted()) {
    while (true) {
      MatrixXd M = problem.Q();
      for (Index j = 0; j < beta.size(); ++j) {
        M(j, j) += scale * lqa_weight(beta[j], q, lqa.epsilon, &trace.numerical_warning);
      }
      VectorXd next = spd_solve(M, problem.l());
      ++trace.ridge_solves;
      const double f = objective_beta(problem, spec, next);
      if (conv.record_updates) trace.update_objectives.push_back(f);
      const VectorXd prev = std::exchange(beta, std::move(next));
      if (log.finish(prev, beta, f, f)) break;
    }
  }
  trace.final_beta = beta;
  return trace;
}

SolverTrace solve_ccd(const RegressionProblem& problem, double lambda,
                      const std::optional<VectorXd>& weights, const VectorXd& init_beta,
                      ConvergenceConfig conv) {
  if (!(lambda >= 0.0)) {
    throw ArgumentError("CCD needs lambda >= 0");
  }
  require_length(init_beta, problem.p(), "initial beta");
  if (weights) {
    require_length(*weights, problem.p(), "weights");
    for (Index j = 0; j < weights->size(); ++j) {
      if (!((*weights)[j] >= 0.0)) throw ArgumentError("CCD weights must be nonnegative");
    }
  }
  prepare(conv, problem);
  const MatrixXd& Q = problem.Q();
  const VectorXd& l = problem.l();
  check_diagonal(Q);

  const VectorXd* w = weights ? &*weights : nullptr;
  SolverTrace trace;
  trace.algorithm = "ccd";
  IterationLog log(trace, conv);
  VectorXd beta = init_beta;
  VectorXd r = l - Q * beta;
  const PenaltySpec lasso(2, lambda);
  trace.initial_objective = objective_from_residual(beta, r, l, lambda, w);
  std::vector<double>* updates = conv.record_updates ? &trace.update_objectives : nullptr;

  if (!log.exhausted()) {
    while (true) {
      const VectorXd prev = beta;
      ccd_sweep(Q, l, lambda, w, beta, r, updates);
      ++trace.coordinate_sweeps;
      const double surrogate = quadratic_loss(problem, beta) + lambda * weighted_l1(beta, w);
      const double f = w ? objective_beta(problem, lasso, beta) : surrogate;
      if (log.finish(prev, beta, f, surrogate)) break;
    }
  }
  trace.final_beta = beta;
  return trace;
}

SolverTrace solve_lla(const RegressionProblem& problem, const PenaltySpec& spec,
                      const VectorXd& init_beta, ConvergenceConfig conv,
                      ConvergenceConfig inner_conv) {
  if (spec.is_structured()) {
    throw ArgumentError("LLA handles isotropic penalties only");
  }
  const double q = spec.q();
  if (!(q < 1.0)) {
    throw ArgumentError("LLA needs a non-convex penalty (q < 1, i.e. K > 2)");
  }
  if (!(spec.lambda() > 0.0)) {
    throw ArgumentError("LLA needs lambda > 0");
  }
  require_length(init_beta, problem.p(), "initial beta");
  prepare(conv, problem);
  check_diagonal(problem.Q());
  inner_conv.column_norms_sq = conv.column_norms_sq;
  inner_conv.stop_on_convergence = true;
  inner_conv.record_updates = false;

  SolverTrace trace;
  trace.algorithm = "lla";
  IterationLog log(trace, conv);
  VectorXd beta = init_beta;
  trace.initial_objective = objective_beta(problem, spec, beta);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  if (!log.exhausted()) {
    while (true) {
      VectorXd weights(beta.size());
      for (Index j = 0; j < beta.size(); ++j) {
        weights[j] = beta[j] == 0.0 ? kInf : q * std::pow(std::abs(beta[j]), q - 1.0);
      }
      SolverTrace inner = solve_ccd(problem, spec.lambda(), weights, beta, inner_conv);
      trace.coordinate_sweeps += inner.coordinate_sweeps;
      trace.inner_steps += inner.iterations;
      if (!inner.converged) trace.numerical_warning = true;
      const double f = objective_beta(problem, spec, inner.final_beta);
      if (conv.record_updates) trace.update_objectives.push_back(f);
      const VectorXd prev = std::exchange(beta, std::move(inner.final_beta));
      if (log.finish(prev, beta, f, f)) break;
    }
  }
  trace.final_beta = beta;
  return trace;
}

SolverTrace solve_hpcd(const RegressionProblem& problem, double lambda, const VectorXd& init_beta,
                       ConvergenceConfig conv) {
  const double ridge = lambda / 2.0;
  return hybrid_descent(
      "hpcd", problem, lambda, init_beta, std::move(conv),
      [ridge](const MatrixXd& Qs, const VectorXd& ls, const VectorXd& beta_s, SolverTrace& trace) {
        VectorXd v = beta_s.cwiseAbs().cwiseSqrt();
        const VectorXd u = hadamard_ridge_update(Qs, ls, v, ridge);
        v = hadamard_ridge_update(Qs, ls, u, ridge);
        trace.ridge_solves += 2;
        return VectorXd(u.cwiseProduct(v));
      });
}

SolverTrace solve_lqcd(const RegressionProblem& problem, double lambda, const VectorXd& init_beta,
                       const LqaConfig& lqa, ConvergenceConfig conv) {
  if (!(lqa.epsilon > 0.0)) {
    throw ArgumentError("LQA epsilon must be positive");
  }
  const double eps = lqa.epsilon;
  return hybrid_descent(
      "lqcd", problem, lambda, init_beta, std::move(conv),
      [lambda, eps](const MatrixXd& Qs, const VectorXd& ls, const VectorXd& beta_s,
                    SolverTrace& trace) {
        MatrixXd M = Qs;
        for (Index j = 0; j < beta_s.size(); ++j) {
          M(j, j) += lambda / 2.0 * lqa_weight(beta_s[j], 1.0, eps, &trace.numerical_warning);
        }
        ++trace.ridge_solves;
        return spd_solve(M, ls);
      });
}

}  // namespace hadamard

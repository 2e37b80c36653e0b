#include <cmath>
#include <random>

#include "doctest.h"
#include "hadamard/errors.hpp"
#include "hadamard/linear_solvers.hpp"
#include "oracles.hpp"

using namespace hadamard;

namespace {

RegressionProblem scalar_problem(double q, double l) {
  return RegressionProblem::from_moments(MatrixXd::Constant(1, 1, q), VectorXd::Constant(1, l));
}

RegressionProblem random_problem(std::mt19937_64& rng, Index n, Index p, double noise = 1.0) {
  MatrixXd X = oracle::random_normal(rng, n, p);
  VectorXd beta = oracle::random_vector(rng, p);
  for (Index j = 0; j < p; j += 2) beta[j] = 0.0;
  VectorXd y = X * beta + oracle::random_vector(rng, n, noise);
  return RegressionProblem::from_data(X, y);
}

ConvergenceConfig tight(const RegressionProblem& problem, double delta = 1e-14) {
  return ConvergenceConfig::for_problem(problem, delta, 200000);
}

void check_non_increasing(const std::vector<double>& values, double rel_tol = 1e-10) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double allowed = rel_tol * std::max(1.0, std::abs(values[i - 1]));
    CHECK(values[i] <= values[i - 1] + allowed);
  }
}

}  // namespace

TEST_CASE("convergence_statistic examples") {
  VectorXd a = VectorXd::Constant(3, 0.7);
  CHECK(convergence_statistic(a, a, VectorXd::Ones(3)) == 0.0);
  CHECK(convergence_statistic(VectorXd::Constant(1, 1e-3), VectorXd::Zero(1),
                              VectorXd::Constant(1, 4.0)) == doctest::Approx(4e-6));
  CHECK_THROWS_AS(convergence_statistic(a, VectorXd::Zero(2), VectorXd::Ones(3)), ArgumentError);
}

TEST_CASE("soft threshold") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
  CHECK(soft_threshold(1.0, 1.0) == 0.0);
  CHECK(soft_threshold(-1.0, 1.0) == 0.0);
  CHECK(soft_threshold(0.5, INFINITY) == 0.0);
}

TEST_CASE("hpp one-dimensional lasso") {
  auto problem = scalar_problem(1, 1);
  PenaltySpec spec(2, 1.0);
  FactorState init({VectorXd::Ones(1), VectorXd::Ones(1)});
  auto trace = solve_hpp(problem, spec, init, tight(problem));
  CHECK(trace.converged);
  CHECK(trace.final_beta[0] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(trace.final_factors->factors[0][0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
  CHECK(trace.final_factors->factors[1][0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
  CHECK(trace.ridge_solves == 2L * trace.iterations);

  PenaltySpec heavy(2, 2.0);
  // lambda = 2 sits on the soft-threshold boundary, so the decay is sublinear.
  auto zero = solve_hpp(problem, heavy, init, ConvergenceConfig::for_problem(problem, 1e-14, 1000000));
  CHECK(zero.converged);
  CHECK(std::abs(zero.final_beta[0]) < 1e-3);
  // Factors decay toward zero: beta shrinks every iteration.
  auto fixed = ConvergenceConfig::for_problem(problem, 1e-6, 30);
  fixed.stop_on_convergence = false;
  auto decay = solve_hpp(problem, heavy, init, fixed);
  CHECK(decay.iterations == 30);
  for (std::size_t i = 1; i < decay.objective.size(); ++i) {
    CHECK(decay.surrogate[i] <= decay.surrogate[i - 1]);
  }
}

TEST_CASE("hpp rejects singular ridge systems without a penalty") {
  auto problem = RegressionProblem::from_moments(MatrixXd::Zero(2, 2), VectorXd::Zero(2));
  FactorState init({VectorXd::Ones(2), VectorXd::Ones(2)});
  CHECK_THROWS_AS(solve_hpp(problem, PenaltySpec(2, 0.0), init, ConvergenceConfig{}),
                  NumericalError);
  CHECK_THROWS_AS(solve_hpp(problem, PenaltySpec(2, 1.0),
                            FactorState({VectorXd::Ones(2), VectorXd::Ones(2), VectorXd::Ones(2)}),
                            ConvergenceConfig{}),
                  ArgumentError);
}

TEST_CASE("hpp descent, factor balance and KKT on random problems") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 12; ++trial) {
    auto problem = random_problem(rng, 40, 8);
    for (int K : {2, 4}) {
      PenaltySpec spec(K, 6.0);
      auto conv = tight(problem, 1e-28);
      conv.max_iterations = 100000;
      conv.record_updates = true;
      auto init = initial_factors(default_initial_beta(problem, spec.lambda()), K);
      auto trace = solve_hpp(problem, spec, init, conv);
      REQUIRE(trace.converged);
      CHECK(trace.ridge_solves == static_cast<long>(K) * trace.iterations);
      check_non_increasing(trace.update_objectives);
      check_non_increasing(trace.surrogate);
      const auto& factors = trace.final_factors->factors;
      for (Index j = 0; j < problem.p(); ++j) {
        // Coordinates decaying toward zero keep |u|/|v| = |s_j| < 1; only the
        // support is balanced.
        if (std::abs(trace.final_beta[j]) <= 1e-6) continue;
        for (int k = 1; k < K; ++k) {
          CHECK(std::abs(std::abs(factors[k][j]) - std::abs(factors[0][j])) <= 1e-5);
        }
        const double expected = std::pow(std::abs(trace.final_beta[j]), 2.0 / K);
        CHECK(std::abs(factors[0][j] * factors[0][j] - expected) <= 1e-6);
      }
      const double f = objective_beta(problem, spec, trace.final_beta);
      const double g = objective_factors(problem, spec, *trace.final_factors);
      CHECK(std::abs(g - f) <= 1e-10 * std::abs(f));
      if (K == 2) {
        auto kkt = kkt_check(problem, spec.lambda(), trace.final_beta, 1e-4, 1e-6);
        CHECK(kkt.is_optimal);
      }
    }
  }
}

TEST_CASE("hadamard ridge update keeps zero co-factor coordinates at zero") {
  std::mt19937_64 rng(8);
  auto problem = random_problem(rng, 30, 6);
  VectorXd v = oracle::random_vector(rng, 6);
  v[1] = 0.0;
  v[4] = 0.0;
  VectorXd u = hadamard_ridge_update(problem.Q(), problem.l(), v, 0.5);
  CHECK(u[1] == 0.0);
  CHECK(u[4] == 0.0);
  // Ridge matrix smallest eigenvalue bounded below by the ridge.
  MatrixXd M = problem.Q().cwiseProduct(v * v.transpose());
  M.diagonal().array() += 0.5;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(M);
  CHECK(eig.eigenvalues().minCoeff() >= 0.5 - 1e-10);
}

TEST_CASE("lqa one-dimensional and fixed point") {
  auto problem = scalar_problem(1, 1);
  PenaltySpec spec(2, 1.0);
  auto trace = solve_lqa(problem, spec, VectorXd::Ones(1), LqaConfig{}, tight(problem, 1e-24));
  CHECK(trace.converged);
  CHECK(trace.final_beta[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(trace.ridge_solves == trace.iterations);

  VectorXd d(3);
  d << 2.0, 1.0, 4.0;
  VectorXd l(3);
  l << 3.0, -2.0, 0.5;
  auto diag = RegressionProblem::from_moments(MatrixXd(d.asDiagonal()), l);
  const VectorXd start = oracle::diagonal_lasso(d, l, 0.8);
  REQUIRE(start.cwiseAbs().minCoeff() > 0.0);
  auto fixed = solve_lqa(diag, PenaltySpec(2, 0.8), start, LqaConfig{}, ConvergenceConfig{});
  CHECK(fixed.converged);
  CHECK(fixed.iterations <= 2);
  CHECK(fixed.statistic.front() < 1e-20);
}

TEST_CASE("lqa clamps the weight at zero for q < 1") {
  bool clamped = false;
  const double w = lqa_weight(0.0, 0.5, 1e-12, &clamped);
  CHECK(clamped);
  CHECK(w == doctest::Approx(1e24));
  clamped = false;
  CHECK(lqa_weight(0.0, 1.0, 1e-12, &clamped) == doctest::Approx(1e12));
  CHECK_FALSE(clamped);
  CHECK(lqa_weight(0.5, 1.0, 1e-12, nullptr) == doctest::Approx(2.0));
  CHECK(lqa_weight(4.0, 0.5, 0.0 + 1e-12, nullptr) == doctest::Approx(std::pow(4.0, -1.5)));

  auto problem = scalar_problem(1, 1);
  VectorXd start = VectorXd::Zero(1);
  auto trace = solve_lqa(problem, PenaltySpec(4, 1.0), start, LqaConfig{}, ConvergenceConfig{});
  CHECK(trace.numerical_warning);
  CHECK(std::isfinite(trace.final_beta[0]));
}

TEST_CASE("ccd examples") {
  VectorXd d(4);
  d << 2.0, 1.0, 4.0, 0.5;
  VectorXd l(4);
  l << 3.0, -2.0, 0.5, -0.1;
  const double lambda = 1.5;
  auto diag = RegressionProblem::from_moments(MatrixXd(d.asDiagonal()), l);
  auto conv = ConvergenceConfig::for_problem(diag);
  conv.max_iterations = 1;
  auto one = solve_ccd(diag, lambda, std::nullopt, VectorXd::Ones(4), conv);
  CHECK((one.final_beta - oracle::diagonal_lasso(d, l, lambda)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(one.final_beta[2] == 0.0);
  CHECK(one.final_beta[3] == 0.0);

  auto scalar = scalar_problem(1, 1);
  auto t = solve_ccd(scalar, 1.0, std::nullopt, VectorXd::Zero(1), ConvergenceConfig{});
  CHECK(t.final_beta[0] == 0.5);
  CHECK(t.converged);

  auto degenerate = RegressionProblem::from_moments(MatrixXd::Zero(1, 1), VectorXd::Zero(1));
  CHECK_THROWS_AS(solve_ccd(degenerate, 1.0, std::nullopt, VectorXd::Zero(1), ConvergenceConfig{}),
                  ArgumentError);
}

TEST_CASE("ccd coordinate updates never increase the objective") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    auto problem = random_problem(rng, 30, 12);
    auto conv = ConvergenceConfig::for_problem(problem, 1e-12, 5000);
    conv.record_updates = true;
    auto trace = solve_ccd(problem, 5.0, std::nullopt, default_initial_beta(problem, 5.0), conv);
    CHECK(trace.converged);
    check_non_increasing(trace.update_objectives);
    check_non_increasing(trace.objective);
    CHECK(kkt_check(problem, 5.0, trace.final_beta, 1e-4).is_optimal);
  }
}

TEST_CASE("weighted ccd pins infinite-weight coordinates") {
  std::mt19937_64 rng(4);
  auto problem = random_problem(rng, 25, 5);
  VectorXd w = VectorXd::Ones(5);
  w[2] = INFINITY;
  auto trace = solve_ccd(problem, 1.0, w, VectorXd::Zero(5), ConvergenceConfig{});
  CHECK(trace.final_beta[2] == 0.0);
  CHECK(std::isfinite(trace.final_objective()));
}

TEST_CASE("lla one-dimensional L_1/2 against grid search") {
  auto problem = scalar_problem(1, 1);
  PenaltySpec spec(4, 1.0);
  auto trace = solve_lla(problem, spec, VectorXd::Constant(1, 1.0), tight(problem),
                         tight(problem, 1e-20));
  CHECK(trace.converged);
  auto f = [](double b) { return b * b - 2.0 * b + std::sqrt(std::abs(b)); };
  auto coarse = oracle::grid_1d(f, -2.0, 2.0, 1e-4);
  auto fine = oracle::grid_1d(f, coarse.argmin[0] - 1e-4, coarse.argmin[0] + 1e-4, 1e-8);
  CHECK(trace.final_beta[0] == doctest::Approx(fine.argmin[0]).epsilon(1e-6));
  CHECK(trace.final_objective() <= fine.value + 1e-10);

  auto zero = solve_lla(problem, spec, VectorXd::Zero(1), ConvergenceConfig{}, ConvergenceConfig{});
  CHECK(zero.final_beta[0] == 0.0);
  CHECK(zero.iterations == 1);
  CHECK(zero.converged);

  CHECK_THROWS_AS(solve_lla(problem, PenaltySpec(2, 1.0), VectorXd::Ones(1), ConvergenceConfig{},
                            ConvergenceConfig{}),
                  ArgumentError);
}

TEST_CASE("hybrid solvers: empty support and diagonal designs") {
  std::mt19937_64 rng(12);
  auto problem = random_problem(rng, 30, 10);
  const double huge = 4.0 * problem.l().cwiseAbs().maxCoeff();
  auto h = solve_hpcd(problem, huge, default_initial_beta(problem, huge), ConvergenceConfig{});
  CHECK(h.converged);
  CHECK(h.final_beta.isZero(0.0));
  auto q = solve_lqcd(problem, huge, default_initial_beta(problem, huge), LqaConfig{},
                      ConvergenceConfig{});
  CHECK(q.final_beta.isZero(0.0));

  VectorXd d(5);
  d << 2.0, 1.0, 4.0, 0.5, 3.0;
  VectorXd l(5);
  l << 3.0, -2.0, 0.5, -0.1, -6.0;
  auto diag = RegressionProblem::from_moments(MatrixXd(d.asDiagonal()), l);
  const VectorXd exact = oracle::diagonal_lasso(d, l, 1.5);
  auto ccd = solve_ccd(diag, 1.5, std::nullopt, VectorXd::Ones(5), tight(diag));
  auto hpcd = solve_hpcd(diag, 1.5, VectorXd::Ones(5), tight(diag));
  auto lqcd = solve_lqcd(diag, 1.5, VectorXd::Ones(5), LqaConfig{}, tight(diag));
  CHECK((hpcd.final_beta - ccd.final_beta).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((lqcd.final_beta - ccd.final_beta).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((ccd.final_beta - exact).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("lasso algorithms agree on well-conditioned problems") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 8; ++trial) {
    const Index p = 5 + 5 * trial;
    auto problem = random_problem(rng, p + 20, p);
    const double lambda = 4.0 + trial;
    PenaltySpec spec(2, lambda);
    const VectorXd start = default_initial_beta(problem, lambda);
    auto conv = tight(problem, 1e-14);
    std::vector<double> finals{
        solve_hpp(problem, spec, initial_factors(start, 2), conv).final_objective(),
        solve_lqa(problem, spec, start, LqaConfig{}, conv).final_objective(),
        solve_ccd(problem, lambda, std::nullopt, start, conv).final_objective(),
        solve_hpcd(problem, lambda, start, conv).final_objective(),
        solve_lqcd(problem, lambda, start, LqaConfig{}, conv).final_objective()};
    for (double a : finals) {
      for (double b : finals) {
        CHECK(std::abs(a - b) <= 1e-5 * std::abs(b));
      }
    }
  }
}

TEST_CASE("hybrid solvers reach the lasso solution when p > n") {
  std::mt19937_64 rng(41);
  auto problem = random_problem(rng, 30, 80);
  const double lambda = 20.0;
  const VectorXd start = default_initial_beta(problem, lambda);
  auto conv = tight(problem, 1e-14);
  conv.record_updates = true;
  auto ccd = solve_ccd(problem, lambda, std::nullopt, start, conv);
  auto hpcd = solve_hpcd(problem, lambda, start, conv);
  auto lqcd = solve_lqcd(problem, lambda, start, LqaConfig{}, conv);
  CHECK(ccd.converged);
  CHECK(hpcd.converged);
  CHECK(lqcd.converged);
  check_non_increasing(hpcd.update_objectives);
  CHECK(hpcd.final_objective() == doctest::Approx(ccd.final_objective()).epsilon(1e-8));
  CHECK(lqcd.final_objective() == doctest::Approx(ccd.final_objective()).epsilon(1e-8));
  CHECK(kkt_check(problem, lambda, hpcd.final_beta, 1e-4).is_optimal);
  CHECK(hpcd.iterations < ccd.iterations);
}

TEST_CASE("default initial beta") {
  std::mt19937_64 rng(6);
  auto tall = random_problem(rng, 40, 5);
  VectorXd ols = (tall.X().transpose() * tall.X()).ldlt().solve(tall.X().transpose() * tall.y());
  CHECK((default_initial_beta(tall, 3.0) - ols).cwiseAbs().maxCoeff() < 1e-10);
  auto wide = random_problem(rng, 5, 12);
  MatrixXd M = wide.Q();
  M.diagonal().array() += 1.5;
  VectorXd ridge = M.ldlt().solve(wide.l());
  CHECK((default_initial_beta(wide, 3.0) - ridge).cwiseAbs().maxCoeff() < 1e-10);

  VectorXd b0(3);
  b0 << -8.0, 0.0, 27.0;
  auto f = initial_factors(b0, 3);
  CHECK(f.factors[0][0] == doctest::Approx(-2.0));
  CHECK(f.factors[1][0] == doctest::Approx(2.0));
  CHECK(f.factors[2][2] == doctest::Approx(3.0));
  for (int k = 0; k < 3; ++k) CHECK(f.factors[k][1] == kZeroFactorInit);
}

TEST_CASE("fixed-iteration mode runs the full budget") {
  std::mt19937_64 rng(9);
  auto problem = random_problem(rng, 30, 6);
  auto conv = ConvergenceConfig::for_problem(problem, 1e-6, 50);
  conv.stop_on_convergence = false;
  auto trace = solve_ccd(problem, 2.0, std::nullopt, default_initial_beta(problem, 2.0), conv);
  CHECK(trace.iterations == 50);
  CHECK(trace.objective.size() == 50);
  CHECK(trace.converged);
}

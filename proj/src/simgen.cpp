#include "hadamard/simgen.hpp"

#include <cmath>
#include <fstream>

#include "hadamard/errors.hpp"
#include "hadamard/io.hpp"
#include "hadamard/random.hpp"

namespace hadamard {

std::string to_string(DesignKind kind) {
  return kind == DesignKind::iid_normal ? "iid_normal" : "low_rank_plus_noise";
}

DesignKind design_kind_from_name(const std::string& name) {
  if (name == "iid_normal" || name == "iid") return DesignKind::iid_normal;
  if (name == "low_rank_plus_noise" || name == "correlated") return DesignKind::low_rank_plus_noise;
  throw ArgumentError("unknown design kind '" + name +
                      "' (expected iid_normal or low_rank_plus_noise)");
}

Index SimDesign::rank() const {
  return static_cast<Index>(std::llround(static_cast<double>(p) * rank_fraction));
}

void SimDesign::validate() const {
  if (n < 1 || p < 1) throw ArgumentError("design needs n >= 1 and p >= 1");
  if (!(sparsity >= 0.0 && sparsity <= 1.0)) throw ArgumentError("sparsity must lie in [0, 1]");
  if (!(beta_sd > 0.0)) throw ArgumentError("beta_sd must be positive");
  if (family == Family::poisson) throw ArgumentError("simulated responses are gaussian or logistic");
  if (design_kind == DesignKind::low_rank_plus_noise) {
    if (rank() < 1) throw ArgumentError("low-rank design needs round(p * rank_fraction) >= 1");
    if (n < 2) throw ArgumentError("column standardization needs n >= 2");
  }
}

void to_json(nlohmann::json& j, const SimDesign& d) {
  j = nlohmann::json{{"n", d.n},
                     {"p", d.p},
                     {"sparsity", d.sparsity},
                     {"beta_sd", d.beta_sd},
                     {"design_kind", to_string(d.design_kind)},
                     {"rank_fraction", d.rank_fraction},
                     {"family", GlmFamily(d.family).name()},
                     {"seed", d.seed}};
}

void from_json(const nlohmann::json& j, SimDesign& d) {
  SimDesign base;
  d.n = j.value("n", base.n);
  d.p = j.value("p", base.p);
  d.sparsity = j.value("sparsity", base.sparsity);
  d.beta_sd = j.value("beta_sd", base.beta_sd);
  d.design_kind = design_kind_from_name(j.value("design_kind", to_string(base.design_kind)));
  d.rank_fraction = j.value("rank_fraction", base.rank_fraction);
  d.family = GlmFamily::from_name(j.value("family", std::string("gaussian"))).kind();
  d.seed = j.value("seed", base.seed);
}

Dataset generate_dataset(const SimDesign& design) {
  design.validate();
  Rng rng(design.seed);
  Dataset data;
  data.beta_true.resize(design.p);
  for (Index j = 0; j < design.p; ++j) {
    const bool zero = rng.uniform() < design.sparsity;
    const double draw = rng.normal();
    data.beta_true[j] = zero ? 0.0 : design.beta_sd * draw;
  }

  if (design.design_kind == DesignKind::iid_normal) {
    data.X = rng.normal_matrix(design.n, design.p);
  } else {
    const Index r = design.rank();
    const MatrixXd U = rng.normal_matrix(design.n, r);
    const MatrixXd V = rng.normal_matrix(design.p, r);
    const MatrixXd E = rng.normal_matrix(design.n, design.p);
    data.X = column_standardize(U * V.transpose() + E);
  }

  const VectorXd eta = data.X * data.beta_true;
  data.y.resize(design.n);
  for (Index i = 0; i < design.n; ++i) {
    if (design.family == Family::logistic) {
      data.y[i] = rng.bernoulli(GlmFamily(Family::logistic).A_dot(eta[i])) ? 1.0 : 0.0;
    } else {
      data.y[i] = eta[i] + rng.normal();
    }
  }
  return data;
}

MatrixXd column_standardize(const MatrixXd& X) {
  const Index n = X.rows();
  if (n < 2) {
    throw ArgumentError("column standardization needs at least two rows");
  }
  MatrixXd out(n, X.cols());
  for (Index j = 0; j < X.cols(); ++j) {
    const VectorXd centered = X.col(j).array() - X.col(j).mean();
    const double ss = centered.squaredNorm();
    if (!(ss > 0.0)) {
      throw ArgumentError("column " + std::to_string(j) + " is constant");
    }
    out.col(j) = centered * std::sqrt(static_cast<double>(n) / ss);
  }
  return out;
}

MomentLambda moment_lambda_details(const RegressionProblem& problem, double q) {
  if (!(q > 0.0)) {
    throw ArgumentError("moment lambda needs q > 0");
  }
  if (problem.n() <= problem.p()) {
    throw UnsupportedError("moment lambda needs n > p (n = " + std::to_string(problem.n()) +
                           ", p = " + std::to_string(problem.p()) + "); supply lambda explicitly");
  }
  if (!problem.has_design()) {
    throw ArgumentError("moment lambda needs the response to estimate the noise variance");
  }
  Eigen::LLT<MatrixXd> llt(problem.Q());
  if (llt.info() != Eigen::Success) {
    throw NumericalError("X^T X is singular; least-squares moments are unavailable");
  }
  const Index n = problem.n();
  const Index p = problem.p();
  const VectorXd beta = llt.solve(problem.l());
  const double rss = (problem.y() - problem.X() * beta).squaredNorm();
  const MatrixXd Qinv = llt.solve(MatrixXd::Identity(p, p));

  MomentLambda out;
  out.sigma_sq = rss / static_cast<double>(n - p);
  const double raw =
      beta.squaredNorm() / static_cast<double>(p) - out.sigma_sq * Qinv.trace() / static_cast<double>(p);
  out.floored = !(raw > kMomentFloor);
  out.m2 = out.floored ? kMomentFloor : raw;
  // E b^2 = Gamma(3/q) / Gamma(1/q) * c^{-2/q} for density proportional to exp(-c |b|^q).
  const double ratio = std::exp(std::lgamma(3.0 / q) - std::lgamma(1.0 / q));
  const double c = std::pow(ratio / out.m2, q / 2.0);
  out.lambda = 2.0 * out.sigma_sq * c;
  return out;
}

double moment_lambda(const RegressionProblem& problem, double q) {
  return moment_lambda_details(problem, q).lambda;
}

void export_dataset(const Dataset& data, const SimDesign& design,
                    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::write_csv_matrix(dir / "X.csv", data.X);
  io::write_csv_vector(dir / "y.csv", data.y);
  io::write_csv_vector(dir / "beta_true.csv", data.beta_true);
  nlohmann::json manifest;
  manifest["design"] = design;
  manifest["files"] = {{"X", "X.csv"}, {"y", "y.csv"}, {"beta_true", "beta_true.csv"}};
  manifest["rng"] = "mt19937_64";
  std::ofstream out(dir / "manifest.json");
  if (!out) {
    throw IoError((dir / "manifest.json").string() + ": cannot open for writing");
  }
  out << manifest.dump(2) << '\n';
}

}  // namespace hadamard

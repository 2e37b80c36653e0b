#pragma once

#include <cstdint>
#include <random>

#include "hadamard/model.hpp"

namespace hadamard {

/// Seeded 64-bit Mersenne Twister with the draws the simulators need.
/// Streams are reproducible for a fixed seed and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  bool bernoulli(double p) { return uniform() < p; }

  MatrixXd normal_matrix(Index rows, Index cols) {
    MatrixXd M(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) M(i, j) = normal();
    return M;
  }

  VectorXd normal_vector(Index n) { return normal_matrix(n, 1).col(0); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace hadamard

#pragma once

#include <string>

#include "hadamard/errors.hpp"
#include "hadamard/linear_solvers.hpp"

namespace hadamard::detail {

// Closes out one iteration: logs it and decides whether to stop.
class IterationLog {
 public:
  IterationLog(SolverTrace& trace, const ConvergenceConfig& conv) : trace_(trace), conv_(conv) {}

  bool finish(const VectorXd& prev, const VectorXd& next, double objective, double surrogate) {
    const double stat = convergence_statistic(prev, next, conv_.column_norms_sq);
    ++trace_.iterations;
    trace_.objective.push_back(objective);
    trace_.surrogate.push_back(surrogate);
    trace_.statistic.push_back(stat);
    trace_.ridge_solves_cumulative.push_back(trace_.ridge_solves);
    trace_.converged = stat <= conv_.delta;
    if (trace_.converged && conv_.stop_on_convergence) return true;
    return trace_.iterations >= conv_.max_iterations;
  }

  bool exhausted() const { return conv_.max_iterations <= 0; }

 private:
  SolverTrace& trace_;
  const ConvergenceConfig& conv_;
};

inline void require_length(const VectorXd& v, Index p, const char* what) {
  if (v.size() != p) {
    throw ArgumentError(std::string(what) + " has " + std::to_string(v.size()) +
                        " entries, expected " + std::to_string(p));
  }
}

// Validates delta and fills column norms when the caller left them empty.
inline void prepare(ConvergenceConfig& conv, const VectorXd& column_norms_sq) {
  if (!(conv.delta > 0.0)) {
    throw ArgumentError("convergence delta must be positive");
  }
  if (conv.column_norms_sq.size() == 0) {
    conv.column_norms_sq = column_norms_sq;
  }
  if (conv.column_norms_sq.size() != column_norms_sq.size()) {
    throw ArgumentError("column_norms_sq length does not match problem dimension");
  }
}

}  // namespace hadamard::detail

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace rsm {

struct SimplexOptions {
  int max_evals = 4000;
  /// Stop when the spread of simplex values and the simplex diameter both fall below tol.
  double tol = 1e-10;
  /// Initial simplex edge as a fraction of each box side.
  double initial_step = 0.1;
  /// Restart from the best vertex until a restart no longer improves the value.
  int max_restarts = 5;
};

struct SimplexResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evals = 0;
  bool converged = false;
};

/// Box-constrained Nelder-Mead. Trial points are projected onto [lower, upper];
/// the objective may return +inf to reject a point.
SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                          const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                          const SimplexOptions& options = {});

/// Latin hypercube sample of `n` points in the box, one point per row.
Eigen::MatrixXd latin_hypercube(int n, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                std::uint64_t seed);

}  // namespace rsm

#pragma once

#include <Eigen/Dense>

#include "rsm/designs.hpp"

namespace rsm {

/// A design paired with its bounded responses (one per run, each in [0, 1]).
struct Dataset {
  Design design;
  Eigen::VectorXd responses;

  /// Throws DomainError unless lengths match and responses are finite and in [0, 1].
  void validate() const;

  Eigen::Index size() const noexcept { return responses.size(); }
  const Eigen::MatrixXd& x() const noexcept { return design.rows; }

  /// Rows of this dataset (which must cover the full grid) at the runs of `sub`.
  Dataset subset(const Design& sub) const;
};

}  // namespace rsm

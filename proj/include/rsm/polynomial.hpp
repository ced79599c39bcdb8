#pragma once

#include <array>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "rsm/dataset.hpp"

namespace rsm {

/// Full quadratic response surface in three factors:
/// b0 + b1 A + b2 B + b3 C + b4 AB + b5 AC + b6 BC + b7 A^2 + b8 B^2 + b9 C^2.
struct PolynomialModel {
  static constexpr std::size_t kTerms = 10;
  static constexpr std::array<const char*, kTerms> kTermNames = {"1",  "A",  "B",   "C",   "AB",
                                                                "AC", "BC", "A^2", "B^2", "C^2"};

  std::array<double, kTerms> betas{};

  /// Not clamped: a quadratic surface is free to leave [0, 1].
  double predict(std::span<const double> x) const;
  Eigen::VectorXd predict_batch(const Eigen::MatrixXd& points) const;
};

/// The ten regressors evaluated at one three-factor point.
Eigen::Matrix<double, 1, PolynomialModel::kTerms> quadratic_terms(std::span<const double> x);
/// Model matrix with one row of quadratic_terms per design row.
Eigen::MatrixXd quadratic_model_matrix(const Eigen::MatrixXd& points);

/// Ordinary least squares fit. Throws SingularDesignError naming the
/// dependent columns when the model matrix is rank deficient.
PolynomialModel poly_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y);
PolynomialModel poly_fit(const Dataset& data);

inline double poly_predict(const PolynomialModel& model, std::span<const double> x) { return model.predict(x); }

}  // namespace rsm

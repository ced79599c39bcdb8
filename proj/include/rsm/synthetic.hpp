#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rsm/dataset.hpp"
#include "rsm/designs.hpp"
#include "rsm/hill.hpp"
#include "rsm/kernels.hpp"
#include "rsm/polynomial.hpp"

namespace rsm {

/// One draw of mu + Z(x) + noise at the rows of `x`, by Cholesky of the
/// covariance. Not clamped.
Eigen::VectorXd sample_gp(const Eigen::MatrixXd& x, const KernelSpec& kernel, std::span<const double> thetas,
                          double sigma2, double mu, double tau2, std::uint64_t seed);

/// Bounded three-drug dose-response surface built from single-drug Hill
/// curves s_i(c_i) = 1 / (1 + (c_i / ic50_i)^slope_i):
///
///   y = s_A s_B s_C + antagonism * s_A (1 - s_B) (1 - s_C)
///
/// The second term lifts the response where B and C are both effective. For
/// antagonism in [0, 1] the response stays in [0, 1].
struct HillSurface {
  std::vector<double> ic50{40.0, 10.0, 20.0};
  std::vector<double> slope{2.0, 2.4, 3.0};
  double antagonism = 0.25;

  /// Parameters shaped like lung-cancer cell viability on the lung-cancer dose grid.
  static HillSurface cancer_like() { return {}; }
  /// Milder, less steep responses, shaped like normal cells.
  static HillSurface normal_like() { return {{60.0, 20.0, 40.0}, {0.8, 0.9, 1.0}, 0.1}; }

  double evaluate(std::span<const double> doses) const;
};

/// Noise-free responses of `surface` on the full factorial of `grid`, plus
/// N(0, noise_sd^2) noise, clamped into [0, 1].
Dataset hill_surface_dataset(const DoseGrid& grid, const HillSurface& surface, double noise_sd, std::uint64_t seed);

/// Responses of a fitted-form Hill model on the full factorial, plus clamped noise.
Dataset hill_model_dataset(const DoseGrid& grid, const HillModel& truth, double noise_sd, std::uint64_t seed);

/// GP draw on the full factorial (standardized coordinates), clamped into [0, 1].
Dataset gp_dataset(const DoseGrid& grid, const KernelSpec& kernel, std::span<const double> thetas, double sigma2,
                   double mu, double tau2, std::uint64_t seed);

/// Quadratic surface on `design` plus noise; not clamped.
Eigen::VectorXd quadratic_responses(const Design& design, const PolynomialModel& truth, double noise_sd,
                                    std::uint64_t seed);

}  // namespace rsm

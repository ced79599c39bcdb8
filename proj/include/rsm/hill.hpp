#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsm/dataset.hpp"
#include "rsm/designs.hpp"

namespace rsm {

/// Hill-type response over three drugs:
///
///   y = 1 / (1 + (c / IC50(t))^gamma(t)),  c = c1 + c2 + c3,  t_i = c_i / c,
///
/// with IC50 and gamma quadratic in the first two dose proportions
/// (basis 1, t1, t2, t1 t2, t1^2, t2^2). The model works on actual doses;
/// standardized design rows are mapped back through the stored dose range.
struct HillModel {
  static constexpr std::size_t kCoefs = 6;

  std::array<double, kCoefs> a{};  // IC50 coefficients
  std::array<double, kCoefs> b{};  // gamma coefficients
  std::vector<double> dose_min;    // per factor, actual dose at standardized 0
  std::vector<double> dose_max;    // per factor, actual dose at standardized 1

  /// Identity dose map for `factors` factors (standardized == actual).
  static HillModel with_unit_doses(std::size_t factors = 3);
  static HillModel with_grid(const DoseGrid& grid);

  double ic50(double t1, double t2) const;
  double gamma(double t1, double t2) const;

  /// Response at actual doses. Zero total dose gives exactly 1. Throws
  /// EvaluationError if IC50 <= 0 at the dose proportions.
  double predict_doses(std::span<const double> doses) const;
  /// Response at a standardized design point.
  double predict(std::span<const double> x) const;
  Eigen::VectorXd predict_batch(const Eigen::MatrixXd& points) const;

  /// True if IC50 > 0 on a lattice of the proportion simplex (t1, t2 >= 0, t1 + t2 <= 1).
  bool ic50_positive_on_simplex(int resolution = 40) const;
};

inline double hill_predict(const HillModel& model, std::span<const double> x) { return model.predict(x); }

/// Why a Hill fit (or one of its starts) was rejected.
enum class HillFailure {
  None,
  NonFinite,      // residuals or parameters became NaN/inf
  Diverged,       // a coefficient grew past the divergence bound
  NotConverged,   // iteration budget exhausted
  Unidentified,   // Jacobian numerically rank deficient at the solution
  NegativeIc50,   // IC50 <= 0 somewhere on the proportion simplex
};

std::string to_string(HillFailure failure);

struct HillFitConfig {
  int n_starts = 20;
  std::uint64_t seed = 0;
  int max_iters = 300;
  /// Relative sum-of-squares change that counts as convergence.
  double tol = 1e-12;
  /// Log-scale spread of the random perturbations around the default start.
  double perturbation = 0.5;
  double max_abs_coef = 1e6;
  /// Relative singular value below which the Jacobian is called rank deficient.
  double rank_tol = 1e-10;
  int simplex_resolution = 40;
};

struct HillStartDiagnostic {
  int index = 0;
  double rss = 0.0;
  int iterations = 0;
  HillFailure failure = HillFailure::None;
};

/// A fit either yields a model or a typed failure; it never throws for
/// numerical trouble.
struct HillFitResult {
  std::optional<HillModel> model;
  HillFailure failure = HillFailure::None;
  double rss = 0.0;
  int best_start = -1;
  /// gamma(t) <= 0 somewhere on the simplex: responses are then not monotone in dose.
  bool gamma_warning = false;
  std::vector<HillStartDiagnostic> starts;

  bool ok() const noexcept { return model.has_value(); }
};

/// Multi-start Levenberg-Marquardt least squares over (a, b). `grid`
/// supplies the actual dose range of each factor. Needs at least 12 runs of
/// three factors; throws DomainError otherwise.
HillFitResult hill_fit(const Dataset& data, const DoseGrid& grid, const HillFitConfig& config = {});
/// Same, with the dose range taken from `dose_map` (its coefficients are ignored).
HillFitResult hill_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const HillModel& dose_map,
                       const HillFitConfig& config = {});

}  // namespace rsm

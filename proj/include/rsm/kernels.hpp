#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rsm {

/// Stationary one-dimensional correlation family.
///
/// Matérn members are restricted to half-integer smoothness nu = p + 1/2,
/// where the correlation has a finite-sum closed form. p = 2 (nu = 5/2) is
/// the default throughout the library; the Gaussian kernel is available but
/// tends to produce badly conditioned covariance matrices.
struct KernelSpec {
  enum class Family { Gaussian, MaternHalfInteger };

  Family family = Family::MaternHalfInteger;
  int p = 2;

  static KernelSpec gaussian() { return {Family::Gaussian, 0}; }
  static KernelSpec matern(int p);
  static KernelSpec matern52() { return {Family::MaternHalfInteger, 2}; }

  /// "gauss", "matern52", "matern32", "matern12" or "matern(p=N)".
  std::string name() const;
  /// Parses the names produced by name(); throws DomainError otherwise.
  static KernelSpec parse(const std::string& name);

  bool operator==(const KernelSpec&) const = default;
};

/// Largest supported Matérn order.
inline constexpr int kMaxMaternOrder = 60;

/// K(h; theta) with the Matérn coefficients computed once. No argument
/// checks; callers validate h and theta.
class Correlator {
 public:
  explicit Correlator(const KernelSpec& spec);
  /// Uses the closed form for p = 2.
  double operator()(double h, double theta) const;
  /// Always the general finite sum for Matérn kernels.
  double general(double h, double theta) const;

 private:
  KernelSpec spec_;
  double decay_ = 0.0;        // sqrt(2 nu)
  std::vector<double> coef_;  // coef_[k] multiplies (h/theta)^k
};

/// K(h) for range parameter theta. Throws DomainError on h < 0 or theta not
/// finite and positive.
double corr_1d(const KernelSpec& spec, double h, double theta);

/// (1 + sqrt(5) r + 5/3 r^2) exp(-sqrt(5) r), r = h / theta.
double corr_1d_closed_matern52(double h, double theta);

/// sigma2 * prod_l K(|xi_l - xj_l|; theta_l).
double cov_pair(const KernelSpec& spec, std::span<const double> xi, std::span<const double> xj,
                std::span<const double> thetas, double sigma2);

/// Covariance matrix between the rows of `a` and the rows of `b`.
Eigen::MatrixXd cov_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           std::span<const double> thetas, double sigma2);

/// Correlation curves K(h) on an even grid over [0, h_max], one column per theta.
struct KernelCurve {
  std::vector<double> h;
  std::vector<double> thetas;
  Eigen::MatrixXd values;  // h.size() x thetas.size()

  /// Header `h,theta_<v1>,...`, full-precision values.
  void write_csv(std::ostream& out) const;
};

KernelCurve kernel_curve(const KernelSpec& spec, const std::vector<double>& thetas, double h_max,
                         int n_points);

}  // namespace rsm

#include "rsm/kernels.hpp"

#include <cmath>
#include <ostream>

#include "rsm/csv.hpp"
#include "rsm/error.hpp"

namespace rsm {
namespace {

void check_args(double h, double theta) {
  if (!std::isfinite(theta) || theta <= 0.0) {
    throw DomainError("range parameter must be finite and positive, got " + format_double(theta));
  }
  if (!(h >= 0.0)) throw DomainError("distance must be non-negative, got " + format_double(h));
}

}  // namespace

Correlator::Correlator(const KernelSpec& spec) : spec_(spec) {
  if (spec.family == KernelSpec::Family::Gaussian) return;
  const int p = spec.p;
  if (p < 0 || p > kMaxMaternOrder) {
    throw DomainError("Matérn order p must be in [0, " + std::to_string(kMaxMaternOrder) + "], got " +
                      std::to_string(p));
  }
  decay_ = std::sqrt(2.0 * p + 1.0);
  coef_.assign(static_cast<std::size_t>(p) + 1, 0.0);
  const long double scale = std::sqrt(8.0L * (p + 0.5L));
  // Gamma(p+1)/Gamma(2p+1) * (p+i)! / (i! (p-i)!) * scale^(p-i) multiplies r^(p-i)
  for (int i = 0; i <= p; ++i) {
    long double c = 1.0L;
    for (int k = p + i + 1; k <= 2 * p; ++k) c /= k;  // (p+i)! / (2p)!
    for (int k = 1; k <= p; ++k) c *= k;
    for (int k = 1; k <= i; ++k) c /= k;
    for (int k = 1; k <= p - i; ++k) c /= k;
    for (int k = 0; k < p - i; ++k) c *= scale;
    coef_[static_cast<std::size_t>(p - i)] = static_cast<double>(c);
  }
}

double Correlator::operator()(double h, double theta) const {
  const double r = h / theta;
  if (spec_.family == KernelSpec::Family::Gaussian) return std::exp(-0.5 * r * r);
  if (spec_.p == 2) {
    const double s = std::sqrt(5.0) * r;
    return (1.0 + s + 5.0 / 3.0 * r * r) * std::exp(-s);
  }
  return general(h, theta);
}

double Correlator::general(double h, double theta) const {
  const double r = h / theta;
  if (spec_.family == KernelSpec::Family::Gaussian) return std::exp(-0.5 * r * r);
  double poly = 0.0;
  for (auto it = coef_.rbegin(); it != coef_.rend(); ++it) poly = poly * r + *it;
  return poly * std::exp(-decay_ * r);
}

KernelSpec KernelSpec::matern(int p) {
  if (p < 0 || p > kMaxMaternOrder) {
    throw DomainError("Matérn order p must be in [0, " + std::to_string(kMaxMaternOrder) + "]");
  }
  return {Family::MaternHalfInteger, p};
}

std::string KernelSpec::name() const {
  if (family == Family::Gaussian) return "gauss";
  switch (p) {
    case 0: return "matern12";
    case 1: return "matern32";
    case 2: return "matern52";
    default: return "matern(p=" + std::to_string(p) + ")";
  }
}

KernelSpec KernelSpec::parse(const std::string& name) {
  if (name == "gauss" || name == "gaussian") return gaussian();
  if (name == "matern12") return matern(0);
  if (name == "matern32") return matern(1);
  if (name == "matern52" || name == "matern") return matern52();
  const std::string prefix = "matern(p=";
  if (name.starts_with(prefix) && name.ends_with(")")) {
    return matern(static_cast<int>(parse_long(name.substr(prefix.size(), name.size() - prefix.size() - 1))));
  }
  throw DomainError("unknown kernel '" + name + "'");
}

double corr_1d(const KernelSpec& spec, double h, double theta) {
  check_args(h, theta);
  // The general finite sum is evaluated for every Matérn order, p = 2 included,
  // so it can be checked against the closed form.
  return Correlator(spec).general(h, theta);
}

double corr_1d_closed_matern52(double h, double theta) {
  check_args(h, theta);
  const double r = h / theta;
  const double s = std::sqrt(5.0) * r;
  return (1.0 + s + 5.0 / 3.0 * r * r) * std::exp(-s);
}

double cov_pair(const KernelSpec& spec, std::span<const double> xi, std::span<const double> xj,
                std::span<const double> thetas, double sigma2) {
  if (xi.size() != xj.size() || xi.size() != thetas.size()) {
    throw DomainError("cov_pair: dimension mismatch (" + std::to_string(xi.size()) + ", " +
                      std::to_string(xj.size()) + ", " + std::to_string(thetas.size()) + ")");
  }
  const Correlator k(spec);
  double prod = sigma2;
  for (std::size_t l = 0; l < xi.size(); ++l) {
    const double h = std::abs(xi[l] - xj[l]);
    check_args(h, thetas[l]);
    prod *= k(h, thetas[l]);
  }
  return prod;
}

Eigen::MatrixXd cov_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           std::span<const double> thetas, double sigma2) {
  const auto d = static_cast<std::size_t>(a.cols());
  if (static_cast<std::size_t>(b.cols()) != d || thetas.size() != d) {
    throw DomainError("cov_matrix: dimension mismatch");
  }
  for (double t : thetas) check_args(0.0, t);
  const Correlator k(spec);
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      double prod = sigma2;
      for (std::size_t l = 0; l < d; ++l) {
        const auto col = static_cast<Eigen::Index>(l);
        prod *= k(std::abs(a(i, col) - b(j, col)), thetas[l]);
      }
      out(i, j) = prod;
    }
  }
  return out;
}

void KernelCurve::write_csv(std::ostream& out) const {
  std::vector<std::string> cells{"h"};
  for (double t : thetas) cells.push_back("theta_" + format_double(t));
  write_csv_row(out, cells);
  for (std::size_t i = 0; i < h.size(); ++i) {
    cells.assign(1, format_double(h[i]));
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      cells.push_back(format_double(values(static_cast<Eigen::Index>(i), j)));
    }
    write_csv_row(out, cells);
  }
}

KernelCurve kernel_curve(const KernelSpec& spec, const std::vector<double>& thetas, double h_max,
                         int n_points) {
  if (n_points < 2) throw DomainError("kernel_curve needs at least 2 points");
  if (!std::isfinite(h_max) || h_max <= 0.0) throw DomainError("kernel_curve: h_max must be positive");
  if (thetas.empty()) throw DomainError("kernel_curve: no range parameters given");
  KernelCurve curve;
  curve.thetas = thetas;
  curve.values.resize(n_points, static_cast<Eigen::Index>(thetas.size()));
  for (int i = 0; i < n_points; ++i) {
    // last point pinned to h_max exactly
    const double h = i == n_points - 1 ? h_max : h_max * i / (n_points - 1);
    curve.h.push_back(h);
    for (std::size_t j = 0; j < thetas.size(); ++j) {
      curve.values(i, static_cast<Eigen::Index>(j)) = corr_1d(spec, h, thetas[j]);
    }
  }
  return curve;
}

}  // namespace rsm

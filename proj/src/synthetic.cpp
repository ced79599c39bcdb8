#include "rsm/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "rsm/error.hpp"
#include "rsm/kriging.hpp"
#include "rsm/random.hpp"

namespace rsm {
namespace {

Eigen::VectorXd clamp_unit(Eigen::VectorXd y) { return y.cwiseMax(0.0).cwiseMin(1.0); }

Eigen::VectorXd add_noise(Eigen::VectorXd y, double noise_sd, std::uint64_t seed) {
  if (!(noise_sd >= 0.0)) throw DomainError("noise standard deviation must be non-negative");
  if (noise_sd == 0.0) return y;
  Rng rng(seed);
  for (auto& v : y) v += noise_sd * rng.normal();
  return y;
}

}  // namespace

Eigen::VectorXd sample_gp(const Eigen::MatrixXd& x, const KernelSpec& kernel, std::span<const double> thetas,
                          double sigma2, double mu, double tau2, std::uint64_t seed) {
  if (!(sigma2 > 0.0) || !(tau2 >= 0.0)) throw DomainError("sample_gp: need sigma2 > 0 and tau2 >= 0");
  Eigen::MatrixXd c = cov_matrix(kernel, x, x, thetas, sigma2);
  c.diagonal().array() += tau2;
  const auto factor = factorize_covariance(c);
  Rng rng(seed);
  Eigen::VectorXd z(x.rows());
  for (auto& v : z) v = rng.normal();
  return (factor.lower * z).array() + mu;
}

double HillSurface::evaluate(std::span<const double> doses) const {
  if (doses.size() != 3 || ic50.size() != 3 || slope.size() != 3) throw DomainError("HillSurface needs 3 drugs");
  double s[3];
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(doses[i] >= 0.0)) throw DomainError("HillSurface: doses must be non-negative");
    s[i] = doses[i] == 0.0 ? 1.0 : 1.0 / (1.0 + std::pow(doses[i] / ic50[i], slope[i]));
  }
  return s[0] * s[1] * s[2] + antagonism * s[0] * (1.0 - s[1]) * (1.0 - s[2]);
}

Dataset hill_surface_dataset(const DoseGrid& grid, const HillSurface& surface, double noise_sd, std::uint64_t seed) {
  Dataset data;
  data.design = full_factorial(grid);
  Eigen::VectorXd y(data.design.runs());
  for (Eigen::Index r = 0; r < y.size(); ++r) {
    const Eigen::VectorXd doses = grid.actual_doses(data.design.rows.row(r).transpose());
    y(r) = surface.evaluate(std::span<const double>(doses.data(), static_cast<std::size_t>(doses.size())));
  }
  data.responses = clamp_unit(add_noise(std::move(y), noise_sd, seed));
  return data;
}

Dataset hill_model_dataset(const DoseGrid& grid, const HillModel& truth, double noise_sd, std::uint64_t seed) {
  Dataset data;
  data.design = full_factorial(grid);
  data.responses = clamp_unit(add_noise(truth.predict_batch(data.design.rows), noise_sd, seed));
  return data;
}

Dataset gp_dataset(const DoseGrid& grid, const KernelSpec& kernel, std::span<const double> thetas, double sigma2,
                   double mu, double tau2, std::uint64_t seed) {
  Dataset data;
  data.design = full_factorial(grid);
  data.responses = clamp_unit(sample_gp(data.design.rows, kernel, thetas, sigma2, mu, tau2, seed));
  return data;
}

Eigen::VectorXd quadratic_responses(const Design& design, const PolynomialModel& truth, double noise_sd,
                                    std::uint64_t seed) {
  return add_noise(truth.predict_batch(design.rows), noise_sd, seed);
}

}  // namespace rsm

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsm/dataset.hpp"
#include "rsm/kernels.hpp"

namespace rsm {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct FitConfig {
  /// Fixed noise (nugget) variance added to the covariance diagonal.
  double tau2 = 1e-4;
  /// Range parameter bounds, one per input dimension; a single entry applies to all.
  std::vector<Interval> theta_bounds{{1e-3, 1e2}};
  Interval sigma2_bounds{1e-6, 1e2};
  int n_restarts = 10;
  std::uint64_t seed = 0;
  /// Objective evaluations allowed per restart.
  int max_iters = 4000;
  double tol = 1e-10;
  /// Workers for the restarts (0 = hardware concurrency). Results do not depend on it.
  unsigned threads = 1;

  /// Throws DomainError if bounds are not positive and ordered or n_restarts < 1.
  void validate(std::size_t dims) const;
  Interval theta_bound(std::size_t dim) const;
};

struct Prediction {
  double mean = 0.0;
  std::optional<double> variance;
};

/// Outcome of one local likelihood optimization.
struct RestartDiagnostic {
  int index = 0;
  std::vector<double> start;  // log parameters: log theta_1..d, log sigma2
  double value = 0.0;         // negative log-likelihood reached (inf if failed)
  int evals = 0;
  bool converged = false;
  std::string error;
};

struct FitSummary {
  double neg_log_likelihood = 0.0;
  int best_restart = -1;
  std::vector<RestartDiagnostic> restarts;
};

/// Lower Cholesky factor of a covariance matrix and the diagonal jitter that
/// was needed to obtain it.
struct CovarianceFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};

/// Cholesky with the escalating jitter policy: none, then 1e-10, 1e-8 and 1e-6
/// times the mean diagonal. Throws IllConditionedError listing every level tried.
CovarianceFactor factorize_covariance(const Eigen::MatrixXd& c);

/// Ordinary Kriging model with homogeneous noise, fitted or assembled from
/// known parameters. Immutable once built; safe to share between threads.
class KrigingModel {
 public:
  /// Builds C = Phi + tau2 I, factorizes it and computes the GLS trend.
  KrigingModel(KernelSpec kernel, std::vector<double> thetas, double sigma2, double tau2,
               Eigen::MatrixXd design, Eigen::VectorXd responses);

  const KernelSpec& kernel() const noexcept { return kernel_; }
  const std::vector<double>& thetas() const noexcept { return thetas_; }
  double sigma2() const noexcept { return sigma2_; }
  double tau2() const noexcept { return tau2_; }
  double mu_hat() const noexcept { return mu_hat_; }
  const Eigen::MatrixXd& design() const noexcept { return design_; }
  const Eigen::VectorXd& responses() const noexcept { return responses_; }
  const Eigen::MatrixXd& chol() const noexcept { return factor_.lower; }
  double jitter() const noexcept { return factor_.jitter; }
  Eigen::Index dims() const noexcept { return design_.cols(); }

  /// Present only on models returned by fit_kriging.
  const std::optional<FitSummary>& summary() const noexcept { return summary_; }
  void set_summary(FitSummary s) { summary_ = std::move(s); }

  /// mu_hat + gamma' C^-1 (y - mu_hat 1). The variance, when requested, is that
  /// of a new noisy observation including the trend-estimation term.
  Prediction predict(std::span<const double> x, bool with_variance = false) const;
  std::vector<Prediction> predict_batch(const Eigen::MatrixXd& points, bool with_variance = false) const;
  Eigen::VectorXd predict_mean(const Eigen::MatrixXd& points) const;

  double neg_log_likelihood() const;

 private:
  KernelSpec kernel_;
  std::vector<double> thetas_;
  double sigma2_;
  double tau2_;
  Eigen::MatrixXd design_;
  Eigen::VectorXd responses_;
  CovarianceFactor factor_;
  double mu_hat_ = 0.0;
  Eigen::VectorXd alpha_;     // C^-1 (y - mu_hat 1)
  Eigen::VectorXd cinv_one_;  // C^-1 1
  double one_cinv_one_ = 0.0;
  std::optional<FitSummary> summary_;
};

/// GLS estimate (1' C^-1 1)^-1 1' C^-1 y for a given lower Cholesky factor of C.
double gls_trend(const Eigen::MatrixXd& chol_lower, const Eigen::VectorXd& y);

/// 1/2 [ln det C + r' C^-1 r + n ln 2 pi], r = y - mu_hat 1 with mu_hat profiled.
/// Needs at least two runs.
double neg_log_likelihood(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const KernelSpec& kernel,
                          std::span<const double> thetas, double sigma2, double tau2);
double neg_log_likelihood(const Dataset& data, const KernelSpec& kernel, std::span<const double> thetas,
                          double sigma2, double tau2);

/// Maximum-likelihood fit of (theta, sigma2) by multi-start Nelder-Mead in log
/// space. Starts come from a Latin hypercube over the log bounds. Ties between
/// restarts go to the lowest restart index. Throws FitFailedError if every
/// restart fails.
KrigingModel fit_kriging(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const KernelSpec& kernel,
                         const FitConfig& config);
/// As above; additionally requires responses in [0, 1].
KrigingModel fit_kriging(const Dataset& data, const KernelSpec& kernel, const FitConfig& config);

/// Fitted parameters in the column order theta_1..theta_d, sigma2, trend.
struct ParameterReport {
  std::vector<std::string> names;
  std::vector<double> values;
  /// Bootstrap standard deviations; empty when no resamples were requested.
  std::vector<double> sds;
  int resamples = 0;

  std::string to_text() const;
};

/// Parameter table for a model. With `resamples` > 0, SDs come from a
/// parametric bootstrap: responses are redrawn from the fitted process at the
/// design points (seeded) and refitted with `config`.
ParameterReport parameter_report(const KrigingModel& model, int resamples = 0, const FitConfig& config = {});

}  // namespace rsm

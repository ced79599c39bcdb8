#include "rsm/kriging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "rsm/csv.hpp"
#include "rsm/error.hpp"
#include "rsm/optimize.hpp"
#include "rsm/parallel.hpp"
#include "rsm/random.hpp"

namespace rsm {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2 pi)

void check_design(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
  if (design.rows() != y.size()) {
    throw DomainError("design has " + std::to_string(design.rows()) + " runs but " + std::to_string(y.size()) +
                      " responses");
  }
  if (design.rows() < 2) throw DomainError("Kriging needs at least 2 runs, got " + std::to_string(design.rows()));
  if (design.cols() < 1) throw DomainError("Kriging needs at least one input dimension");
  if (!design.allFinite() || !y.allFinite()) throw DomainError("design and responses must be finite");
}

void check_params(std::span<const double> thetas, Eigen::Index dims, double sigma2, double tau2) {
  if (static_cast<Eigen::Index>(thetas.size()) != dims) {
    throw DomainError("expected " + std::to_string(dims) + " range parameters, got " + std::to_string(thetas.size()));
  }
  for (double t : thetas) {
    if (!std::isfinite(t) || t <= 0.0) throw DomainError("range parameters must be finite and positive");
  }
  if (!std::isfinite(sigma2) || sigma2 <= 0.0) throw DomainError("sigma2 must be finite and positive");
  if (!std::isfinite(tau2) || tau2 < 0.0) throw DomainError("tau2 must be finite and non-negative");
}

/// Pairwise per-dimension distances of a design, deduplicated so each
/// correlation value is computed once per likelihood evaluation. Factorial
/// designs have only a handful of distinct distances per factor.
class DistanceCache {
 public:
  explicit DistanceCache(const Eigen::MatrixXd& x) : n_(x.rows()) {
    const Eigen::Index pairs = n_ * (n_ - 1) / 2;
    for (Eigen::Index l = 0; l < x.cols(); ++l) {
      std::map<double, int> ids;
      Eigen::VectorXi idx(pairs);
      Eigen::Index k = 0;
      for (Eigen::Index j = 0; j < n_; ++j) {
        for (Eigen::Index i = j + 1; i < n_; ++i) {
          const double h = std::abs(x(i, l) - x(j, l));
          auto [it, inserted] = ids.emplace(h, static_cast<int>(ids.size()));
          idx(k++) = it->second;
        }
      }
      std::vector<double> unique(ids.size());
      for (const auto& [h, id] : ids) unique[static_cast<std::size_t>(id)] = h;
      distances_.push_back(std::move(unique));
      index_.push_back(std::move(idx));
    }
  }

  Eigen::MatrixXd covariance(const KernelSpec& kernel, std::span<const double> thetas, double sigma2,
                             double tau2) const {
    const Correlator k(kernel);
    std::vector<std::vector<double>> corr(distances_.size());
    for (std::size_t l = 0; l < distances_.size(); ++l) {
      corr[l].reserve(distances_[l].size());
      for (double h : distances_[l]) corr[l].push_back(k(h, thetas[l]));
    }
    Eigen::MatrixXd c(n_, n_);
    Eigen::Index pair = 0;
    for (Eigen::Index j = 0; j < n_; ++j) {
      c(j, j) = sigma2 + tau2;
      for (Eigen::Index i = j + 1; i < n_; ++i, ++pair) {
        double v = sigma2;
        for (std::size_t l = 0; l < corr.size(); ++l) v *= corr[l][static_cast<std::size_t>(index_[l](pair))];
        c(i, j) = v;
        c(j, i) = v;
      }
    }
    return c;
  }

 private:
  Eigen::Index n_;
  std::vector<std::vector<double>> distances_;
  std::vector<Eigen::VectorXi> index_;
};

Eigen::MatrixXd covariance(const KernelSpec& kernel, const Eigen::MatrixXd& x, std::span<const double> thetas,
                           double sigma2, double tau2) {
  Eigen::MatrixXd c = cov_matrix(kernel, x, x, thetas, sigma2);
  c.diagonal().array() += tau2;
  return c;
}

struct Profile {
  double mu_hat;
  double quad;
  double log_det;
};

Profile profile(const Eigen::MatrixXd& lower, const Eigen::VectorXd& y) {
  const auto tri = lower.triangularView<Eigen::Lower>();
  const Eigen::VectorXd a = tri.solve(Eigen::VectorXd::Ones(y.size()));
  const Eigen::VectorXd b = tri.solve(y);
  const double mu = a.dot(b) / a.squaredNorm();
  const double quad = (b - mu * a).squaredNorm();
  const double log_det = 2.0 * lower.diagonal().array().log().sum();
  return {mu, quad, log_det};
}

double nll_from_factor(const Eigen::MatrixXd& lower, const Eigen::VectorXd& y) {
  const auto p = profile(lower, y);
  return 0.5 * (p.log_det + p.quad + static_cast<double>(y.size()) * kLog2Pi);
}

}  // namespace

void FitConfig::validate(std::size_t dims) const {
  if (theta_bounds.size() != 1 && theta_bounds.size() != dims) {
    throw DomainError("theta_bounds must have 1 or " + std::to_string(dims) + " entries");
  }
  auto check = [](const Interval& b, const char* what) {
    if (!(b.lo > 0.0) || !(b.hi >= b.lo) || !std::isfinite(b.hi)) {
      throw DomainError(std::string(what) + " bounds must satisfy 0 < lo <= hi < inf");
    }
  };
  for (const auto& b : theta_bounds) check(b, "theta");
  check(sigma2_bounds, "sigma2");
  if (n_restarts < 1) throw DomainError("n_restarts must be at least 1");
  if (max_iters < 1) throw DomainError("max_iters must be at least 1");
  if (!std::isfinite(tau2) || tau2 < 0.0) throw DomainError("tau2 must be finite and non-negative");
}

Interval FitConfig::theta_bound(std::size_t dim) const {
  return theta_bounds.size() == 1 ? theta_bounds.front() : theta_bounds.at(dim);
}

CovarianceFactor factorize_covariance(const Eigen::MatrixXd& c) {
  if (c.rows() != c.cols() || c.rows() == 0) throw DomainError("covariance must be square and non-empty");
  const double mean_diag = c.diagonal().mean();
  std::vector<double> tried;
  for (double rel : {0.0, 1e-10, 1e-8, 1e-6}) {
    const double jitter = rel * mean_diag;
    tried.push_back(jitter);
    Eigen::LLT<Eigen::MatrixXd> llt;
    if (jitter == 0.0) {
      llt.compute(c);
    } else {
      Eigen::MatrixXd cj = c;
      cj.diagonal().array() += jitter;
      llt.compute(cj);
    }
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd lower = llt.matrixL();
    if (!lower.allFinite() || (lower.diagonal().array() <= 0.0).any()) continue;
    return {std::move(lower), jitter};
  }
  std::ostringstream msg;
  msg << "covariance matrix is not positive definite; jitter tried:";
  for (double j : tried) msg << ' ' << format_double(j);
  throw IllConditionedError(msg.str(), tried);
}

double gls_trend(const Eigen::MatrixXd& chol_lower, const Eigen::VectorXd& y) {
  return profile(chol_lower, y).mu_hat;
}

KrigingModel::KrigingModel(KernelSpec kernel, std::vector<double> thetas, double sigma2, double tau2,
                           Eigen::MatrixXd design, Eigen::VectorXd responses)
    : kernel_(kernel),
      thetas_(std::move(thetas)),
      sigma2_(sigma2),
      tau2_(tau2),
      design_(std::move(design)),
      responses_(std::move(responses)) {
  check_design(design_, responses_);
  check_params(thetas_, design_.cols(), sigma2_, tau2_);
  factor_ = factorize_covariance(covariance(kernel_, design_, thetas_, sigma2_, tau2_));
  const auto llt_solve = [this](const Eigen::VectorXd& v) {
    const Eigen::VectorXd w = factor_.lower.triangularView<Eigen::Lower>().solve(v);
    return factor_.lower.transpose().triangularView<Eigen::Upper>().solve(w).eval();
  };
  cinv_one_ = llt_solve(Eigen::VectorXd::Ones(responses_.size()));
  one_cinv_one_ = cinv_one_.sum();
  mu_hat_ = cinv_one_.dot(responses_) / one_cinv_one_;
  alpha_ = llt_solve((responses_.array() - mu_hat_).matrix());
}

Prediction KrigingModel::predict(std::span<const double> x, bool with_variance) const {
  if (static_cast<Eigen::Index>(x.size()) != dims()) {
    throw DomainError("prediction point has " + std::to_string(x.size()) + " coordinates, model has " +
                      std::to_string(dims()));
  }
  const Eigen::Map<const Eigen::RowVectorXd> row(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd gamma = cov_matrix(kernel_, design_, row, thetas_, sigma2_);
  Prediction out;
  out.mean = mu_hat_ + gamma.dot(alpha_);
  if (with_variance) {
    const auto tri = factor_.lower.triangularView<Eigen::Lower>();
    const Eigen::VectorXd v = tri.solve(gamma);
    const double trend_term = 1.0 - cinv_one_.dot(gamma);
    const double var = sigma2_ + tau2_ - v.squaredNorm() + trend_term * trend_term / one_cinv_one_;
    out.variance = std::max(0.0, var);
  }
  return out;
}

std::vector<Prediction> KrigingModel::predict_batch(const Eigen::MatrixXd& points, bool with_variance) const {
  if (points.rows() > 0 && points.cols() != dims()) {
    throw DomainError("prediction points have " + std::to_string(points.cols()) + " columns, model has " +
                      std::to_string(dims()));
  }
  std::vector<Prediction> out;
  out.reserve(static_cast<std::size_t>(points.rows()));
  std::vector<double> x(static_cast<std::size_t>(dims()));
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    for (Eigen::Index c = 0; c < dims(); ++c) x[static_cast<std::size_t>(c)] = points(r, c);
    out.push_back(predict(x, with_variance));
  }
  return out;
}

Eigen::VectorXd KrigingModel::predict_mean(const Eigen::MatrixXd& points) const {
  const auto preds = predict_batch(points, false);
  Eigen::VectorXd out(static_cast<Eigen::Index>(preds.size()));
  for (std::size_t i = 0; i < preds.size(); ++i) out(static_cast<Eigen::Index>(i)) = preds[i].mean;
  return out;
}

double KrigingModel::neg_log_likelihood() const { return nll_from_factor(factor_.lower, responses_); }

double neg_log_likelihood(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const KernelSpec& kernel,
                          std::span<const double> thetas, double sigma2, double tau2) {
  check_design(design, y);
  check_params(thetas, design.cols(), sigma2, tau2);
  const auto factor = factorize_covariance(covariance(kernel, design, thetas, sigma2, tau2));
  return nll_from_factor(factor.lower, y);
}

double neg_log_likelihood(const Dataset& data, const KernelSpec& kernel, std::span<const double> thetas,
                          double sigma2, double tau2) {
  return neg_log_likelihood(data.design.rows, data.responses, kernel, thetas, sigma2, tau2);
}

KrigingModel fit_kriging(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const KernelSpec& kernel,
                         const FitConfig& config) {
  check_design(design, y);
  const auto d = static_cast<std::size_t>(design.cols());
  config.validate(d);
  // validates the kernel before any work
  (void)corr_1d(kernel, 0.0, 1.0);

  const auto dim = static_cast<Eigen::Index>(d + 1);
  Eigen::VectorXd lower(dim), upper(dim);
  for (std::size_t l = 0; l < d; ++l) {
    lower(static_cast<Eigen::Index>(l)) = std::log(config.theta_bound(l).lo);
    upper(static_cast<Eigen::Index>(l)) = std::log(config.theta_bound(l).hi);
  }
  lower(dim - 1) = std::log(config.sigma2_bounds.lo);
  upper(dim - 1) = std::log(config.sigma2_bounds.hi);

  const DistanceCache cache(design);
  const auto objective = [&](const Eigen::VectorXd& z) {
    std::vector<double> thetas(d);
    for (std::size_t l = 0; l < d; ++l) thetas[l] = std::exp(z(static_cast<Eigen::Index>(l)));
    const double sigma2 = std::exp(z(dim - 1));
    try {
      const auto factor = factorize_covariance(cache.covariance(kernel, thetas, sigma2, config.tau2));
      return nll_from_factor(factor.lower, y);
    } catch (const IllConditionedError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const Eigen::MatrixXd starts = latin_hypercube(config.n_restarts, lower, upper, config.seed);
  SimplexOptions options;
  options.max_evals = config.max_iters;
  options.tol = config.tol;

  FitSummary summary;
  summary.restarts.resize(static_cast<std::size_t>(config.n_restarts));
  std::vector<Eigen::VectorXd> optima(static_cast<std::size_t>(config.n_restarts));
  parallel_for(static_cast<std::size_t>(config.n_restarts), config.threads, [&](std::size_t r) {
    auto& diag = summary.restarts[r];
    diag.index = static_cast<int>(r);
    const Eigen::VectorXd x0 = starts.row(static_cast<Eigen::Index>(r)).transpose();
    diag.start.assign(x0.data(), x0.data() + x0.size());
    try {
      const auto res = nelder_mead(objective, x0, lower, upper, options);
      diag.value = res.value;
      diag.evals = res.evals;
      diag.converged = res.converged;
      if (!std::isfinite(res.value)) diag.error = "no finite likelihood reached";
      optima[r] = res.x;
    } catch (const std::exception& e) {
      diag.value = std::numeric_limits<double>::infinity();
      diag.error = e.what();
    }
  });

  for (const auto& diag : summary.restarts) {
    if (!std::isfinite(diag.value)) continue;
    if (summary.best_restart < 0 || diag.value < summary.neg_log_likelihood) {
      summary.best_restart = diag.index;
      summary.neg_log_likelihood = diag.value;
    }
  }
  if (summary.best_restart < 0) {
    std::vector<std::string> lines;
    for (const auto& diag : summary.restarts) {
      lines.push_back("restart " + std::to_string(diag.index) + ": " + diag.error);
    }
    throw FitFailedError("Kriging fit failed: all " + std::to_string(config.n_restarts) + " restarts failed", lines);
  }

  const Eigen::VectorXd& best = optima[static_cast<std::size_t>(summary.best_restart)];
  std::vector<double> thetas(d);
  for (std::size_t l = 0; l < d; ++l) thetas[l] = std::exp(best(static_cast<Eigen::Index>(l)));
  KrigingModel model(kernel, std::move(thetas), std::exp(best(dim - 1)), config.tau2, design, y);
  model.set_summary(std::move(summary));
  return model;
}

KrigingModel fit_kriging(const Dataset& data, const KernelSpec& kernel, const FitConfig& config) {
  data.validate();
  return fit_kriging(data.design.rows, data.responses, kernel, config);
}

std::string ParameterReport::to_text() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << names[i] << ' ' << format_double(values[i]);
    if (!sds.empty()) out << ' ' << format_double(sds[i]);
    out << '\n';
  }
  return out.str();
}

ParameterReport parameter_report(const KrigingModel& model, int resamples, const FitConfig& config) {
  if (resamples < 0) throw DomainError("resamples must be non-negative");
  ParameterReport report;
  const auto d = model.thetas().size();
  for (std::size_t l = 0; l < d; ++l) {
    report.names.push_back("theta_" + factor_letter(l));
    report.values.push_back(model.thetas()[l]);
  }
  report.names.push_back("sigma2");
  report.values.push_back(model.sigma2());
  report.names.push_back("trend");
  report.values.push_back(model.mu_hat());
  report.resamples = resamples;
  if (resamples == 0) return report;

  std::vector<std::vector<double>> draws(static_cast<std::size_t>(resamples));
  parallel_for(draws.size(), config.threads, [&](std::size_t b) {
    Rng rng(derive_seed(config.seed, b));
    Eigen::VectorXd z(model.responses().size());
    for (auto& v : z) v = rng.normal();
    const Eigen::VectorXd y = (model.chol() * z).array() + model.mu_hat();
    FitConfig inner = config;
    inner.seed = derive_seed(config.seed ^ 0xB007ULL, b);
    inner.threads = 1;
    const auto refit = fit_kriging(model.design(), y, model.kernel(), inner);
    std::vector<double> row(refit.thetas());
    row.push_back(refit.sigma2());
    row.push_back(refit.mu_hat());
    draws[b] = std::move(row);
  });
  report.sds.assign(report.values.size(), 0.0);
  for (std::size_t k = 0; k < report.values.size(); ++k) {
    double mean = 0.0;
    for (const auto& row : draws) mean += row[k];
    mean /= resamples;
    double ss = 0.0;
    for (const auto& row : draws) ss += (row[k] - mean) * (row[k] - mean);
    report.sds[k] = resamples > 1 ? std::sqrt(ss / (resamples - 1)) : 0.0;
  }
  return report;
}

}  // namespace rsm

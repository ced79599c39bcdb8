#include "rsm/hill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rsm/error.hpp"
#include "rsm/random.hpp"

namespace rsm {
namespace {

using Params = Eigen::Matrix<double, 12, 1>;

Eigen::Matrix<double, 6, 1> basis(double t1, double t2) {
  Eigen::Matrix<double, 6, 1> phi;
  phi << 1.0, t1, t2, t1 * t2, t1 * t1, t2 * t2;
  return phi;
}

/// 1 / (1 + e^s) without overflow.
double logistic_tail(double s) {
  if (s > 0) {
    const double e = std::exp(-s);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(s));
}

struct Row {
  double total = 0.0;
  Eigen::Matrix<double, 6, 1> phi;
};

/// Per-run total dose and proportion basis, in actual doses.
std::vector<Row> prepare_rows(const Eigen::MatrixXd& design, const HillModel& map) {
  std::vector<Row> rows(static_cast<std::size_t>(design.rows()));
  for (Eigen::Index r = 0; r < design.rows(); ++r) {
    double doses[3];
    for (Eigen::Index f = 0; f < 3; ++f) {
      const auto i = static_cast<std::size_t>(f);
      doses[i] = map.dose_min[i] + design(r, f) * (map.dose_max[i] - map.dose_min[i]);
      if (doses[i] < 0.0) throw DomainError("Hill model needs non-negative doses (run " + std::to_string(r + 1) + ")");
    }
    auto& row = rows[static_cast<std::size_t>(r)];
    row.total = doses[0] + doses[1] + doses[2];
    row.phi = row.total > 0.0 ? basis(doses[0] / row.total, doses[1] / row.total) : basis(0.0, 0.0);
  }
  return rows;
}

/// Residuals y - f and the Jacobian of f. Returns false if IC50 <= 0 at any
/// dosed run or anything is non-finite.
bool evaluate(const std::vector<Row>& rows, const Eigen::VectorXd& y, const Params& p, Eigen::VectorXd& resid,
              Eigen::MatrixXd* jac) {
  const auto a = p.head<6>();
  const auto b = p.tail<6>();
  resid.resize(y.size());
  if (jac) jac->setZero(y.size(), 12);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const Row& row = rows[i];
    if (row.total <= 0.0) {
      resid(r) = y(r) - 1.0;
      continue;
    }
    const double ic = a.dot(row.phi);
    if (!(ic > 0.0)) return false;
    const double g = b.dot(row.phi);
    const double log_ratio = std::log(row.total) - std::log(ic);
    const double s = g * log_ratio;
    const double f = logistic_tail(s);
    resid(r) = y(r) - f;
    if (jac) {
      const double slope = logistic_tail(s) * logistic_tail(-s);  // f (1 - f)
      jac->block<1, 6>(r, 0) = (slope * g / ic) * row.phi.transpose();
      jac->block<1, 6>(r, 6) = (-slope * log_ratio) * row.phi.transpose();
    }
  }
  return resid.allFinite() && (!jac || jac->allFinite());
}

struct LocalFit {
  Params p;
  double rss = std::numeric_limits<double>::infinity();
  int iterations = 0;
  HillFailure failure = HillFailure::None;
};

LocalFit levenberg_marquardt(const std::vector<Row>& rows, const Eigen::VectorXd& y, Params p,
                             const HillFitConfig& cfg) {
  LocalFit out;
  Eigen::VectorXd resid, trial_resid;
  Eigen::MatrixXd jac;
  if (!evaluate(rows, y, p, resid, &jac)) {
    out.failure = HillFailure::NonFinite;
    return out;
  }
  double rss = resid.squaredNorm();
  double lambda = 1e-3;
  bool converged = false;
  int it = 0;
  for (; it < cfg.max_iters && !converged; ++it) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * resid;
    Eigen::VectorXd scale = jtj.diagonal().cwiseMax(1e-30);
    bool accepted = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd lhs = jtj;
      lhs.diagonal() += lambda * scale;
      const Params step = lhs.ldlt().solve(jtr);
      const Params trial = p + step;
      if (step.allFinite() && evaluate(rows, y, trial, trial_resid, nullptr)) {
        const double trial_rss = trial_resid.squaredNorm();
        if (trial_rss <= rss) {
          const double drop = rss - trial_rss;
          const bool small_step = step.norm() <= 1e-12 * (p.norm() + 1e-12);
          p = trial;
          converged = drop <= cfg.tol * std::max(rss, 1e-300) || small_step || trial_rss == 0.0;
          rss = trial_rss;
          lambda = std::max(lambda / 10.0, 1e-12);
          accepted = true;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // no descent direction left at machine precision: a stationary point
      converged = true;
      break;
    }
    if (!p.allFinite()) {
      out.failure = HillFailure::NonFinite;
      return out;
    }
    if (p.cwiseAbs().maxCoeff() > cfg.max_abs_coef) {
      out.p = p;
      out.rss = rss;
      out.iterations = it + 1;
      out.failure = HillFailure::Diverged;
      return out;
    }
    evaluate(rows, y, p, resid, &jac);
  }
  out.p = p;
  out.rss = rss;
  out.iterations = it;
  if (!converged) {
    out.failure = HillFailure::NotConverged;
    return out;
  }
  evaluate(rows, y, p, resid, &jac);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const auto& sv = svd.singularValues();
  if (sv.size() < 12 || sv(0) <= 1e-12 || sv(sv.size() - 1) <= cfg.rank_tol * sv(0)) {
    out.failure = HillFailure::Unidentified;
  }
  return out;
}

HillModel to_model(const Params& p, const HillModel& map) {
  HillModel m = map;
  for (std::size_t k = 0; k < 6; ++k) {
    m.a[k] = p(static_cast<Eigen::Index>(k));
    m.b[k] = p(static_cast<Eigen::Index>(k + 6));
  }
  return m;
}

}  // namespace

std::string to_string(HillFailure failure) {
  switch (failure) {
    case HillFailure::None: return "none";
    case HillFailure::NonFinite: return "non-finite";
    case HillFailure::Diverged: return "diverged";
    case HillFailure::NotConverged: return "not-converged";
    case HillFailure::Unidentified: return "unidentified";
    case HillFailure::NegativeIc50: return "negative-ic50";
  }
  return "unknown";
}

HillModel HillModel::with_unit_doses(std::size_t factors) {
  HillModel m;
  m.dose_min.assign(factors, 0.0);
  m.dose_max.assign(factors, 1.0);
  return m;
}

HillModel HillModel::with_grid(const DoseGrid& grid) {
  HillModel m;
  for (std::size_t f = 0; f < grid.factors(); ++f) {
    m.dose_min.push_back(grid.min_dose(f));
    m.dose_max.push_back(grid.max_dose(f));
  }
  return m;
}

double HillModel::ic50(double t1, double t2) const {
  const auto phi = basis(t1, t2);
  return Eigen::Map<const Eigen::Matrix<double, 6, 1>>(a.data()).dot(phi);
}

double HillModel::gamma(double t1, double t2) const {
  const auto phi = basis(t1, t2);
  return Eigen::Map<const Eigen::Matrix<double, 6, 1>>(b.data()).dot(phi);
}

double HillModel::predict_doses(std::span<const double> doses) const {
  if (doses.size() != 3) throw DomainError("Hill model needs 3 doses, got " + std::to_string(doses.size()));
  for (double c : doses) {
    if (!(c >= 0.0)) throw DomainError("Hill model needs non-negative doses");
  }
  const double total = doses[0] + doses[1] + doses[2];
  // no drug: full response, the c -> 0+ limit
  if (total == 0.0) return 1.0;
  const double t1 = doses[0] / total;
  const double t2 = doses[1] / total;
  const double ic = ic50(t1, t2);
  if (!(ic > 0.0)) {
    throw EvaluationError("IC50 is not positive at proportions (" + std::to_string(t1) + ", " +
                          std::to_string(t2) + ")");
  }
  return logistic_tail(gamma(t1, t2) * (std::log(total) - std::log(ic)));
}

double HillModel::predict(std::span<const double> x) const {
  if (x.size() != 3 || dose_min.size() != 3 || dose_max.size() != 3) {
    throw DomainError("Hill model needs 3 factors");
  }
  double doses[3];
  for (std::size_t f = 0; f < 3; ++f) doses[f] = dose_min[f] + x[f] * (dose_max[f] - dose_min[f]);
  return predict_doses(doses);
}

Eigen::VectorXd HillModel::predict_batch(const Eigen::MatrixXd& points) const {
  if (points.rows() > 0 && points.cols() != 3) throw DomainError("Hill model needs 3 factors");
  Eigen::VectorXd out(points.rows());
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    const double x[3] = {points(r, 0), points(r, 1), points(r, 2)};
    out(r) = predict(x);
  }
  return out;
}

bool HillModel::ic50_positive_on_simplex(int resolution) const {
  resolution = std::max(resolution, 1);
  for (int i = 0; i <= resolution; ++i) {
    for (int j = 0; i + j <= resolution; ++j) {
      if (!(ic50(static_cast<double>(i) / resolution, static_cast<double>(j) / resolution) > 0.0)) return false;
    }
  }
  return true;
}

HillFitResult hill_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const HillModel& dose_map,
                       const HillFitConfig& config) {
  if (design.cols() != 3) throw DomainError("Hill model needs 3 factors, got " + std::to_string(design.cols()));
  if (design.rows() != y.size()) throw DomainError("hill_fit: design and response lengths differ");
  if (design.rows() < 12) throw DomainError("hill_fit needs at least 12 runs, got " + std::to_string(design.rows()));
  if (dose_map.dose_min.size() != 3 || dose_map.dose_max.size() != 3) throw DomainError("hill_fit: bad dose map");
  if (!y.allFinite()) throw DomainError("hill_fit: responses must be finite");
  if (config.n_starts < 1) throw DomainError("hill_fit: n_starts must be at least 1");

  const auto rows = prepare_rows(design, dose_map);
  std::vector<double> totals;
  for (const auto& r : rows) {
    if (r.total > 0.0) totals.push_back(r.total);
  }
  if (totals.empty()) throw DomainError("hill_fit: every run has zero total dose");
  std::nth_element(totals.begin(), totals.begin() + static_cast<std::ptrdiff_t>(totals.size() / 2), totals.end());
  const double median_dose = totals[totals.size() / 2];

  HillFitResult result;
  Rng rng(config.seed);
  Params best_p = Params::Zero();
  for (int s = 0; s < config.n_starts; ++s) {
    Params p0 = Params::Zero();
    p0(0) = median_dose;
    p0(6) = 1.0;
    if (s > 0) {
      p0(0) = median_dose * std::exp(config.perturbation * 2.0 * rng.normal());
      for (int k = 1; k < 6; ++k) p0(k) = p0(0) * config.perturbation * rng.normal();
      p0(6) = std::exp(config.perturbation * rng.normal());
      for (int k = 7; k < 12; ++k) p0(k) = config.perturbation * rng.normal();
    }
    LocalFit fit = levenberg_marquardt(rows, y, p0, config);
    if (fit.failure == HillFailure::None && !to_model(fit.p, dose_map).ic50_positive_on_simplex(config.simplex_resolution)) {
      fit.failure = HillFailure::NegativeIc50;
    }
    result.starts.push_back({s, fit.rss, fit.iterations, fit.failure});
    if (fit.failure != HillFailure::None) continue;
    if (result.best_start < 0 || fit.rss < result.rss) {
      result.best_start = s;
      result.rss = fit.rss;
      best_p = fit.p;
    }
  }

  if (result.best_start < 0) {
    // report the reason of the start that got closest
    const auto closest = std::min_element(result.starts.begin(), result.starts.end(), [](const auto& l, const auto& r) {
      const double lv = std::isfinite(l.rss) ? l.rss : std::numeric_limits<double>::max();
      const double rv = std::isfinite(r.rss) ? r.rss : std::numeric_limits<double>::max();
      return lv < rv;
    });
    result.failure = closest->failure;
    result.rss = closest->rss;
    return result;
  }
  result.model = to_model(best_p, dose_map);
  const int res = std::max(config.simplex_resolution, 1);
  for (int i = 0; i <= res && !result.gamma_warning; ++i) {
    for (int j = 0; i + j <= res; ++j) {
      if (!(result.model->gamma(static_cast<double>(i) / res, static_cast<double>(j) / res) > 0.0)) {
        result.gamma_warning = true;
        break;
      }
    }
  }
  return result;
}

HillFitResult hill_fit(const Dataset& data, const DoseGrid& grid, const HillFitConfig& config) {
  data.validate();
  if (grid.factors() != 3) throw DomainError("Hill model needs a 3-factor dose grid");
  return hill_fit(data.design.rows, data.responses, HillModel::with_grid(grid), config);
}

}  // namespace rsm

#include "rsm/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rsm/error.hpp"
#include "rsm/random.hpp"

namespace rsm {
namespace {

struct Vertex {
  Eigen::VectorXd x;
  double f;
};

double finite_or_inf(double v) { return std::isnan(v) ? std::numeric_limits<double>::infinity() : v; }

/// One Nelder-Mead descent from x0 with standard coefficients.
SimplexResult descend(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                      const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                      const SimplexOptions& opt, int budget) {
  const auto n = x0.size();
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return finite_or_inf(f(x));
  };
  auto project = [&](Eigen::VectorXd x) { return x.cwiseMax(lower).cwiseMin(upper).eval(); };

  std::vector<Vertex> simplex;
  simplex.push_back({x0, eval(x0)});
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd x = x0;
    const double step = opt.initial_step * (upper(i) - lower(i));
    // step away from the nearer bound so the vertex stays distinct after projection
    x(i) += (x0(i) + step <= upper(i)) ? step : -step;
    x = project(x);
    simplex.push_back({x, eval(x)});
  }

  bool converged = false;
  while (evals < budget) {
    std::sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    const double spread = std::abs(simplex.back().f - simplex.front().f);
    double diameter = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      diameter = std::max(diameter, (simplex[i].x - simplex[0].x).cwiseAbs().maxCoeff());
    }
    if (std::isfinite(simplex.front().f) && spread <= opt.tol * (1.0 + std::abs(simplex.front().f)) &&
        diameter <= std::sqrt(opt.tol)) {
      converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) centroid += simplex[static_cast<std::size_t>(i)].x;
    centroid /= static_cast<double>(n);

    Vertex& worst = simplex.back();
    const Vertex& second = simplex[simplex.size() - 2];
    const Eigen::VectorXd xr = project(centroid + (centroid - worst.x));
    const double fr = eval(xr);
    if (fr < simplex.front().f) {
      const Eigen::VectorXd xe = project(centroid + 2.0 * (centroid - worst.x));
      const double fe = eval(xe);
      worst = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
      continue;
    }
    if (fr < second.f) {
      worst = {xr, fr};
      continue;
    }
    const bool outside = fr < worst.f;
    const Eigen::VectorXd xc =
        outside ? project(centroid + 0.5 * (xr - centroid)) : project(centroid + 0.5 * (worst.x - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : worst.f)) {
      worst = {xc, fc};
      continue;
    }
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      simplex[i].x = project(simplex[0].x + 0.5 * (simplex[i].x - simplex[0].x));
      simplex[i].f = eval(simplex[i].x);
    }
  }
  const auto best = std::min_element(simplex.begin(), simplex.end(),
                                     [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  return {best->x, best->f, evals, converged};
}

}  // namespace

SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                          const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                          const SimplexOptions& options) {
  if (x0.size() != lower.size() || x0.size() != upper.size() || x0.size() == 0) {
    throw DomainError("nelder_mead: dimension mismatch");
  }
  if ((upper.array() < lower.array()).any()) throw DomainError("nelder_mead: empty box");
  x0 = x0.cwiseMax(lower).cwiseMin(upper);

  SimplexResult best = descend(f, x0, lower, upper, options, options.max_evals);
  for (int r = 0; r < options.max_restarts && best.evals < options.max_evals; ++r) {
    SimplexResult next = descend(f, best.x, lower, upper, options, options.max_evals - best.evals);
    const int evals = best.evals + next.evals;
    const bool improved = next.value < best.value - options.tol * (1.0 + std::abs(best.value));
    if (next.value <= best.value) {
      best = next;
    }
    best.evals = evals;
    if (!improved) break;
  }
  return best;
}

Eigen::MatrixXd latin_hypercube(int n, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                std::uint64_t seed) {
  if (n < 1) throw DomainError("latin_hypercube: need at least one point");
  Rng rng(seed);
  const auto d = lower.size();
  Eigen::MatrixXd out(n, d);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    for (int i = 0; i < n; ++i) {
      const double u = (perm[static_cast<std::size_t>(i)] + rng.uniform()) / n;
      out(i, j) = lower(j) + u * (upper(j) - lower(j));
    }
  }
  return out;
}

}  // namespace rsm

#include "rsm/polynomial.hpp"

#include "rsm/error.hpp"

namespace rsm {

Eigen::Matrix<double, 1, PolynomialModel::kTerms> quadratic_terms(std::span<const double> x) {
  if (x.size() != 3) throw DomainError("quadratic model needs 3 factors, got " + std::to_string(x.size()));
  const double a = x[0], b = x[1], c = x[2];
  Eigen::Matrix<double, 1, PolynomialModel::kTerms> t;
  t << 1.0, a, b, c, a * b, a * c, b * c, a * a, b * b, c * c;
  return t;
}

Eigen::MatrixXd quadratic_model_matrix(const Eigen::MatrixXd& points) {
  if (points.rows() > 0 && points.cols() != 3) {
    throw DomainError("quadratic model needs 3 factors, got " + std::to_string(points.cols()));
  }
  Eigen::MatrixXd m(points.rows(), static_cast<Eigen::Index>(PolynomialModel::kTerms));
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    const double x[3] = {points(r, 0), points(r, 1), points(r, 2)};
    m.row(r) = quadratic_terms(x);
  }
  return m;
}

double PolynomialModel::predict(std::span<const double> x) const {
  const auto t = quadratic_terms(x);
  double y = 0.0;
  for (std::size_t k = 0; k < kTerms; ++k) y += betas[k] * t(static_cast<Eigen::Index>(k));
  return y;
}

Eigen::VectorXd PolynomialModel::predict_batch(const Eigen::MatrixXd& points) const {
  const Eigen::Map<const Eigen::VectorXd> b(betas.data(), static_cast<Eigen::Index>(kTerms));
  return quadratic_model_matrix(points) * b;
}

PolynomialModel poly_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
  if (design.rows() != y.size()) throw DomainError("poly_fit: design and response lengths differ");
  if (design.rows() < static_cast<Eigen::Index>(PolynomialModel::kTerms)) {
    throw DomainError("poly_fit needs at least 10 runs, got " + std::to_string(design.rows()));
  }
  const Eigen::MatrixXd x = quadratic_model_matrix(design);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < x.cols()) {
    std::vector<std::string> dropped;
    std::string names;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < x.cols(); ++k) {
      dropped.emplace_back(PolynomialModel::kTermNames[static_cast<std::size_t>(perm(k))]);
      names += (names.empty() ? "" : ", ") + dropped.back();
    }
    throw SingularDesignError("quadratic model matrix has rank " + std::to_string(qr.rank()) +
                                  " < 10; collinear columns: " + names,
                              dropped);
  }
  const Eigen::VectorXd beta = qr.solve(y);
  PolynomialModel model;
  for (std::size_t k = 0; k < PolynomialModel::kTerms; ++k) model.betas[k] = beta(static_cast<Eigen::Index>(k));
  return model;
}

PolynomialModel poly_fit(const Dataset& data) {
  data.validate();
  return poly_fit(data.design.rows, data.responses);
}

}  // namespace rsm

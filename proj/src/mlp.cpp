#include "rsm/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "rsm/error.hpp"
#include "rsm/parallel.hpp"
#include "rsm/random.hpp"

namespace rsm {
namespace {

double sigmoid(double s) {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

void check_inputs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.cols() != MlpModel::kInputs) throw DomainError("network needs 3 inputs, got " + std::to_string(x.cols()));
  if (x.rows() != y.size()) throw DomainError("network: input and response lengths differ");
  if (x.rows() == 0) throw DomainError("network: empty training set");
}

}  // namespace

MlpModel::ParamVector MlpModel::to_vector() const {
  ParamVector v;
  v.head<(kInputs + 1) * kHidden>() = Eigen::Map<const Eigen::Matrix<double, (kInputs + 1) * kHidden, 1>>(hidden_weights.data());
  v.tail<kHidden + 1>() = output_weights;
  return v;
}

MlpModel MlpModel::from_vector(const ParamVector& v) {
  MlpModel m;
  Eigen::Map<Eigen::Matrix<double, (kInputs + 1) * kHidden, 1>>(m.hidden_weights.data()) = v.head<(kInputs + 1) * kHidden>();
  m.output_weights = v.tail<kHidden + 1>();
  return m;
}

double MlpModel::forward(std::span<const double> x) const {
  if (x.size() != kInputs) throw DomainError("network needs 3 inputs, got " + std::to_string(x.size()));
  double out = output_weights(0);
  for (int j = 0; j < kHidden; ++j) {
    double s = hidden_weights(0, j);
    for (int i = 0; i < kInputs; ++i) s += hidden_weights(i + 1, j) * x[static_cast<std::size_t>(i)];
    out += output_weights(j + 1) * sigmoid(s);
  }
  return out;
}

Eigen::VectorXd MlpModel::predict_batch(const Eigen::MatrixXd& points) const {
  if (points.rows() > 0 && points.cols() != kInputs) throw DomainError("network needs 3 inputs");
  Eigen::VectorXd out(points.rows());
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    const double x[3] = {points(r, 0), points(r, 1), points(r, 2)};
    out(r) = forward(x);
  }
  return out;
}

LossGradient mlp_loss_gradient(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  check_inputs(x, y);
  const auto n = x.rows();
  // pre-activations: n x kHidden
  Eigen::MatrixXd pre = x * model.hidden_weights.bottomRows<MlpModel::kInputs>();
  pre.rowwise() += model.hidden_weights.row(0);
  const Eigen::MatrixXd hidden = pre.unaryExpr([](double s) { return sigmoid(s); });
  Eigen::VectorXd out = hidden * model.output_weights.tail<MlpModel::kHidden>();
  out.array() += model.output_weights(0);
  const Eigen::VectorXd err = out - y;

  LossGradient lg;
  lg.loss = err.squaredNorm() / static_cast<double>(n);
  const Eigen::VectorXd d_out = (2.0 / static_cast<double>(n)) * err;

  MlpModel grad;
  grad.output_weights(0) = d_out.sum();
  grad.output_weights.tail<MlpModel::kHidden>() = hidden.transpose() * d_out;
  // back through the logistic units
  const Eigen::MatrixXd d_pre =
      ((d_out * model.output_weights.tail<MlpModel::kHidden>().transpose()).array() * hidden.array() *
       (1.0 - hidden.array()))
          .matrix();
  grad.hidden_weights.row(0) = d_pre.colwise().sum();
  grad.hidden_weights.bottomRows<MlpModel::kInputs>() = x.transpose() * d_pre;
  lg.gradient = grad.to_vector();
  return lg;
}

MlpTrainResult mlp_train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const MlpTrainConfig& config) {
  check_inputs(x, y);
  if (config.restarts < 1) throw DomainError("network: restarts must be at least 1");
  if (config.epochs < 0) throw DomainError("network: epochs must be non-negative");
  if (!(config.rprop_min_step > 0.0 && config.rprop_step >= config.rprop_min_step &&
        config.rprop_max_step >= config.rprop_step)) {
    throw DomainError("network: Rprop steps must satisfy 0 < min <= initial <= max");
  }

  struct Outcome {
    MlpModel model;
    double mse = std::numeric_limits<double>::infinity();
  };
  std::vector<Outcome> outcomes(static_cast<std::size_t>(config.restarts));
  parallel_for(outcomes.size(), config.threads, [&](std::size_t r) {
    Rng rng(derive_seed(config.seed, r));
    MlpModel::ParamVector w;
    for (auto& v : w) v = rng.uniform(-config.init_scale, config.init_scale);
    if (config.method == MlpTrainConfig::Method::Rprop) {
      MlpModel::ParamVector step = MlpModel::ParamVector::Constant(config.rprop_step);
      MlpModel::ParamVector previous = MlpModel::ParamVector::Zero();
      for (int epoch = 0; epoch < config.epochs; ++epoch) {
        auto lg = mlp_loss_gradient(MlpModel::from_vector(w), x, y);
        if (!std::isfinite(lg.loss) || !lg.gradient.allFinite()) return;
        for (int k = 0; k < MlpModel::kParams; ++k) {
          double& g = lg.gradient(k);
          const double agreement = g * previous(k);
          if (agreement > 0.0) {
            step(k) = std::min(step(k) * 1.2, config.rprop_max_step);
          } else if (agreement < 0.0) {
            step(k) = std::max(step(k) * 0.5, config.rprop_min_step);
            g = 0.0;  // sign flip: skip this weight once
          }
          if (g > 0.0) {
            w(k) -= step(k);
          } else if (g < 0.0) {
            w(k) += step(k);
          }
          previous(k) = g;
        }
      }
    } else {
      MlpModel::ParamVector velocity = MlpModel::ParamVector::Zero();
      double lr = config.learning_rate;
      for (int epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.decay_every > 0 && epoch > 0 && epoch % config.decay_every == 0) lr *= config.decay;
        const auto lg = mlp_loss_gradient(MlpModel::from_vector(w), x, y);
        if (!std::isfinite(lg.loss) || !lg.gradient.allFinite()) return;
        velocity = config.momentum * velocity - lr * lg.gradient;
        w += velocity;
      }
    }
    const MlpModel model = MlpModel::from_vector(w);
    const double mse = (model.predict_batch(x) - y).squaredNorm() / static_cast<double>(y.size());
    if (std::isfinite(mse)) outcomes[r] = {model, mse};
  });

  MlpTrainResult result;
  result.underdetermined = x.rows() < MlpModel::kParams;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    if (!std::isfinite(outcomes[r].mse)) {
      ++result.discarded;
      continue;
    }
    if (result.best_restart < 0 || outcomes[r].mse < result.training_mse) {
      result.best_restart = static_cast<int>(r);
      result.training_mse = outcomes[r].mse;
      result.model = outcomes[r].model;
    }
  }
  if (result.best_restart < 0) {
    throw FitFailedError("network training failed: every restart produced a non-finite loss",
                         {std::to_string(config.restarts) + " restarts discarded"});
  }
  return result;
}

MlpTrainResult mlp_train(const Dataset& data, const MlpTrainConfig& config) {
  data.validate();
  return mlp_train(data.design.rows, data.responses, config);
}

}  // namespace rsm

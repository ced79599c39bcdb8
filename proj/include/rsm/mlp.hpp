#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "rsm/dataset.hpp"

namespace rsm {

/// Three inputs, one hidden layer of four logistic units, linear output.
/// Both layers carry a bias node fixed at 1.
struct MlpModel {
  static constexpr int kInputs = 3;
  static constexpr int kHidden = 4;
  static constexpr int kParams = (kInputs + 1) * kHidden + kHidden + 1;  // 21

  /// hidden_weights(i, j): input i (0 = bias) into hidden unit j.
  Eigen::Matrix<double, kInputs + 1, kHidden> hidden_weights = decltype(hidden_weights)::Zero();
  /// output_weights(j): hidden unit j (0 = bias) into the output.
  Eigen::Matrix<double, kHidden + 1, 1> output_weights = decltype(output_weights)::Zero();

  using ParamVector = Eigen::Matrix<double, kParams, 1>;
  /// Hidden weights column by column, then output weights.
  ParamVector to_vector() const;
  static MlpModel from_vector(const ParamVector& v);

  /// Network output, not clamped.
  double forward(std::span<const double> x) const;
  Eigen::VectorXd predict_batch(const Eigen::MatrixXd& points) const;
};

inline double mlp_forward(const MlpModel& model, std::span<const double> x) { return model.forward(x); }

/// Mean squared error over the rows of `x` and its gradient by backpropagation.
struct LossGradient {
  double loss = 0.0;
  MlpModel::ParamVector gradient = MlpModel::ParamVector::Zero();
};
LossGradient mlp_loss_gradient(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

struct MlpTrainConfig {
  enum class Method {
    Rprop,     // sign-based steps with per-weight adaptive sizes (iRprop-)
    Momentum,  // heavy-ball gradient descent with stepwise decay
  };

  Method method = Method::Rprop;
  int restarts = 100;
  int epochs = 2000;
  /// Rprop: initial per-weight step and the step bounds.
  double rprop_step = 0.1;
  double rprop_min_step = 1e-9;
  double rprop_max_step = 50.0;
  /// Momentum only.
  double learning_rate = 0.5;
  double momentum = 0.9;
  /// The learning rate is multiplied by `decay` every `decay_every` epochs.
  double decay = 0.5;
  int decay_every = 2000;
  /// Initial weights are uniform on [-init_scale, init_scale].
  double init_scale = 1.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct MlpTrainResult {
  MlpModel model;
  double training_mse = 0.0;
  int best_restart = -1;
  /// Restarts dropped for a non-finite loss.
  int discarded = 0;
  /// Fewer runs than the 21 network parameters.
  bool underdetermined = false;
};

/// Full-batch gradient training from `restarts` seeded initializations; keeps
/// the restart with the lowest training MSE, ties to the lowest index. Throws FitFailedError if
/// every restart diverges.
MlpTrainResult mlp_train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const MlpTrainConfig& config = {});
MlpTrainResult mlp_train(const Dataset& data, const MlpTrainConfig& config = {});

}  // namespace rsm

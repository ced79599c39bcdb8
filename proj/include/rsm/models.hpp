#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "rsm/hill.hpp"
#include "rsm/kriging.hpp"
#include "rsm/mlp.hpp"
#include "rsm/polynomial.hpp"

namespace rsm {

/// The four compared model families, in report row order.
enum class ModelKind { Kriging, NeuralNetwork, Polynomial, HillBased };

inline constexpr ModelKind kAllModelKinds[] = {ModelKind::Kriging, ModelKind::NeuralNetwork, ModelKind::Polynomial,
                                               ModelKind::HillBased};

/// Short identifier used in files and on the command line: kriging, mlp, poly, hill.
std::string model_id(ModelKind kind);
/// Row label of the comparison table.
std::string model_label(ModelKind kind);
ModelKind parse_model_kind(const std::string& id);
/// Number of fitted parameters for three factors (5, 21, 10, 12).
int parameter_count(ModelKind kind, int dims = 3);

using AnyModel = std::variant<KrigingModel, MlpModel, PolynomialModel, HillModel>;

ModelKind kind_of(const AnyModel& model);
Eigen::VectorXd predict_batch(const AnyModel& model, const Eigen::MatrixXd& points);

/// Writes a self-describing `key value...` text document, floats in
/// shortest round-trip form.
void save_model(std::ostream& out, const AnyModel& model);
/// Reads a document written by save_model. Kriging models are refactorized.
AnyModel load_model(std::istream& in);
void save_model_file(const std::string& path, const AnyModel& model);
AnyModel load_model_file(const std::string& path);

}  // namespace rsm

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "rsm/csv.hpp"
#include "rsm/error.hpp"
#include "rsm/models.hpp"

namespace rsm {
namespace {

void put(std::ostream& out, const std::string& key, const std::vector<double>& values) {
  out << key;
  for (double v : values) out << ' ' << format_double(v);
  out << '\n';
}

void put(std::ostream& out, const std::string& key, double value) { put(out, key, std::vector<double>{value}); }

template <typename Derived>
std::vector<double> values_of(const Eigen::DenseBase<Derived>& m) {
  std::vector<double> v;
  for (Eigen::Index i = 0; i < m.size(); ++i) v.push_back(m(i));
  return v;
}

/// Parsed document: scalar keys once, repeated keys (x, y) in order.
struct Document {
  std::map<std::string, std::vector<std::string>> fields;
  std::vector<std::vector<double>> design_rows;
  std::vector<double> responses;

  const std::vector<std::string>& field(const std::string& key) const {
    const auto it = fields.find(key);
    if (it == fields.end()) throw IngestionError("model document lacks '" + key + "'");
    return it->second;
  }
  std::string word(const std::string& key) const {
    const auto& f = field(key);
    if (f.size() != 1) throw IngestionError("model document: '" + key + "' expects one value");
    return f.front();
  }
  std::vector<double> numbers(const std::string& key, std::size_t expected) const {
    const auto& f = field(key);
    if (f.size() != expected) {
      throw IngestionError("model document: '" + key + "' expects " + std::to_string(expected) + " values");
    }
    std::vector<double> out;
    for (const auto& s : f) out.push_back(parse_double(s));
    return out;
  }
  double number(const std::string& key) const { return numbers(key, 1).front(); }
};

Document parse(std::istream& in) {
  Document doc;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream words{std::string(t)};
    std::string key;
    words >> key;
    std::vector<std::string> rest;
    for (std::string w; words >> w;) rest.push_back(w);
    try {
      if (key == "x") {
        std::vector<double> row;
        for (const auto& w : rest) row.push_back(parse_double(w));
        doc.design_rows.push_back(std::move(row));
      } else if (key == "y") {
        if (rest.size() != 1) throw DomainError("'y' expects one value");
        doc.responses.push_back(parse_double(rest.front()));
      } else if (!doc.fields.emplace(key, rest).second) {
        throw DomainError("duplicate key '" + key + "'");
      }
    } catch (const DomainError& e) {
      throw IngestionError("model document line " + std::to_string(lineno) + ": " + e.what(), lineno);
    }
  }
  return doc;
}

void save_kriging(std::ostream& out, const KrigingModel& m) {
  out << "kind kriging\n";
  out << "kernel " << (m.kernel().family == KernelSpec::Family::Gaussian ? "gauss" : "matern") << '\n';
  out << "p " << m.kernel().p << '\n';
  out << "dims " << m.dims() << '\n';
  put(out, "thetas", m.thetas());
  put(out, "sigma2", m.sigma2());
  put(out, "tau2", m.tau2());
  put(out, "mu_hat", m.mu_hat());
  out << "runs " << m.design().rows() << '\n';
  for (Eigen::Index r = 0; r < m.design().rows(); ++r) put(out, "x", values_of(m.design().row(r)));
  for (Eigen::Index r = 0; r < m.responses().size(); ++r) put(out, "y", m.responses()(r));
}

KrigingModel load_kriging(const Document& doc) {
  const auto family = doc.word("kernel");
  const int p = static_cast<int>(parse_long(doc.word("p")));
  KernelSpec kernel;
  if (family == "gauss") {
    kernel = KernelSpec::gaussian();
  } else if (family == "matern") {
    kernel = KernelSpec::matern(p);
  } else {
    throw IngestionError("model document: unknown kernel family '" + family + "'");
  }
  const auto dims = static_cast<std::size_t>(parse_long(doc.word("dims")));
  const auto runs = static_cast<std::size_t>(parse_long(doc.word("runs")));
  if (doc.design_rows.size() != runs || doc.responses.size() != runs) {
    throw IngestionError("model document: expected " + std::to_string(runs) + " x and y lines");
  }
  Eigen::MatrixXd design(static_cast<Eigen::Index>(runs), static_cast<Eigen::Index>(dims));
  for (std::size_t r = 0; r < runs; ++r) {
    if (doc.design_rows[r].size() != dims) throw IngestionError("model document: design row of wrong width");
    for (std::size_t c = 0; c < dims; ++c) {
      design(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = doc.design_rows[r][c];
    }
  }
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(doc.responses.data(), static_cast<Eigen::Index>(runs));
  return KrigingModel(kernel, doc.numbers("thetas", dims), doc.number("sigma2"), doc.number("tau2"), design, y);
}

void save_mlp(std::ostream& out, const MlpModel& m) {
  out << "kind mlp\n";
  // rows: input i (0 = bias), columns: hidden unit
  for (int i = 0; i <= MlpModel::kInputs; ++i) put(out, "hidden_" + std::to_string(i), values_of(m.hidden_weights.row(i)));
  put(out, "output", values_of(m.output_weights));
}

MlpModel load_mlp(const Document& doc) {
  MlpModel m;
  for (int i = 0; i <= MlpModel::kInputs; ++i) {
    const auto row = doc.numbers("hidden_" + std::to_string(i), MlpModel::kHidden);
    for (int j = 0; j < MlpModel::kHidden; ++j) m.hidden_weights(i, j) = row[static_cast<std::size_t>(j)];
  }
  const auto out = doc.numbers("output", MlpModel::kHidden + 1);
  for (int j = 0; j <= MlpModel::kHidden; ++j) m.output_weights(j) = out[static_cast<std::size_t>(j)];
  return m;
}

void save_poly(std::ostream& out, const PolynomialModel& m) {
  out << "kind poly\n";
  out << "terms";
  for (const char* name : PolynomialModel::kTermNames) out << ' ' << name;
  out << '\n';
  put(out, "betas", std::vector<double>(m.betas.begin(), m.betas.end()));
}

PolynomialModel load_poly(const Document& doc) {
  PolynomialModel m;
  const auto b = doc.numbers("betas", PolynomialModel::kTerms);
  std::copy(b.begin(), b.end(), m.betas.begin());
  return m;
}

void save_hill(std::ostream& out, const HillModel& m) {
  out << "kind hill\n";
  put(out, "a", std::vector<double>(m.a.begin(), m.a.end()));
  put(out, "b", std::vector<double>(m.b.begin(), m.b.end()));
  put(out, "dose_min", m.dose_min);
  put(out, "dose_max", m.dose_max);
}

HillModel load_hill(const Document& doc) {
  HillModel m;
  const auto a = doc.numbers("a", HillModel::kCoefs);
  const auto b = doc.numbers("b", HillModel::kCoefs);
  std::copy(a.begin(), a.end(), m.a.begin());
  std::copy(b.begin(), b.end(), m.b.begin());
  m.dose_min = doc.numbers("dose_min", 3);
  m.dose_max = doc.numbers("dose_max", 3);
  return m;
}

}  // namespace

std::string model_id(ModelKind kind) {
  switch (kind) {
    case ModelKind::Kriging: return "kriging";
    case ModelKind::NeuralNetwork: return "mlp";
    case ModelKind::Polynomial: return "poly";
    case ModelKind::HillBased: return "hill";
  }
  return "unknown";
}

std::string model_label(ModelKind kind) {
  switch (kind) {
    case ModelKind::Kriging: return "Kriging";
    case ModelKind::NeuralNetwork: return "Neural network";
    case ModelKind::Polynomial: return "Polynomial";
    case ModelKind::HillBased: return "Hill-based";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& id) {
  for (ModelKind k : kAllModelKinds) {
    if (model_id(k) == id) return k;
  }
  throw ConfigError("unknown model '" + id + "' (expected kriging, mlp, poly or hill)");
}

int parameter_count(ModelKind kind, int dims) {
  switch (kind) {
    case ModelKind::Kriging: return dims + 2;
    case ModelKind::NeuralNetwork: return MlpModel::kParams;
    case ModelKind::Polynomial: return static_cast<int>(PolynomialModel::kTerms);
    case ModelKind::HillBased: return 2 * static_cast<int>(HillModel::kCoefs);
  }
  return 0;
}

ModelKind kind_of(const AnyModel& model) {
  switch (model.index()) {
    case 0: return ModelKind::Kriging;
    case 1: return ModelKind::NeuralNetwork;
    case 2: return ModelKind::Polynomial;
    default: return ModelKind::HillBased;
  }
}

Eigen::VectorXd predict_batch(const AnyModel& model, const Eigen::MatrixXd& points) {
  return std::visit(
      [&](const auto& m) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KrigingModel>) {
          return m.predict_mean(points);
        } else {
          return m.predict_batch(points);
        }
      },
      model);
}

void save_model(std::ostream& out, const AnyModel& model) {
  out << "# rsm model document\n";
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KrigingModel>) save_kriging(out, m);
        if constexpr (std::is_same_v<T, MlpModel>) save_mlp(out, m);
        if constexpr (std::is_same_v<T, PolynomialModel>) save_poly(out, m);
        if constexpr (std::is_same_v<T, HillModel>) save_hill(out, m);
      },
      model);
}

AnyModel load_model(std::istream& in) {
  const Document doc = parse(in);
  const auto kind = doc.word("kind");
  try {
    if (kind == "kriging") return load_kriging(doc);
    if (kind == "mlp") return load_mlp(doc);
    if (kind == "poly") return load_poly(doc);
    if (kind == "hill") return load_hill(doc);
  } catch (const DomainError& e) {
    throw IngestionError(std::string("model document: ") + e.what());
  }
  throw IngestionError("model document: unknown kind '" + kind + "'");
}

void save_model_file(const std::string& path, const AnyModel& model) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  save_model(out, model);
}

AnyModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path + "'");
  return load_model(in);
}

}  // namespace rsm

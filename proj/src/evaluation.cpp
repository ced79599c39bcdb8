#include "rsm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "rsm/csv.hpp"
#include "rsm/error.hpp"
#include "rsm/parallel.hpp"
#include "rsm/random.hpp"

namespace rsm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

}  // namespace

double mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& obs) {
  if (pred.size() != obs.size()) throw DomainError("mse: length mismatch");
  if (pred.size() == 0) throw DomainError("mse: empty input");
  return (pred - obs).squaredNorm() / static_cast<double>(pred.size());
}

double pearson(const Eigen::VectorXd& pred, const Eigen::VectorXd& obs) {
  if (pred.size() != obs.size()) throw DomainError("pearson: length mismatch");
  if (pred.size() < 2) throw DomainError("pearson: need at least 2 values");
  const Eigen::ArrayXd a = pred.array() - pred.mean();
  const Eigen::ArrayXd b = obs.array() - obs.mean();
  const double saa = a.square().sum();
  const double sbb = b.square().sum();
  if (saa == 0.0 || sbb == 0.0) {
    throw UndefinedCorrelationError(std::string("pearson: ") + (saa == 0.0 ? "predictions" : "observations") +
                                    " are constant");
  }
  const double r = (a * b).sum() / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

std::string format_cell(double mse_value, double r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f(%.2f%%)", 1000.0 * mse_value, 100.0 * r);
  return buf;
}

DesignFamily DesignFamily::full() { return {}; }

DesignFamily DesignFamily::random(std::size_t n, int replicates) {
  if (n == 0) throw ConfigError("random design family needs n > 0");
  if (replicates < 1) throw ConfigError("random design family needs at least one replicate");
  DesignFamily f;
  f.kind = Kind::Random;
  f.name = "RD" + std::to_string(n);
  f.n = n;
  f.replicates = replicates;
  return f;
}

DesignFamily DesignFamily::levels(std::vector<int> codes) {
  if (codes.empty()) throw ConfigError("level design family needs codes");
  DesignFamily f;
  f.kind = Kind::Levels;
  f.name = "D";
  for (int c : codes) {
    if (c < 0 || c > 9) throw ConfigError("level codes must be single digits");
    f.name += std::to_string(c);
  }
  f.codes = std::move(codes);
  return f;
}

DesignFamily DesignFamily::parse(const std::string& spec, int default_replicates) {
  std::string s;
  for (char c : spec) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  try {
    if (s == "full" || s == "d_full" || s == "dfull") return full();
    if (s.starts_with("rd")) {
      const auto x = s.find('x');
      const auto n = static_cast<std::size_t>(parse_long(s.substr(2, x == std::string::npos ? x : x - 2)));
      const int reps = x == std::string::npos ? default_replicates : static_cast<int>(parse_long(s.substr(x + 1)));
      return random(n, reps);
    }
    if (s.size() > 1 && s.front() == 'd') {
      std::vector<int> codes;
      for (char c : s.substr(1)) {
        if (c < '0' || c > '9') throw ConfigError("bad level code");
        codes.push_back(c - '0');
      }
      return levels(std::move(codes));
    }
  } catch (const DomainError&) {
  } catch (const ConfigError&) {
  }
  throw ConfigError("unknown design family '" + spec + "' (expected full, rd<n>[x<reps>] or d<codes>)");
}

std::string DesignFamily::spec() const {
  switch (kind) {
    case Kind::Full: return "full";
    case Kind::Random: return "rd" + std::to_string(n) + "x" + std::to_string(replicates);
    case Kind::Levels: return name == "D" ? "d" : "d" + name.substr(1);
  }
  return "";
}

std::size_t DesignFamily::runs(const DoseGrid& grid) const {
  switch (kind) {
    case Kind::Full: return grid.grid_size();
    case Kind::Random: return n;
    case Kind::Levels: {
      std::size_t r = 1;
      for (std::size_t f = 0; f < grid.factors(); ++f) r *= codes.size();
      return r;
    }
  }
  return 0;
}

Design DesignFamily::realize(const DoseGrid& grid, const Design& full_design, std::uint64_t seed) const {
  switch (kind) {
    case Kind::Full: return full_design;
    case Kind::Random: return random_subdesign(full_design, n, seed);
    case Kind::Levels: return level_subset_factorial(grid, codes);
  }
  return full_design;
}

FitOutcome fit_model(ModelKind kind, const Dataset& train, const DoseGrid& grid, const ModelSettings& settings,
                     std::uint64_t seed) {
  FitOutcome out;
  try {
    switch (kind) {
      case ModelKind::Kriging: {
        FitConfig cfg = settings.kriging;
        cfg.seed = seed;
        out.model = fit_kriging(train, settings.kernel, cfg);
        break;
      }
      case ModelKind::NeuralNetwork: {
        MlpTrainConfig cfg = settings.mlp;
        cfg.seed = seed;
        out.model = mlp_train(train, cfg).model;
        break;
      }
      case ModelKind::Polynomial:
        out.model = poly_fit(train);
        break;
      case ModelKind::HillBased: {
        HillFitConfig cfg = settings.hill;
        cfg.seed = seed;
        auto res = hill_fit(train, grid, cfg);
        if (res.ok()) {
          out.model = std::move(*res.model);
        } else {
          out.failure = "hill fit " + to_string(res.failure);
        }
        break;
      }
    }
  } catch (const FitFailedError& e) {
    out.failure = e.what();
  } catch (const IllConditionedError& e) {
    out.failure = e.what();
  } catch (const SingularDesignError& e) {
    out.failure = e.what();
  }
  return out;
}

void CellReport::aggregate() {
  double sum_mse = 0.0, sum_r = 0.0;
  int ok = 0;
  failures = 0;
  for (const auto& rep : replicates) {
    if (rep.failed) {
      ++failures;
      continue;
    }
    sum_mse += rep.mse;
    sum_r += rep.r;
    ++ok;
  }
  mean_mse = ok ? sum_mse / ok : kNaN;
  mean_r = ok ? sum_r / ok : kNaN;
}

const CellReport& EvalReport::cell(ModelKind model, const std::string& design) const {
  for (const auto& c : cells) {
    if (c.model == model && c.design == design) return c;
  }
  throw DomainError("no report cell for " + model_label(model) + " x " + design);
}

std::string EvalReport::comparison_table() const {
  std::size_t label_width = 0;
  for (ModelKind m : models) label_width = std::max(label_width, model_label(m).size());
  label_width += 2;
  constexpr std::size_t kCellWidth = 18;

  std::ostringstream out;
  out << pad("", label_width);
  for (const auto& d : designs) out << pad(d, kCellWidth);
  out << '\n';
  std::vector<std::string> notes;
  for (ModelKind m : models) {
    out << pad(model_label(m), label_width);
    for (const auto& d : designs) {
      const auto& c = cell(m, d);
      const std::string text = c.failures == c.replicate_count() ? "failed" : format_cell(c.mean_mse, c.mean_r);
      out << pad(text + (c.failures > 0 ? "*" : ""), kCellWidth);
      if (c.failures > 0) {
        notes.push_back("* " + model_label(m) + ", " + d + ": " + std::to_string(c.failures) + "/" +
                        std::to_string(c.replicate_count()) + " excluded");
      }
    }
    out << '\n';
  }
  out << "Cells: 1000 x MSE (r) over the full grid.\n";
  for (const auto& n : notes) out << n << '\n';
  std::string s = out.str();
  // strip trailing blanks from each line
  std::string clean;
  std::istringstream lines(s);
  for (std::string line; std::getline(lines, line);) {
    line.erase(line.find_last_not_of(' ') + 1);
    clean += line + '\n';
  }
  return clean;
}

void EvalReport::write_csv(std::ostream& out) const {
  write_csv_row(out, {"model", "design", "replicate", "mse", "r", "failed"});
  for (const auto& c : cells) {
    for (const auto& rep : c.replicates) {
      write_csv_row(out, {model_id(c.model), c.design, std::to_string(rep.replicate),
                          rep.failed ? "nan" : format_double(rep.mse), rep.failed ? "nan" : format_double(rep.r),
                          rep.failed ? "1" : "0"});
    }
  }
}

EvalReport EvalReport::read_csv(std::istream& in) {
  const auto table = rsm::read_csv(in);
  const std::vector<std::string> expected{"model", "design", "replicate", "mse", "r", "failed"};
  if (table.header != expected) throw IngestionError("report CSV must have columns model,design,replicate,mse,r,failed");
  EvalReport report;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    ModelKind kind;
    ReplicateResult rep;
    try {
      kind = parse_model_kind(row[0]);
      rep.replicate = static_cast<int>(parse_long(row[2]));
      rep.failed = parse_long(row[5]) != 0;
      rep.mse = parse_double(row[3]);
      rep.r = parse_double(row[4]);
    } catch (const Error& e) {
      throw IngestionError("report row " + std::to_string(i + 1) + ": " + e.what(), i + 1);
    }
    if (std::find(report.models.begin(), report.models.end(), kind) == report.models.end()) report.models.push_back(kind);
    if (std::find(report.designs.begin(), report.designs.end(), row[1]) == report.designs.end()) {
      report.designs.push_back(row[1]);
    }
    auto it = std::find_if(report.cells.begin(), report.cells.end(),
                           [&](const CellReport& c) { return c.model == kind && c.design == row[1]; });
    if (it == report.cells.end()) {
      report.cells.push_back({kind, row[1], {}, 0.0, 0.0, 0});
      it = report.cells.end() - 1;
    }
    it->replicates.push_back(rep);
  }
  for (auto& c : report.cells) c.aggregate();
  return report;
}

std::uint64_t replicate_seed(std::uint64_t master, const DesignFamily& family, int replicate) {
  return derive_seed(master ^ fnv1a(family.name), static_cast<std::uint64_t>(replicate));
}

std::uint64_t fit_seed(std::uint64_t replicate_seed, ModelKind kind) {
  return derive_seed(replicate_seed, static_cast<std::uint64_t>(kind) + 1);
}

CellReport run_cell(const Dataset& full, const DoseGrid& grid, const DesignFamily& family, ModelKind kind,
                    const ModelSettings& settings, std::uint64_t master_seed, unsigned threads) {
  if (static_cast<std::size_t>(full.size()) != grid.grid_size()) {
    throw ConfigError("the full dataset must cover all " + std::to_string(grid.grid_size()) + " grid points, it has " +
                      std::to_string(full.size()));
  }
  const std::size_t runs = family.runs(grid);
  const int needed = parameter_count(kind, static_cast<int>(grid.factors()));
  if (runs > grid.grid_size()) {
    throw ConfigError(family.name + " asks for " + std::to_string(runs) + " runs but the grid has " +
                      std::to_string(grid.grid_size()));
  }
  if (kind != ModelKind::NeuralNetwork && runs < static_cast<std::size_t>(needed)) {
    throw ConfigError(model_label(kind) + " has " + std::to_string(needed) + " parameters but " + family.name +
                      " has only " + std::to_string(runs) + " runs");
  }
  if (kind == ModelKind::Kriging && runs < 2) throw ConfigError("Kriging needs at least 2 runs");

  CellReport cell;
  cell.model = kind;
  cell.design = family.name;
  cell.replicates.resize(static_cast<std::size_t>(family.replicate_count()));
  parallel_for(cell.replicates.size(), threads, [&](std::size_t i) {
    auto& rep = cell.replicates[i];
    rep.replicate = static_cast<int>(i);
    rep.seed = replicate_seed(master_seed, family, rep.replicate);
    const Design design = family.realize(grid, full.design, rep.seed);
    const Dataset train = full.subset(design);
    const auto outcome = fit_model(kind, train, grid, settings, fit_seed(rep.seed, kind));
    auto fail = [&](std::string why) {
      rep.failed = true;
      rep.mse = kNaN;
      rep.r = kNaN;
      rep.reason = std::move(why);
    };
    if (!outcome.model) return fail(outcome.failure);
    try {
      const Eigen::VectorXd pred = predict_batch(*outcome.model, full.design.rows);
      if (!pred.allFinite()) return fail("non-finite prediction");
      rep.mse = mse(pred, full.responses);
      rep.r = pearson(pred, full.responses);
    } catch (const EvaluationError& e) {
      fail(e.what());
    } catch (const UndefinedCorrelationError& e) {
      fail(e.what());
    }
  });
  cell.aggregate();
  return cell;
}

EvalReport run_comparison(const Dataset& full, const DoseGrid& grid, const std::vector<DesignFamily>& families,
                          const std::vector<ModelKind>& models, const ModelSettings& settings,
                          std::uint64_t master_seed, unsigned threads) {
  full.validate();
  for (std::size_t i = 0; i < families.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (families[i].name == families[j].name) throw ConfigError("design family " + families[i].name + " listed twice");
    }
  }
  // configuration checks for every pair before the first fit
  for (ModelKind m : models) {
    for (const auto& f : families) {
      const auto runs = f.runs(grid);
      if (runs > grid.grid_size()) throw ConfigError(f.name + " has more runs than the grid");
      if (m != ModelKind::NeuralNetwork && runs < static_cast<std::size_t>(parameter_count(m))) {
        throw ConfigError(model_label(m) + " cannot be fitted on " + f.name + " (" + std::to_string(runs) + " runs)");
      }
    }
  }
  EvalReport report;
  report.models = models;
  for (const auto& f : families) report.designs.push_back(f.name);
  for (ModelKind m : models) {
    for (const auto& f : families) report.cells.push_back(run_cell(full, grid, f, m, settings, master_seed, threads));
  }
  return report;
}

void ScatterData::write_csv(std::ostream& out) const {
  write_csv_row(out, {"observed", "predicted"});
  for (Eigen::Index i = 0; i < observed.size(); ++i) {
    write_csv_row(out, {format_double(observed(i)), format_double(predicted(i))});
  }
}

ScatterData ScatterData::read_csv(std::istream& in) {
  const auto table = rsm::read_csv(in);
  if (table.column("observed") != 0 || table.column("predicted") != 1 || table.header.size() != 2) {
    throw IngestionError("scatter CSV must have columns observed,predicted");
  }
  ScatterData s;
  s.observed.resize(static_cast<Eigen::Index>(table.rows.size()));
  s.predicted.resize(s.observed.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    s.observed(static_cast<Eigen::Index>(i)) = parse_double(table.rows[i][0]);
    s.predicted(static_cast<Eigen::Index>(i)) = parse_double(table.rows[i][1]);
  }
  return s;
}

ScatterData scatter_data(const AnyModel& model, const Dataset& full) {
  return {full.responses, predict_batch(model, full.design.rows)};
}

void ContourGrid::write_csv(std::ostream& out) const {
  std::vector<std::string> cells{factor_letter(row_factor) + "\\" + factor_letter(col_factor)};
  for (double a : axis) cells.push_back(format_double(a));
  write_csv_row(out, cells);
  for (std::size_t i = 0; i < axis.size(); ++i) {
    cells.assign(1, format_double(axis[i]));
    for (std::size_t j = 0; j < axis.size(); ++j) {
      cells.push_back(format_double(values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    }
    write_csv_row(out, cells);
  }
}

ContourGrid ContourGrid::read_csv(std::istream& in) {
  const auto table = rsm::read_csv(in);
  const auto& corner = table.header.front();
  const auto slash = corner.find('\\');
  if (slash == std::string::npos || corner.size() != 3) throw IngestionError("contour CSV: bad corner cell '" + corner + "'");
  ContourGrid g;
  g.row_factor = static_cast<std::size_t>(corner[0] - 'A');
  g.col_factor = static_cast<std::size_t>(corner[2] - 'A');
  g.fixed_factor = 3 - g.row_factor - g.col_factor;
  for (std::size_t j = 1; j < table.header.size(); ++j) g.axis.push_back(parse_double(table.header[j]));
  const auto n = static_cast<Eigen::Index>(g.axis.size());
  if (static_cast<Eigen::Index>(table.rows.size()) != n) throw IngestionError("contour CSV: grid is not square");
  g.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      g.values(i, j) = parse_double(table.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j + 1)]);
    }
  }
  return g;
}

ContourGrid contour_grid(const AnyModel& model, std::size_t fixed_factor, double fixed_value, int resolution) {
  if (fixed_factor > 2) throw DomainError("contour: fixed factor must be 0, 1 or 2");
  if (!(fixed_value >= 0.0 && fixed_value <= 1.0)) throw DomainError("contour: fixed value must be in [0, 1]");
  if (resolution < 2) throw DomainError("contour: resolution must be at least 2");
  ContourGrid g;
  g.fixed_factor = fixed_factor;
  g.fixed_value = fixed_value;
  g.row_factor = fixed_factor == 0 ? 1 : 0;
  g.col_factor = fixed_factor == 2 ? 1 : 2;
  for (int i = 0; i < resolution; ++i) g.axis.push_back(static_cast<double>(i) / (resolution - 1));
  const auto n = static_cast<Eigen::Index>(resolution);
  Eigen::MatrixXd points(n * n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      auto row = points.row(i * n + j);
      row(static_cast<Eigen::Index>(fixed_factor)) = fixed_value;
      row(static_cast<Eigen::Index>(g.row_factor)) = g.axis[static_cast<std::size_t>(i)];
      row(static_cast<Eigen::Index>(g.col_factor)) = g.axis[static_cast<std::size_t>(j)];
    }
  }
  const Eigen::VectorXd pred = predict_batch(model, points);
  g.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) g.values(i, j) = pred(i * n + j);
  }
  return g;
}

}  // namespace rsm

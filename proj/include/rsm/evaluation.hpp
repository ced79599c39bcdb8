#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsm/dataset.hpp"
#include "rsm/designs.hpp"
#include "rsm/models.hpp"

namespace rsm {

/// Mean of squared differences. Throws DomainError on length mismatch or empty input.
double mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& obs);

/// Sample Pearson correlation. Throws UndefinedCorrelationError when either
/// vector is constant, DomainError on length mismatch or fewer than 2 values.
double pearson(const Eigen::VectorXd& pred, const Eigen::VectorXd& obs);

/// `<1000 MSE>(<100 r>%)`, both to two decimals, e.g. "0.97(99.56%)".
std::string format_cell(double mse, double r);

/// A family of designs to evaluate: the full grid, a level-subset factorial
/// or random sub-designs drawn afresh for every replicate.
struct DesignFamily {
  enum class Kind { Full, Random, Levels };

  Kind kind = Kind::Full;
  std::string name = "D_full";
  std::size_t n = 0;       // Random
  int replicates = 1;      // Random; fixed designs always use 1
  std::vector<int> codes;  // Levels

  static DesignFamily full();
  /// Named RD<n>.
  static DesignFamily random(std::size_t n, int replicates);
  /// Named D<codes>, e.g. D047.
  static DesignFamily levels(std::vector<int> codes);
  /// "full", "rd<n>" (replicates from `default_replicates`), "rd<n>x<reps>" or "d<codes>".
  static DesignFamily parse(const std::string& spec, int default_replicates = 100);
  std::string spec() const;

  int replicate_count() const noexcept { return kind == Kind::Random ? replicates : 1; }
  std::size_t runs(const DoseGrid& grid) const;
  /// The design of replicate `seed` (ignored for fixed families).
  Design realize(const DoseGrid& grid, const Design& full, std::uint64_t seed) const;
};

struct ModelSettings {
  KernelSpec kernel = KernelSpec::matern52();
  FitConfig kriging;
  MlpTrainConfig mlp;
  HillFitConfig hill;
};

/// A fitted model, or the reason fitting failed numerically.
struct FitOutcome {
  std::optional<AnyModel> model;
  std::string failure;
};

/// Fits one model kind. Numerical failures are returned, not thrown; domain
/// and configuration errors still throw.
FitOutcome fit_model(ModelKind kind, const Dataset& train, const DoseGrid& grid, const ModelSettings& settings,
                     std::uint64_t seed);

struct ReplicateResult {
  int replicate = 0;
  std::uint64_t seed = 0;
  double mse = 0.0;
  double r = 0.0;
  bool failed = false;
  std::string reason;
};

struct CellReport {
  ModelKind model = ModelKind::Kriging;
  std::string design;
  std::vector<ReplicateResult> replicates;
  /// Means over replicates that did not fail (NaN if all failed).
  double mean_mse = 0.0;
  double mean_r = 0.0;
  int failures = 0;

  int replicate_count() const noexcept { return static_cast<int>(replicates.size()); }
  double display_mse() const noexcept { return 1000.0 * mean_mse; }
  /// Recomputes the means and failure count from `replicates`.
  void aggregate();
};

struct EvalReport {
  std::vector<ModelKind> models;
  std::vector<std::string> designs;
  std::vector<CellReport> cells;  // model-major, in the order of `models` x `designs`

  const CellReport& cell(ModelKind model, const std::string& design) const;

  /// Rows = models, columns = designs, cells as format_cell, followed by one
  /// footnote per cell with excluded replicates ("35/100 excluded").
  std::string comparison_table() const;
  /// `model,design,replicate,mse,r,failed`, one line per replicate.
  void write_csv(std::ostream& out) const;
  static EvalReport read_csv(std::istream& in);
};

/// Seed of replicate `replicate` of `family` under `master`. Shared by all
/// model kinds so that every model sees the same random designs.
std::uint64_t replicate_seed(std::uint64_t master, const DesignFamily& family, int replicate);

/// Seed handed to the fit of `kind` on the replicate seeded `replicate_seed`.
std::uint64_t fit_seed(std::uint64_t replicate_seed, ModelKind kind);

/// Fits `kind` on every replicate design of `family`, predicts the whole
/// grid and scores against all observations of `full`. Failed fits are
/// recorded and excluded from the means. Throws ConfigError if the design has
/// fewer runs than the model has parameters.
CellReport run_cell(const Dataset& full, const DoseGrid& grid, const DesignFamily& family, ModelKind kind,
                    const ModelSettings& settings, std::uint64_t master_seed, unsigned threads = 1);

/// run_cell over every model x family pair. Every pair is checked before any fit.
EvalReport run_comparison(const Dataset& full, const DoseGrid& grid, const std::vector<DesignFamily>& families,
                          const std::vector<ModelKind>& models, const ModelSettings& settings,
                          std::uint64_t master_seed, unsigned threads = 1);

/// Observed and predicted responses over the full grid, in grid order.
struct ScatterData {
  Eigen::VectorXd observed;
  Eigen::VectorXd predicted;

  /// `observed,predicted`.
  void write_csv(std::ostream& out) const;
  static ScatterData read_csv(std::istream& in);
};

ScatterData scatter_data(const AnyModel& model, const Dataset& full);

/// Predictions over a g x g grid of the two free factors with one factor pinned.
struct ContourGrid {
  std::size_t fixed_factor = 2;
  double fixed_value = 0.0;
  std::size_t row_factor = 0;  // varies down the rows
  std::size_t col_factor = 1;  // varies across the columns
  std::vector<double> axis;    // standardized coordinates shared by both free factors
  Eigen::MatrixXd values;      // values(i, j): row_factor = axis[i], col_factor = axis[j]

  /// Header `<row>\<col>,<axis values...>`; each line starts with its row coordinate.
  void write_csv(std::ostream& out) const;
  static ContourGrid read_csv(std::istream& in);
};

ContourGrid contour_grid(const AnyModel& model, std::size_t fixed_factor, double fixed_value, int resolution);

}  // namespace rsm

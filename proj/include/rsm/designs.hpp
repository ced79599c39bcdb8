#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rsm {

/// Actual dose levels per factor, in ascending order. Level index = coded level.
class DoseGrid {
 public:
  DoseGrid(std::vector<std::string> factor_names, std::vector<std::vector<double>> levels);

  /// AG490, U0126 and I-3-M dosages (uM) of the lung-cancer combination experiment.
  static DoseGrid lung_cancer();
  /// Reads `factor,level0,level1,...` rows.
  static DoseGrid from_csv(std::istream& in);
  static DoseGrid from_csv_file(const std::string& path);
  void write_csv(std::ostream& out) const;

  std::size_t factors() const noexcept { return names_.size(); }
  std::size_t level_count(std::size_t factor) const { return levels_.at(factor).size(); }
  const std::vector<std::string>& factor_names() const noexcept { return names_; }
  const std::vector<double>& levels(std::size_t factor) const { return levels_.at(factor); }
  std::size_t grid_size() const noexcept;

  double min_dose(std::size_t factor) const { return levels_.at(factor).front(); }
  double max_dose(std::size_t factor) const { return levels_.at(factor).back(); }

  /// Per-factor (dose - min) / (max - min) of the coded levels.
  Eigen::VectorXd standardize(const std::vector<int>& coded_point) const;
  /// Inverse map of standardized coordinates to actual doses.
  Eigen::VectorXd actual_doses(const Eigen::Ref<const Eigen::VectorXd>& standardized) const;
  /// Coded level whose actual dose equals `dose` (relative tolerance 1e-9), or -1.
  int code_of_dose(std::size_t factor, double dose) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> levels_;
};

struct Provenance {
  enum class Kind { FullFactorial, RandomSubset, LevelSubsetFactorial };
  Kind kind = Kind::FullFactorial;
  std::uint64_t seed = 0;          // RandomSubset
  std::size_t n = 0;               // RandomSubset
  std::vector<int> codes;          // LevelSubsetFactorial

  std::string describe() const;
};

/// Runs x factors in standardized [0,1] coordinates, with their coded levels.
struct Design {
  Eigen::MatrixXd rows;
  Eigen::MatrixXi coded_rows;
  Provenance provenance;

  Eigen::Index runs() const noexcept { return rows.rows(); }
  Eigen::Index dims() const noexcept { return rows.cols(); }

  /// `codeA,codeB,...,A,B,...` (one letter per factor).
  void write_csv(std::ostream& out) const;
  /// Reads the format written by write_csv, re-deriving standardized columns from `grid`.
  static Design from_csv(std::istream& in, const DoseGrid& grid);
};

/// Column letter used for factor `i` in file headers: A, B, C, ...
std::string factor_letter(std::size_t i);

/// All combinations of every factor's levels, lexicographic in coded order
/// (last factor varies fastest).
Design full_factorial(const DoseGrid& grid);

/// Full factorial restricted to the coded levels in `codes` for every factor.
Design level_subset_factorial(const DoseGrid& grid, const std::vector<int>& codes);

/// `n` distinct rows of `full` drawn uniformly without replacement, in the
/// order drawn.
Design random_subdesign(const Design& full, std::size_t n, std::uint64_t seed);

/// Row index of every row of `sub` inside `full` (matched on coded levels).
std::vector<std::size_t> match_rows(const Design& full, const Design& sub);

}  // namespace rsm

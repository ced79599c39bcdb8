#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rsm/dataset.hpp"
#include "rsm/designs.hpp"

namespace rsm {

/// One response column of a data file.
struct NamedDataset {
  std::string name;
  Dataset data;
};

/// Reads a data CSV against `grid`. Factor columns are either coded levels
/// (`codeA,codeB,...`) or actual doses (headed by the grid's factor names);
/// every other column is a response and yields its own dataset. Rows are
/// sorted into grid order. Throws IngestionError naming the 1-based data row
/// for unknown levels, duplicate runs and responses outside [0, 1].
std::vector<NamedDataset> ingest(std::istream& in, const DoseGrid& grid);
std::vector<NamedDataset> ingest_file(const std::string& path, const DoseGrid& grid);

/// Rows of `data` at the runs of `sub`; throws ConfigError if a run is missing.
Dataset select_runs(const Dataset& data, const Design& sub);

/// Everything a command needs. Text form: one `key = value` per line, `#`
/// comments; lists are comma separated.
struct RunConfig {
  std::string command;
  /// A data CSV path, or `synthetic:<cancer|normal|cells|gp>`.
  std::string data = "synthetic:cancer";
  /// Dose-grid CSV; empty selects the built-in lung-cancer grid.
  std::string grid;
  std::vector<std::string> models{"kriging", "mlp", "poly", "hill"};
  std::vector<std::string> designs{"full", "rd80", "rd27", "d047"};
  std::string kernel = "matern52";
  double tau2 = 1e-4;
  std::uint64_t seed = 2024;
  int replicates = 100;
  /// Network best-of-k restarts.
  int restarts = 100;
  int epochs = 2000;
  int kriging_restarts = 10;
  int hill_starts = 20;
  /// Synthetic data: noise standard deviation and generator seed.
  double noise = 0.02;
  std::uint64_t data_seed = 1;
  std::string fixed_factor = "C";
  double fixed_value = 0.0;
  int resolution = 101;
  std::vector<double> thetas{0.5, 1.0, 2.0};
  double h_max = 3.0;
  int points = 301;
  int bootstrap = 0;
  unsigned threads = 1;
  std::string out = "out";

  /// Throws ConfigError for unknown keys or malformed values.
  void set(const std::string& key, const std::string& value);
  /// Applies every `key = value` line of `in`.
  void apply_text(std::istream& in);
  /// Every key except `out`, in a fixed order.
  std::string to_text() const;
};

/// Runs the command line; returns the process exit status. Library errors map
/// to their Error::code(), usage errors to ConfigError's.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rsm

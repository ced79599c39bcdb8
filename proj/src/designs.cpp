#include "rsm/designs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "rsm/csv.hpp"
#include "rsm/error.hpp"
#include "rsm/random.hpp"

namespace rsm {

DoseGrid::DoseGrid(std::vector<std::string> factor_names, std::vector<std::vector<double>> levels)
    : names_(std::move(factor_names)), levels_(std::move(levels)) {
  if (names_.empty() || names_.size() != levels_.size()) {
    throw DomainError("dose grid: need one level list per factor");
  }
  for (std::size_t f = 0; f < levels_.size(); ++f) {
    const auto& lv = levels_[f];
    if (lv.size() < 2) throw DomainError("dose grid: factor '" + names_[f] + "' needs at least 2 levels");
    for (std::size_t i = 0; i < lv.size(); ++i) {
      if (!std::isfinite(lv[i]) || lv[i] < 0.0) {
        throw DomainError("dose grid: factor '" + names_[f] + "' has an invalid dose");
      }
      if (i > 0 && !(lv[i] > lv[i - 1])) {
        throw DomainError("dose grid: levels of '" + names_[f] + "' must be strictly ascending");
      }
    }
  }
}

DoseGrid DoseGrid::lung_cancer() {
  return DoseGrid({"AG490", "U0126", "I-3-M"}, {{0, 0.3, 1, 3, 10, 30, 100, 300},
                                                {0, 0.1, 0.3, 1, 3, 10, 30, 100},
                                                {0, 0.3, 1, 3, 10, 30, 100, 300}});
}

DoseGrid DoseGrid::from_csv(std::istream& in) {
  const auto table = read_csv(in);
  if (table.header.empty() || table.header.front() != "factor") {
    throw IngestionError("dose grid CSV must start with a 'factor' column");
  }
  std::vector<std::string> names;
  std::vector<std::vector<double>> levels;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    names.push_back(row.front());
    std::vector<double> lv;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c].empty()) continue;
      try {
        lv.push_back(parse_double(row[c]));
      } catch (const DomainError& e) {
        throw IngestionError("dose grid row " + std::to_string(r + 1) + ": " + e.what(), r + 1);
      }
    }
    levels.push_back(std::move(lv));
  }
  try {
    return DoseGrid(std::move(names), std::move(levels));
  } catch (const DomainError& e) {
    throw IngestionError(e.what());
  }
}

DoseGrid DoseGrid::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path + "'");
  return from_csv(in);
}

void DoseGrid::write_csv(std::ostream& out) const {
  std::size_t widest = 0;
  for (const auto& lv : levels_) widest = std::max(widest, lv.size());
  std::vector<std::string> cells{"factor"};
  for (std::size_t i = 0; i < widest; ++i) cells.push_back("level" + std::to_string(i));
  write_csv_row(out, cells);
  for (std::size_t f = 0; f < names_.size(); ++f) {
    cells.assign(1, names_[f]);
    for (std::size_t i = 0; i < widest; ++i) {
      cells.push_back(i < levels_[f].size() ? format_double(levels_[f][i]) : "");
    }
    write_csv_row(out, cells);
  }
}

std::size_t DoseGrid::grid_size() const noexcept {
  std::size_t n = 1;
  for (const auto& lv : levels_) n *= lv.size();
  return n;
}

Eigen::VectorXd DoseGrid::standardize(const std::vector<int>& coded_point) const {
  if (coded_point.size() != factors()) {
    throw DomainError("standardize: expected " + std::to_string(factors()) + " coded levels");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(factors()));
  for (std::size_t f = 0; f < factors(); ++f) {
    const int code = coded_point[f];
    if (code < 0 || static_cast<std::size_t>(code) >= levels_[f].size()) {
      throw DomainError("standardize: code " + std::to_string(code) + " out of range for factor '" +
                        names_[f] + "'");
    }
    const auto& lv = levels_[f];
    out(static_cast<Eigen::Index>(f)) = (lv[static_cast<std::size_t>(code)] - lv.front()) / (lv.back() - lv.front());
  }
  return out;
}

Eigen::VectorXd DoseGrid::actual_doses(const Eigen::Ref<const Eigen::VectorXd>& standardized) const {
  if (static_cast<std::size_t>(standardized.size()) != factors()) {
    throw DomainError("actual_doses: dimension mismatch");
  }
  Eigen::VectorXd out(standardized.size());
  for (std::size_t f = 0; f < factors(); ++f) {
    const auto i = static_cast<Eigen::Index>(f);
    out(i) = min_dose(f) + standardized(i) * (max_dose(f) - min_dose(f));
  }
  return out;
}

int DoseGrid::code_of_dose(std::size_t factor, double dose) const {
  const auto& lv = levels_.at(factor);
  for (std::size_t i = 0; i < lv.size(); ++i) {
    if (std::abs(lv[i] - dose) <= 1e-9 * std::max(1.0, std::abs(lv[i]))) return static_cast<int>(i);
  }
  return -1;
}

std::string Provenance::describe() const {
  switch (kind) {
    case Kind::FullFactorial: return "full";
    case Kind::RandomSubset: return "random(n=" + std::to_string(n) + ",seed=" + std::to_string(seed) + ")";
    case Kind::LevelSubsetFactorial: {
      std::string s = "levels(";
      for (std::size_t i = 0; i < codes.size(); ++i) s += (i ? "," : "") + std::to_string(codes[i]);
      return s + ")";
    }
  }
  return "unknown";
}

std::string factor_letter(std::size_t i) {
  return i < 26 ? std::string(1, static_cast<char>('A' + i)) : "X" + std::to_string(i);
}

void Design::write_csv(std::ostream& out) const {
  std::vector<std::string> cells;
  const auto d = static_cast<std::size_t>(dims());
  for (std::size_t f = 0; f < d; ++f) cells.push_back("code" + factor_letter(f));
  for (std::size_t f = 0; f < d; ++f) cells.push_back(factor_letter(f));
  write_csv_row(out, cells);
  for (Eigen::Index r = 0; r < runs(); ++r) {
    cells.clear();
    for (Eigen::Index f = 0; f < dims(); ++f) cells.push_back(std::to_string(coded_rows(r, f)));
    for (Eigen::Index f = 0; f < dims(); ++f) cells.push_back(format_double(rows(r, f)));
    write_csv_row(out, cells);
  }
}

Design Design::from_csv(std::istream& in, const DoseGrid& grid) {
  const auto table = read_csv(in);
  const auto d = grid.factors();
  std::vector<int> cols;
  for (std::size_t f = 0; f < d; ++f) {
    const int c = table.column("code" + factor_letter(f));
    if (c < 0) throw IngestionError("design CSV lacks column code" + factor_letter(f));
    cols.push_back(c);
  }
  Design design;
  design.rows.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(d));
  design.coded_rows.resize(design.rows.rows(), design.rows.cols());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::vector<int> code(d);
    try {
      for (std::size_t f = 0; f < d; ++f) code[f] = static_cast<int>(parse_long(table.rows[r][static_cast<std::size_t>(cols[f])]));
      design.rows.row(static_cast<Eigen::Index>(r)) = grid.standardize(code).transpose();
    } catch (const DomainError& e) {
      throw IngestionError("design row " + std::to_string(r + 1) + ": " + e.what(), r + 1);
    }
    for (std::size_t f = 0; f < d; ++f) design.coded_rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) = code[f];
  }
  return design;
}

namespace {

Design enumerate(const DoseGrid& grid, const std::vector<std::vector<int>>& codes_per_factor,
                 Provenance provenance) {
  const auto d = grid.factors();
  std::size_t n = 1;
  for (const auto& c : codes_per_factor) n *= c.size();
  Design design;
  design.provenance = std::move(provenance);
  design.rows.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  design.coded_rows.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<std::size_t> idx(d, 0);
  std::vector<int> code(d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t f = 0; f < d; ++f) code[f] = codes_per_factor[f][idx[f]];
    const auto row = static_cast<Eigen::Index>(r);
    design.rows.row(row) = grid.standardize(code).transpose();
    for (std::size_t f = 0; f < d; ++f) design.coded_rows(row, static_cast<Eigen::Index>(f)) = code[f];
    // odometer, last factor fastest
    for (std::size_t f = d; f-- > 0;) {
      if (++idx[f] < codes_per_factor[f].size()) break;
      idx[f] = 0;
    }
  }
  return design;
}

}  // namespace

Design full_factorial(const DoseGrid& grid) {
  std::vector<std::vector<int>> codes(grid.factors());
  for (std::size_t f = 0; f < grid.factors(); ++f) {
    for (std::size_t i = 0; i < grid.level_count(f); ++i) codes[f].push_back(static_cast<int>(i));
  }
  return enumerate(grid, codes, Provenance{});
}

Design level_subset_factorial(const DoseGrid& grid, const std::vector<int>& codes) {
  if (codes.empty()) throw DomainError("level subset: no codes given");
  std::set<int> seen;
  for (int c : codes) {
    if (!seen.insert(c).second) throw DomainError("level subset: duplicate code " + std::to_string(c));
    for (std::size_t f = 0; f < grid.factors(); ++f) {
      if (c < 0 || static_cast<std::size_t>(c) >= grid.level_count(f)) {
        throw DomainError("level subset: code " + std::to_string(c) + " out of range for factor '" +
                          grid.factor_names()[f] + "'");
      }
    }
  }
  std::vector<int> sorted(seen.begin(), seen.end());
  Provenance p;
  p.kind = Provenance::Kind::LevelSubsetFactorial;
  p.codes = sorted;
  return enumerate(grid, std::vector<std::vector<int>>(grid.factors(), sorted), p);
}

Design random_subdesign(const Design& full, std::size_t n, std::uint64_t seed) {
  const auto total = static_cast<std::size_t>(full.runs());
  if (n > total) {
    throw DomainError("random sub-design: asked for " + std::to_string(n) + " runs out of " +
                      std::to_string(total));
  }
  if (n == 0) throw DomainError("random sub-design: n must be positive");
  // partial Fisher-Yates
  std::vector<std::size_t> order(total);
  for (std::size_t i = 0; i < total; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.below(total - i);
    std::swap(order[i], order[j]);
  }
  Design design;
  design.provenance.kind = Provenance::Kind::RandomSubset;
  design.provenance.seed = seed;
  design.provenance.n = n;
  design.rows.resize(static_cast<Eigen::Index>(n), full.dims());
  design.coded_rows.resize(static_cast<Eigen::Index>(n), full.dims());
  for (std::size_t i = 0; i < n; ++i) {
    design.rows.row(static_cast<Eigen::Index>(i)) = full.rows.row(static_cast<Eigen::Index>(order[i]));
    design.coded_rows.row(static_cast<Eigen::Index>(i)) = full.coded_rows.row(static_cast<Eigen::Index>(order[i]));
  }
  return design;
}

std::vector<std::size_t> match_rows(const Design& full, const Design& sub) {
  if (full.dims() != sub.dims()) throw DomainError("match_rows: dimension mismatch");
  std::map<std::vector<int>, std::size_t> index;
  for (Eigen::Index r = 0; r < full.runs(); ++r) {
    std::vector<int> key(full.coded_rows.row(r).begin(), full.coded_rows.row(r).end());
    index.emplace(std::move(key), static_cast<std::size_t>(r));
  }
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(sub.runs()));
  for (Eigen::Index r = 0; r < sub.runs(); ++r) {
    std::vector<int> key(sub.coded_rows.row(r).begin(), sub.coded_rows.row(r).end());
    const auto it = index.find(key);
    if (it == index.end()) throw DomainError("match_rows: row " + std::to_string(r + 1) + " not in the full design");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace rsm

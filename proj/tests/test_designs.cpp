#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "rsm/designs.hpp"
#include "rsm/error.hpp"

using namespace rsm;

namespace {
std::set<std::vector<int>> coded_set(const Design& d) {
  std::set<std::vector<int>> s;
  for (Eigen::Index r = 0; r < d.runs(); ++r) s.insert({d.coded_rows.row(r).begin(), d.coded_rows.row(r).end()});
  return s;
}
}  // namespace

TEST_CASE("standardize on the lung-cancer grid") {
  const auto grid = DoseGrid::lung_cancer();
  CHECK(grid.standardize({7, 0, 0})(0) == 1.0);
  CHECK(grid.standardize({0, 0, 0}).isZero());
  CHECK(grid.standardize({4, 0, 0})(0) == 10.0 / 300.0);
  CHECK(grid.standardize({0, 4, 0})(1) == 3.0 / 100.0);
  CHECK_THROWS_AS(grid.standardize({8, 0, 0}), DomainError);
  CHECK_THROWS_AS(grid.standardize({0, -1, 0}), DomainError);
  CHECK_THROWS_AS(grid.standardize({0, 0}), DomainError);

  for (std::size_t f = 0; f < 3; ++f) {
    double prev = -1.0;
    for (int c = 0; c < 8; ++c) {
      std::vector<int> code{0, 0, 0};
      code[f] = c;
      const double v = grid.standardize(code)(static_cast<Eigen::Index>(f));
      CHECK(v > prev);
      prev = v;
    }
    CHECK(prev == 1.0);
  }
  const Eigen::Vector3d x = grid.standardize({4, 2, 6});
  CHECK(grid.actual_doses(x)(0) == doctest::Approx(10.0));
  CHECK(grid.actual_doses(x)(1) == doctest::Approx(0.3));
  CHECK(grid.actual_doses(x)(2) == doctest::Approx(100.0));
}

TEST_CASE("dose grid validation") {
  CHECK_THROWS_AS(DoseGrid({"A"}, {{0, 1, 1}}), DomainError);
  CHECK_THROWS_AS(DoseGrid({"A"}, {{1}}), DomainError);
  CHECK_THROWS_AS(DoseGrid({"A", "B"}, {{0, 1}}), DomainError);
  CHECK_THROWS_AS(DoseGrid({"A"}, {{-1, 1}}), DomainError);
}

TEST_CASE("full factorial") {
  const auto grid = DoseGrid::lung_cancer();
  const auto full = full_factorial(grid);
  CHECK(full.runs() == 512);
  CHECK(coded_set(full).size() == 512);
  CHECK(full.coded_rows.row(0).isZero());
  CHECK(full.coded_rows(1, 2) == 1);  // last factor varies fastest
  CHECK(full.rows.minCoeff() == 0.0);
  CHECK(full.rows.maxCoeff() == 1.0);

  CHECK(full_factorial(DoseGrid({"A"}, {{0, 1, 2, 3, 4, 5, 6, 7}})).runs() == 8);

  const auto small = full_factorial(DoseGrid({"A", "B"}, {{0, 1, 2}, {0, 5, 10}}));
  REQUIRE(small.runs() == 9);
  CHECK(small.rows.row(0).isZero());
  CHECK(small.rows.row(8) == Eigen::RowVector2d(1.0, 1.0));
}

TEST_CASE("level subset factorial") {
  const auto grid = DoseGrid::lung_cancer();
  const auto full = full_factorial(grid);
  const auto d047 = level_subset_factorial(grid, {0, 4, 7});
  CHECK(d047.runs() == 27);
  CHECK(d047.provenance.kind == Provenance::Kind::LevelSubsetFactorial);
  const auto all = coded_set(full);
  for (const auto& row : coded_set(d047)) CHECK(all.count(row) == 1);
  CHECK(coded_set(d047).size() == 27);

  CHECK(level_subset_factorial(grid, {0, 5, 7}).runs() == 27);
  const auto every = level_subset_factorial(grid, {0, 1, 2, 3, 4, 5, 6, 7});
  CHECK(every.rows == full.rows);
  CHECK(every.coded_rows == full.coded_rows);
  // order of the codes does not matter
  CHECK(level_subset_factorial(grid, {7, 0, 4}).coded_rows == d047.coded_rows);

  CHECK_THROWS_AS(level_subset_factorial(grid, {}), DomainError);
  CHECK_THROWS_AS(level_subset_factorial(grid, {0, 8}), DomainError);
  CHECK_THROWS_AS(level_subset_factorial(grid, {0, 0, 4}), DomainError);
}

TEST_CASE("random sub-designs") {
  const auto grid = DoseGrid::lung_cancer();
  const auto full = full_factorial(grid);
  const auto all = coded_set(full);

  CHECK(coded_set(random_subdesign(full, 512, 1)) == all);

  const auto a = random_subdesign(full, 80, 1);
  const auto b = random_subdesign(full, 80, 2);
  const auto a2 = random_subdesign(full, 80, 1);
  CHECK(a.coded_rows == a2.coded_rows);
  CHECK(coded_set(a) != coded_set(b));

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto d = random_subdesign(full, 27, seed);
    REQUIRE(d.runs() == 27);
    const auto rows = coded_set(d);
    CHECK(rows.size() == 27);
    CHECK(std::includes(all.begin(), all.end(), rows.begin(), rows.end()));
    CHECK(d.provenance.seed == seed);
  }
  CHECK_THROWS_AS(random_subdesign(full, 513, 0), DomainError);
}

TEST_CASE("design and grid CSV") {
  const auto grid = DoseGrid::lung_cancer();
  const auto d = level_subset_factorial(grid, {0, 4, 7});
  std::stringstream s;
  d.write_csv(s);
  CHECK(s.str().starts_with("codeA,codeB,codeC,A,B,C\n0,0,0,0,0,0\n"));
  const auto back = Design::from_csv(s, grid);
  CHECK(back.coded_rows == d.coded_rows);
  CHECK(back.rows == d.rows);

  std::stringstream g;
  grid.write_csv(g);
  CHECK(g.str().starts_with("factor,level0,"));
  const auto grid2 = DoseGrid::from_csv(g);
  CHECK(grid2.factor_names() == grid.factor_names());
  for (std::size_t f = 0; f < 3; ++f) CHECK(grid2.levels(f) == grid.levels(f));

  std::istringstream bad("factor,level0,level1\nA,0,x\n");
  CHECK_THROWS_AS(DoseGrid::from_csv(bad), IngestionError);
}

TEST_CASE("match rows") {
  const auto grid = DoseGrid::lung_cancer();
  const auto full = full_factorial(grid);
  const auto sub = random_subdesign(full, 30, 9);
  const auto idx = match_rows(full, sub);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    CHECK(full.coded_rows.row(static_cast<Eigen::Index>(idx[i])) == sub.coded_rows.row(static_cast<Eigen::Index>(i)));
  }
}

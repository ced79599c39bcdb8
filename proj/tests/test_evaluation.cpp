#include <cmath>
#include <sstream>

#include "doctest.h"
#include "rsm/designs.hpp"
#include "rsm/error.hpp"
#include "rsm/evaluation.hpp"
#include "rsm/random.hpp"
#include "rsm/synthetic.hpp"

using namespace rsm;

namespace {

const DoseGrid& grid() {
  static const DoseGrid g = DoseGrid::lung_cancer();
  return g;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

ModelSettings quick_settings() {
  ModelSettings s;
  s.mlp.restarts = 10;
  s.mlp.epochs = 1000;
  return s;
}

}  // namespace

TEST_CASE("mse") {
  CHECK(mse(vec({0.3, 0.4}), vec({0.3, 0.4})) == 0.0);
  CHECK(mse(vec({0, 0}), vec({1, 1})) == 1.0);
  CHECK(mse(vec({0.1, 0.2, 0.4}), vec({0.1, 0.2, 0.1})) == doctest::Approx(0.03).epsilon(1e-14));
  CHECK_THROWS_AS(mse(vec({1}), vec({1, 2})), DomainError);
  CHECK_THROWS_AS(mse(Eigen::VectorXd(), Eigen::VectorXd()), DomainError);
}

TEST_CASE("pearson") {
  const Eigen::VectorXd obs = vec({0.2, 0.9, 0.4, 0.1});
  CHECK(pearson((2.0 * obs.array() + 3.0).matrix(), obs) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson(-obs, obs) == doctest::Approx(-1.0).epsilon(1e-15));
  // independent oracle: tests/oracles/kriging_oracles.py
  CHECK(pearson(vec({1, 2, 3}), vec({1, 3, 2})) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(pearson(vec({0.5, 0.5, 0.5}), vec({1, 3, 2})), UndefinedCorrelationError);
  CHECK_THROWS_AS(pearson(vec({1}), vec({1})), DomainError);
}

TEST_CASE("cell format") {
  CHECK(format_cell(0.00097, 0.9956) == "0.97(99.56%)");
  CHECK(format_cell(0.0, 1.0) == "0.00(100.00%)");
  CHECK(format_cell(0.01234, 0.5) == "12.34(50.00%)");
}

TEST_CASE("design families") {
  CHECK(DesignFamily::parse("full").name == "D_full");
  CHECK(DesignFamily::parse("D_full").kind == DesignFamily::Kind::Full);
  const auto rd = DesignFamily::parse("rd27");
  CHECK(rd.name == "RD27");
  CHECK(rd.replicates == 100);
  CHECK(DesignFamily::parse("RD80x5").replicates == 5);
  const auto d = DesignFamily::parse("d047");
  CHECK(d.name == "D047");
  CHECK(d.runs(grid()) == 27);
  CHECK(DesignFamily::parse(d.spec()).name == "D047");
  CHECK(DesignFamily::parse(DesignFamily::random(27, 7).spec()).replicates == 7);
  CHECK_THROWS_AS(DesignFamily::parse("rdx"), ConfigError);
  CHECK_THROWS_AS(DesignFamily::parse("lhs"), ConfigError);
  CHECK_THROWS_AS(DesignFamily::random(27, 0), ConfigError);
  CHECK(DesignFamily::levels({0, 4, 7}).replicate_count() == 1);
}

TEST_CASE("comparison table") {
  EvalReport report;
  report.models = {ModelKind::Kriging, ModelKind::HillBased};
  report.designs = {"RD27"};
  CellReport k{ModelKind::Kriging, "RD27", {}, 0, 0, 0};
  CellReport h{ModelKind::HillBased, "RD27", {}, 0, 0, 0};
  for (int i = 0; i < 100; ++i) {
    k.replicates.push_back({i, 0, 0.00097, 0.9956, false, ""});
    const bool failed = i < 35;
    h.replicates.push_back({i, 0, failed ? NAN : 0.002, failed ? NAN : 0.9, failed, failed ? "diverged" : ""});
  }
  k.aggregate();
  h.aggregate();
  report.cells = {k, h};
  CHECK(h.failures == 35);
  CHECK(h.mean_mse == doctest::Approx(0.002));
  const std::string table = report.comparison_table();
  MESSAGE(table);
  CHECK(table.find("0.97(99.56%)") != std::string::npos);
  CHECK(table.find("2.00(90.00%)*") != std::string::npos);
  CHECK(table.find("35/100 excluded") != std::string::npos);

  std::stringstream csv;
  report.write_csv(csv);
  const auto back = EvalReport::read_csv(csv);
  CHECK(back.cell(ModelKind::HillBased, "RD27").failures == 35);
  CHECK(back.comparison_table() == table);
}

TEST_CASE("run_cell examples") {
  SUBCASE("Kriging on noise-free GP data over the full grid") {
    const auto data =
        gp_dataset(grid(), KernelSpec::matern52(), std::vector<double>{1.24, 2.0, 1.24}, 0.01, 0.5, 0.0, 3);
    ModelSettings s;
    s.kriging.tau2 = 0.0;
    s.kriging.n_restarts = 1;
    s.kriging.max_iters = 200;  // interpolation holds for any fitted range
    const auto cell = run_cell(data, grid(), DesignFamily::full(), ModelKind::Kriging, s, 1);
    MESSAGE("MSE " << cell.mean_mse << ", r " << cell.mean_r);
    CHECK(cell.mean_mse < 1e-10);
    CHECK(cell.mean_r > 0.999999);
  }
  SUBCASE("quadratic on an exact quadratic") {
    PolynomialModel truth;
    truth.betas = {0.7, -0.2, 0.1, -0.3, 0.05, 0.0, 0.1, 0.02, -0.04, 0.1};
    Dataset data;
    data.design = full_factorial(grid());
    data.responses = quadratic_responses(data.design, truth, 0.0, 1);
    const auto cell = run_cell(data, grid(), DesignFamily::levels({0, 4, 7}), ModelKind::Polynomial, {}, 1);
    CHECK(cell.mean_mse < 1e-12);
  }
  SUBCASE("Kriging beats the quadratic on RD27") {
    const auto data = hill_surface_dataset(grid(), HillSurface::cancer_like(), 0.02, 5);
    const auto fam = DesignFamily::random(27, 30);
    const auto k = run_cell(data, grid(), fam, ModelKind::Kriging, {}, 2024);
    const auto p = run_cell(data, grid(), fam, ModelKind::Polynomial, {}, 2024);
    MESSAGE("Kriging " << k.display_mse() << ", polynomial " << p.display_mse());
    CHECK(k.mean_mse < p.mean_mse);
  }
}

TEST_CASE("run_cell configuration errors") {
  const auto data = hill_surface_dataset(grid(), HillSurface::cancer_like(), 0.02, 5);
  CHECK_THROWS_AS(run_cell(data, grid(), DesignFamily::random(11, 2), ModelKind::HillBased, {}, 1), ConfigError);
  CHECK_THROWS_AS(run_cell(data, grid(), DesignFamily::random(9, 2), ModelKind::Polynomial, {}, 1), ConfigError);
  CHECK_THROWS_AS(run_cell(data, grid(), DesignFamily::random(600, 2), ModelKind::Kriging, {}, 1), ConfigError);
  CHECK_THROWS_AS(run_cell(data.subset(level_subset_factorial(grid(), {0, 4, 7})), grid(), DesignFamily::full(),
                           ModelKind::Kriging, {}, 1),
                  ConfigError);
  CHECK_THROWS_AS(run_comparison(data, grid(), {DesignFamily::levels({0, 4, 7}), DesignFamily::random(9, 1)},
                                 {ModelKind::Polynomial}, {}, 1),
                  ConfigError);
}

TEST_CASE("replicate seeds and determinism") {
  const auto fam = DesignFamily::random(27, 5);
  CHECK(replicate_seed(1, fam, 0) != replicate_seed(1, fam, 1));
  CHECK(replicate_seed(1, fam, 0) != replicate_seed(1, DesignFamily::random(80, 5), 0));
  const auto data = hill_surface_dataset(grid(), HillSurface::cancer_like(), 0.02, 5);
  const auto a = run_cell(data, grid(), fam, ModelKind::NeuralNetwork, quick_settings(), 3);
  const auto b = run_cell(data, grid(), fam, ModelKind::NeuralNetwork, quick_settings(), 3, 2);
  for (std::size_t i = 0; i < a.replicates.size(); ++i) {
    CHECK(a.replicates[i].mse == b.replicates[i].mse);
    CHECK(a.replicates[i].seed == replicate_seed(3, fam, static_cast<int>(i)));
  }
}

TEST_CASE("failures are excluded from the means") {
  const auto data = hill_surface_dataset(grid(), HillSurface::cancer_like(), 0.02, 11);
  const auto cell = run_cell(data, grid(), DesignFamily::random(27, 40), ModelKind::HillBased, {}, 2024);
  double worst = 0.0, sum = 0.0;
  int ok = 0;
  for (const auto& r : cell.replicates) {
    if (r.failed) continue;
    worst = std::max(worst, r.mse);
    sum += r.mse;
    ++ok;
  }
  CHECK(cell.failures + ok == 40);
  CHECK(cell.mean_mse <= worst);
  CHECK(cell.mean_mse == doctest::Approx(sum / ok).epsilon(1e-14));
}

TEST_CASE("scatter data agrees with the cell") {
  const auto data = hill_surface_dataset(grid(), HillSurface::cancer_like(), 0.02, 5);
  const auto train = data.subset(level_subset_factorial(grid(), {0, 4, 7}));
  ModelSettings s;
  const auto cell = run_cell(data, grid(), DesignFamily::levels({0, 4, 7}), ModelKind::Kriging, s, 9);
  const auto fit = fit_model(ModelKind::Kriging, train, grid(), s, derive_seed(cell.replicates[0].seed, 1));
  REQUIRE(fit.model.has_value());
  const auto sc = scatter_data(*fit.model, data);
  CHECK(sc.observed.size() == 512);
  CHECK(sc.predicted == predict_batch(*fit.model, data.x()));
  CHECK(std::abs(mse(sc.predicted, sc.observed) - cell.mean_mse) <= 1e-12);

  std::stringstream csv;
  sc.write_csv(csv);
  const auto back = ScatterData::read_csv(csv);
  CHECK(back.observed == sc.observed);
  CHECK(back.predicted == sc.predicted);

  PolynomialModel perfect;
  Dataset flat;
  flat.design = full_factorial(grid());
  perfect.betas[0] = 0.25;
  flat.responses = Eigen::VectorXd::Constant(512, 0.25);
  const auto diag = scatter_data(perfect, flat);
  CHECK(diag.observed == diag.predicted);
}

TEST_CASE("contour grids") {
  PolynomialModel flat;
  flat.betas[0] = 0.4;
  const auto g = contour_grid(flat, 2, 0.0, 11);
  CHECK(g.values.rows() == 11);
  CHECK((g.values.array() == 0.4).all());

  const auto data = hill_surface_dataset(grid(), HillSurface::cancer_like(), 0.02, 5);
  ModelSettings quick;
  quick.kriging.n_restarts = 2;
  quick.kriging.max_iters = 400;
  const auto full_fit = fit_model(ModelKind::Kriging, data.subset(level_subset_factorial(grid(), {0, 1, 2, 3, 4, 5, 6, 7})),
                                  grid(), quick, 1);
  REQUIRE(full_fit.model.has_value());
  const auto small_fit =
      fit_model(ModelKind::Kriging, data.subset(level_subset_factorial(grid(), {0, 4, 7})), grid(), quick, 1);
  REQUIRE(small_fit.model.has_value());
  for (std::size_t fixed = 0; fixed < 3; ++fixed) {
    const auto a = contour_grid(*full_fit.model, fixed, 0.0, 21);
    const auto b = contour_grid(*small_fit.model, fixed, 0.0, 21);
    CHECK(a.values(0, 0) == doctest::Approx(predict_batch(*full_fit.model, Eigen::MatrixXd::Zero(1, 3))(0)));
    MESSAGE("fixed factor " << fixed << ": max |D_full - D047| = " << (a.values - b.values).cwiseAbs().maxCoeff());
  }

  const auto c = contour_grid(*small_fit.model, 0, 0.5, 5);
  CHECK(c.row_factor == 1);
  CHECK(c.col_factor == 2);
  std::stringstream csv;
  c.write_csv(csv);
  CHECK(csv.str().starts_with("B\\C,"));
  const auto back = ContourGrid::read_csv(csv);
  CHECK(back.values == c.values);
  CHECK(back.axis == c.axis);
  CHECK_THROWS_AS(contour_grid(flat, 3, 0.0, 5), DomainError);
  CHECK_THROWS_AS(contour_grid(flat, 0, 1.5, 5), DomainError);
}

TEST_CASE("Kriging dominates on GP-generated truth") {
  const auto data = gp_dataset(grid(), KernelSpec::matern52(), std::vector<double>{0.5, 0.8, 0.5}, 0.02, 0.5, 1e-4, 21);
  const std::vector<DesignFamily> families{DesignFamily::full(), DesignFamily::random(80, 5), DesignFamily::random(27, 5),
                                           DesignFamily::levels({0, 4, 7})};
  const auto report =
      run_comparison(data, grid(), families,
                     {ModelKind::Kriging, ModelKind::NeuralNetwork, ModelKind::Polynomial, ModelKind::HillBased},
                     quick_settings(), 77);
  MESSAGE(report.comparison_table());
  for (const auto& f : families) {
    const double k = report.cell(ModelKind::Kriging, f.name).mean_mse;
    for (ModelKind m : {ModelKind::NeuralNetwork, ModelKind::Polynomial, ModelKind::HillBased}) {
      const auto& c = report.cell(m, f.name);
      if (c.failures == c.replicate_count()) continue;
      CHECK(k <= c.mean_mse);
    }
  }
}

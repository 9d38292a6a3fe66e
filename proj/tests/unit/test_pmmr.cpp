#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "proxi/errors.hpp"
#include "proxi/pmmr.hpp"
#include "proxi/synthdata.hpp"

using namespace proxi;
using testing::random_dataset;
using testing::random_matrix;
using testing::random_vector;
using testing::rel_err;

namespace {

KernelSet unit_specs() {
  return KernelSet{KernelSpec({1.0}), KernelSpec(), KernelSpec({1.0, 1.0}), KernelSpec({1.0, 1.0})};
}

struct Grams {
  Matrix l;
  Matrix k;
};

Grams grams(const Dataset& d, const KernelSet& s) {
  return {gram(d.awx(), d.awx(), s.awx()), gram(d.azx(), d.azx(), s.azx())};
}

}  // namespace

TEST_CASE("vstat_risk") {
  CHECK(pmmr::vstat_risk(Vector::Zero(3), random_matrix(3, 3, 1)) == 0.0);

  Matrix w(2, 2);
  w << 1.0, 0.3, 0.3, 1.0;
  CHECK(pmmr::vstat_risk(Vector::Ones(2), w) == doctest::Approx((2.0 + 2.0 * 0.3) / 4.0));

  const Vector r = random_vector(7, 2);
  const Matrix k = testing::random_psd(7, 3);
  double loop = 0.0;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) loop += r(i) * r(j) * k(i, j);
  }
  CHECK(pmmr::vstat_risk(r, k) == doctest::Approx(loop / 49.0).epsilon(1e-12));
  CHECK_THROWS_AS(pmmr::vstat_risk(r, Matrix::Identity(6, 6)), DimensionError);
}

TEST_CASE("pmmr_fit trivial cases") {
  Dataset d = random_dataset(6, 4);
  d.y.setZero();
  CHECK(pmmr::pmmr_fit(d, unit_specs(), 0.1).alpha.norm() == 0.0);

  const Dataset one = random_dataset(1, 5);
  const double lambda = 0.3;
  const auto model = pmmr::pmmr_fit(one, unit_specs(), lambda);
  REQUIRE(model.size() == 1);
  CHECK(model.alpha(0) == doctest::Approx(one.y(0) / (1.0 + lambda)).epsilon(1e-7));

  CHECK_THROWS_AS(pmmr::pmmr_fit(d, unit_specs(), 0.0), InvalidArgument);
}

TEST_CASE("pmmr_fit minimizes the regularized V-statistic objective") {
  const Dataset d = random_dataset(8, 6);
  const KernelSet s = unit_specs();
  const double lambda = 1e-2;
  const auto model = pmmr::pmmr_fit(d, s, lambda);
  const Grams g = grams(d, s);
  const Vector gd = oracle::pmmr_gradient_descent(g.l, g.k, d.y, lambda, 200000);
  const double f_fit = oracle::pmmr_objective(g.l, g.k, d.y, model.alpha, lambda);
  const double f_gd = oracle::pmmr_objective(g.l, g.k, d.y, gd, lambda);
  CHECK(std::abs(f_fit - f_gd) <= 1e-6);
  CHECK(f_fit <= f_gd + 1e-12);
  CHECK(pmmr::objective(g.l, g.k, d.y, model.alpha, lambda) == doctest::Approx(f_fit).epsilon(1e-10));
}

TEST_CASE("pmmr_fit is a stationary point of the objective") {
  const Dataset d = random_dataset(10, 7);
  const KernelSet s = unit_specs();
  const double lambda = 1e-3;
  const auto model = pmmr::pmmr_fit(d, s, lambda);
  const Grams g = grams(d, s);
  const double h = 1e-5;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < 10; ++i) {
    Vector up = model.alpha, dn = model.alpha;
    up(i) += h;
    dn(i) -= h;
    const double fd = (pmmr::objective(g.l, g.k, d.y, up, lambda) -
                       pmmr::objective(g.l, g.k, d.y, dn, lambda)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd));
  }
  CHECK(worst <= 1e-6 * (1.0 + d.y.cwiseAbs().maxCoeff()));
}

TEST_CASE("pmmr_fit_nystrom with every landmark reproduces the exact fit") {
  const Dataset d = random_dataset(10, 8);
  const auto exact = pmmr::pmmr_fit(d, unit_specs(), 1e-2);
  const auto approx = pmmr::pmmr_fit_nystrom(d, unit_specs(), 1e-2, 10, 3);
  CHECK(rel_err(approx.alpha, exact.alpha) <= 1e-5);

  Dataset zero = d;
  zero.y.setZero();
  CHECK(pmmr::pmmr_fit_nystrom(zero, unit_specs(), 1e-2, 5, 1).alpha.norm() == 0.0);
  CHECK_THROWS_AS(pmmr::pmmr_fit_nystrom(d, unit_specs(), 1e-2, 11, 1), InvalidArgument);
  CHECK_THROWS_AS(pmmr::pmmr_fit_nystrom(d, unit_specs(), 1e-2, 0, 1), InvalidArgument);
}

TEST_CASE("half-rank Nystrom fit stays close to the exact fit on the benchmark data") {
  const Dataset d = synth::gen_main(200, 11).data;
  const KernelSet s = KernelSet::median(d);
  const double lambda = 1e-3;
  const auto exact = pmmr::pmmr_fit(d, s, lambda);
  const auto approx = pmmr::pmmr_fit_nystrom(d, s, lambda, 100, 11);
  const Vector h_exact = pmmr::pmmr_predict(exact, d.a, d.w, d.x);
  const Vector h_approx = pmmr::pmmr_predict(approx, d.a, d.w, d.x);
  const double rms_exact = std::sqrt(h_exact.squaredNorm() / 200.0);
  const double rms_diff = std::sqrt((h_exact - h_approx).squaredNorm() / 200.0);
  CHECK(rms_diff < 0.1 * rms_exact);
}

TEST_CASE("pmmr_h and pmmr_predict") {
  const Dataset d = random_dataset(5, 12);
  pmmr::PmmrModel model = pmmr::pmmr_fit(d, unit_specs(), 0.1);
  const RowVector a = random_matrix(1, 1, 13).row(0);
  const RowVector w = random_matrix(1, 2, 14).row(0);
  const RowVector x(0);

  pmmr::PmmrModel zero = model;
  zero.alpha.setZero();
  CHECK(pmmr::pmmr_h(zero, a, w, x) == 0.0);

  const Dataset one = d.head(1);
  const auto single = pmmr::pmmr_fit(one, unit_specs(), 0.1);
  CHECK(pmmr::pmmr_h(single, one.a.row(0), one.w.row(0), one.x.row(0)) == single.alpha(0));

  model.alpha = random_vector(5, 15);
  const KernelSet s = unit_specs();
  double loop = 0.0;
  for (Eigen::Index i = 0; i < 5; ++i) {
    const double da = d.a(i, 0) - a(0);
    const double dw0 = d.w(i, 0) - w(0);
    const double dw1 = d.w(i, 1) - w(1);
    loop += model.alpha(i) * std::exp(-0.5 * (da * da + dw0 * dw0 + dw1 * dw1));
  }
  CHECK(pmmr::pmmr_h(model, a, w, x) == doctest::Approx(loop).epsilon(1e-12));
  const Vector preds = pmmr::pmmr_predict(model, d.a, d.w, d.x);
  CHECK(preds(2) == doctest::Approx(pmmr::pmmr_h(model, d.a.row(2), d.w.row(2), d.x.row(2))));
}

TEST_CASE("pmmr_ate averages h over the adjustment sample") {
  const Dataset d = random_dataset(9, 16);
  const auto model = pmmr::pmmr_fit(d, unit_specs(), 0.05);
  const Dataset adj = random_dataset(4, 17);
  Vector grid(3);
  grid << -0.5, 0.0, 1.5;
  const DoCurve curve = pmmr::pmmr_ate(model, grid, adj.x, adj.w);
  for (Eigen::Index g = 0; g < 3; ++g) {
    double mean = 0.0;
    for (Eigen::Index k = 0; k < 4; ++k) {
      mean += pmmr::pmmr_h(model, RowVector::Constant(1, grid(g)), adj.w.row(k), adj.x.row(k)) / 4.0;
    }
    CHECK(curve.estimate(g) == doctest::Approx(mean).epsilon(1e-10));
  }
  const DoCurve first = pmmr::pmmr_ate(model, grid, adj.x.topRows(1), adj.w.topRows(1));
  CHECK(first.estimate(0) ==
        doctest::Approx(pmmr::pmmr_h(model, RowVector::Constant(1, -0.5), adj.w.row(0), adj.x.row(0))));

  // A constant h: one training point with a very wide kernel.
  const KernelSet wide{KernelSpec({1e8}), KernelSpec(), KernelSpec({1.0, 1.0}), KernelSpec({1e8, 1e8})};
  pmmr::PmmrModel constant{d.head(1).awx(), Vector::Constant(1, 0.7), 0.1, wide};
  const DoCurve flat = pmmr::pmmr_ate(constant, grid, adj.x, adj.w);
  CHECK((flat.estimate.array() - 0.7).abs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(pmmr::pmmr_ate(model, grid, Matrix(0, 0), Matrix(0, 2)), InvalidArgument);
}

TEST_CASE("pmmr_select_lambda") {
  const Dataset d = synth::gen_main(200, 21).data;
  const KernelSet s = KernelSet::median(d);
  const auto [train, valid] = split_half(d, 21);
  CHECK(pmmr::pmmr_select_lambda(train, valid, s, {0.01}).lambda == 0.01);

  const std::vector<double> grid = pmmr::default_lambda_grid();
  REQUIRE(grid.size() == 50);
  CHECK(grid.front() == doctest::Approx(1.0 / (450.0 * 450.0)));
  CHECK(grid.back() == doctest::Approx(0.25));

  const auto sel = pmmr::pmmr_select_lambda(train, valid, s, grid);
  const auto best = static_cast<std::size_t>(std::find(grid.begin(), grid.end(), sel.lambda) - grid.begin());
  for (double score : sel.scores) CHECK(sel.scores[best] <= score);
  CHECK(sel.scores[best] <= sel.scores.front());
  CHECK(sel.scores[best] <= sel.scores.back());

  // Score of one grid point equals the V-statistic of an independent fit.
  const auto fit = pmmr::pmmr_fit(train, s, grid[10]);
  const Vector resid = valid.y - pmmr::pmmr_predict(fit, valid.a, valid.w, valid.x);
  const Matrix kv = gram(valid.azx(), valid.azx(), s.azx());
  CHECK(sel.scores[10] == doctest::Approx(pmmr::vstat_risk(resid, kv)).epsilon(1e-8));
}

TEST_CASE("exact bridge residuals satisfy the moment restriction on the discrete toy") {
  const synth::DiscreteToySpec spec = synth::two_state_toy();
  const synth::DiscreteToy toy = synth::gen_discrete_toy(spec, 2000, 5);
  const Dataset& d = toy.data;
  Vector resid(d.rows());
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    resid(i) = d.y(i) - toy.bridge(static_cast<Eigen::Index>(d.a(i, 0)), static_cast<Eigen::Index>(d.w(i, 0)));
  }
  const KernelSet s = KernelSet::median(d);
  const Matrix k = gram(d.azx(), d.azx(), s.azx());
  CHECK(pmmr::vstat_risk(resid, k) <= 1e-2);
}

#include <doctest.h>

#include <cmath>

#include "proxi/errors.hpp"
#include "proxi/synthdata.hpp"

using namespace proxi;

namespace {

double mean(const Vector& v) { return v.mean(); }
double var(const Vector& v) { return (v.array() - v.mean()).square().mean(); }

// beta(a) = E[U2 cos(2a + 0.6 U1 + 0.4)] by composite Simpson on each
// piece of the uniform confounder density (1/3 on U2, 1 on U1 given U2).
double quadrature_truth(double a) {
  auto simpson = [](auto f, double lo, double hi, int n) {
    const double h = (hi - lo) / n;
    double s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
    return s * h / 3.0;
  };
  auto inner = [&](double u2) {
    const bool mid = u2 >= 0.0 && u2 <= 1.0;
    const double lo = mid ? -1.0 : 0.0;
    return simpson([&](double u1) { return u2 * std::cos(2.0 * a + 0.6 * u1 + 0.4); }, lo, lo + 1.0, 200);
  };
  const double total = simpson(inner, -1.0, 0.0, 200) + simpson(inner, 0.0, 1.0, 200) +
                       simpson(inner, 1.0, 2.0, 200);
  return total / 3.0;
}

}  // namespace

TEST_CASE("gen_main marginal moments") {
  const synth::SyntheticDraw draw = synth::gen_main(100000, 1);
  const Dataset& d = draw.data;
  CHECK(d.a.cols() == 1);
  CHECK(d.x.cols() == 0);
  CHECK(d.z.cols() == 2);
  CHECK(d.w.cols() == 2);
  CHECK(std::abs(mean(d.a.col(0)) - 0.5) <= 0.02);
  CHECK(std::abs(var(d.a.col(0)) - 0.80) <= 0.03);

  const Vector u1 = draw.u.col(0);
  const Vector u2 = draw.u.col(1);
  CHECK(u2.minCoeff() >= -1.0);
  CHECK(u2.maxCoeff() <= 2.0);
  CHECK(u1.minCoeff() >= -1.0);
  CHECK(u1.maxCoeff() <= 1.0);
  // Three Monte-Carlo standard errors at n = 1e5.
  const double se = 1.0 / std::sqrt(100000.0);
  CHECK(std::abs(mean(u2) - 0.5) <= 3.0 * std::sqrt(0.75) * se);
  CHECK(std::abs(mean(u1) - 1.0 / 6.0) <= 3.0 * std::sqrt(var(u1)) * se);
  CHECK(std::abs(var(u2) - 0.75) <= 3.0 * std::sqrt(0.45) * se);
  // U1 sits in [-1, 0] exactly when U2 is in [0, 1].
  for (Eigen::Index i = 0; i < 1000; ++i) {
    const bool mid = u2(i) >= 0.0 && u2(i) <= 1.0;
    CHECK((mid ? u1(i) <= 0.0 : u1(i) >= 0.0));
  }
  // Y is the structural equation at the observed A.
  CHECK(d.y(5) == synth::structural_outcome(d.a(5, 0), u1(5), u2(5)));
  // Proxy noise variances.
  CHECK(std::abs(var(d.w.col(1) - u2) - 3.0) <= 0.06);
  CHECK(std::abs(var(d.z.col(1) - u2) - 1.0 / 3.0) <= 0.01);
}

TEST_CASE("gen_main is deterministic per seed") {
  const auto a = synth::gen_main(50, 7);
  const auto b = synth::gen_main(50, 7);
  const auto c = synth::gen_main(50, 8);
  CHECK(a.data.y == b.data.y);
  CHECK(a.data.z == b.data.z);
  CHECK(a.u == b.u);
  CHECK(a.data.y != c.data.y);
  CHECK_THROWS_AS(synth::gen_main(0, 1), InvalidArgument);
}

TEST_CASE("true_ate: determinism and self-consistency") {
  const Vector grid = synth::default_a_grid();
  const DoCurve t1 = synth::true_ate(grid, synth::kTruthSamples, synth::kOracleSeed);
  const DoCurve t2 = synth::true_ate(grid, synth::kTruthSamples, synth::kOracleSeed + 1);
  CHECK((t1.estimate - t2.estimate).cwiseAbs().maxCoeff() <= 2e-3);
  CHECK(synth::true_ate(grid, 1000, 3).estimate == synth::true_ate(grid, 1000, 3).estimate);
  CHECK_THROWS_AS(synth::true_ate(grid, 0, 1), InvalidArgument);
}

TEST_CASE("true_ate agrees with tensor-grid quadrature") {
  const Vector grid = synth::default_a_grid();
  // sd(U2 cos(.)) <= sqrt(E[U2^2]) = 1, so 1e7 draws give a standard error <= 3.2e-4.
  const DoCurve fine = synth::true_ate(grid, 10'000'000, 5);
  // The frozen 1e6-draw truth has standard error <= 1e-3; allow four.
  const DoCurve frozen = synth::true_ate(grid, synth::kTruthSamples, synth::kOracleSeed);
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    const double q = quadrature_truth(grid(g));
    CHECK(std::abs(fine.estimate(g) - q) <= 1e-3);
    CHECK(std::abs(frozen.estimate(g) - q) <= 4e-3);
  }
}

TEST_CASE("default treatment grid spans the central 90% of A") {
  const Vector grid = synth::default_a_grid();
  REQUIRE(grid.size() == 9);
  CHECK(grid(0) == doctest::Approx(-0.897).epsilon(0.01));
  CHECK(grid(8) == doctest::Approx(1.898).epsilon(0.01));
  for (Eigen::Index i = 1; i < 9; ++i) CHECK(grid(i) > grid(i - 1));
  const Vector a = synth::gen_main(200000, 99).data.a.col(0);
  const double below = (a.array() < grid(0)).cast<double>().mean();
  const double above = (a.array() > grid(8)).cast<double>().mean();
  CHECK(std::abs(below - 0.05) < 0.005);
  CHECK(std::abs(above - 0.05) < 0.005);
}

TEST_CASE("discrete toy: exact bridge solves the integral equation") {
  const synth::DiscreteToySpec spec = synth::two_state_toy();
  const Matrix h = synth::exact_bridge(spec);
  for (Eigen::Index a = 0; a < spec.levels(); ++a) {
    const Matrix p = synth::conditional_w_given_az(spec, a);
    const Vector e = synth::conditional_y_given_az(spec, a);
    CHECK((p * h.row(a).transpose() - e).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("discrete toy: adjusting the bridge over p(w) gives the interventional mean") {
  const synth::DiscreteToySpec spec = synth::two_state_toy();
  const Matrix h = synth::exact_bridge(spec);
  const Vector p_w = spec.p_w_given_u.transpose() * spec.p_u;
  // Brute-force enumeration of E[Y | do(a)] = sum_u p(u) f(a, u).
  for (Eigen::Index a = 0; a < spec.levels(); ++a) {
    double enumerated = 0.0;
    for (Eigen::Index u = 0; u < spec.states(); ++u) enumerated += spec.p_u(u) * spec.outcome(a, u);
    CHECK(std::abs(h.row(a).dot(p_w) - enumerated) <= 1e-10);
    CHECK(std::abs(synth::enumerated_do_mean(spec)(a) - enumerated) <= 1e-15);
  }
}

TEST_CASE("discrete toy: outcome equal to the treatment gives beta(a) = a") {
  synth::DiscreteToySpec spec = synth::two_state_toy();
  spec.outcome << 0.0, 0.0, 1.0, 1.0;
  const Vector beta = synth::enumerated_do_mean(spec);
  CHECK(beta(0) == 0.0);
  CHECK(beta(1) == 1.0);
}

TEST_CASE("discrete toy: degenerate proxies are rejected") {
  synth::DiscreteToySpec spec = synth::two_state_toy();
  spec.p_w_given_u << 0.5, 0.5, 0.5, 0.5;
  CHECK_THROWS_AS(synth::exact_bridge(spec), NumericalError);
  CHECK_THROWS_AS(synth::gen_discrete_toy(spec, 10, 1), NumericalError);

  synth::DiscreteToySpec bad = synth::two_state_toy();
  bad.p_u << 0.3, 0.3;
  CHECK_THROWS_AS(synth::exact_bridge(bad), InvalidArgument);
}

TEST_CASE("discrete toy sampling") {
  const synth::DiscreteToySpec spec = synth::two_state_toy();
  const synth::DiscreteToy toy = synth::gen_discrete_toy(spec, 20000, 3);
  const Dataset& d = toy.data;
  CHECK(d.rows() == 20000);
  CHECK(d.x.cols() == 0);
  CHECK((d.a.array() == 0.0 || d.a.array() == 1.0).all());
  CHECK((d.w.array() == 0.0 || d.w.array() == 1.0).all());
  // P(A = 1) = sum_u p(u) p(a = 1 | u) = 0.4 * 0.3 + 0.6 * 0.7.
  CHECK(std::abs(d.a.mean() - 0.54) < 0.015);
  CHECK(toy.levels.size() == 2);
  CHECK(synth::gen_discrete_toy(spec, 30, 9).data.y == synth::gen_discrete_toy(spec, 30, 9).data.y);
}

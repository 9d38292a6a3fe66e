#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "proxi/errors.hpp"
#include "proxi/kernels.hpp"
#include "proxi/numerics.hpp"

using namespace proxi;
using testing::random_matrix;
using testing::random_psd;
using testing::random_vector;
using testing::rel_err;

TEST_CASE("solve_psd on trivial systems") {
  const Vector e1 = Vector::Unit(3, 0);
  CHECK((solve_psd(Matrix::Identity(3, 3), 1.0, e1) - 0.5 * e1).norm() < 1e-15);

  const Vector v = random_vector(4, 1);
  CHECK((solve_psd(Matrix::Zero(4, 4), 0.25, v) - v / 0.25).norm() < 1e-12);
}

TEST_CASE("solve_psd matches an LU oracle") {
  const Matrix m = random_psd(6, 2);
  const Matrix rhs = random_matrix(6, 3, 3);
  const Matrix oracle = (m + 0.1 * Matrix::Identity(6, 6)).fullPivLu().solve(rhs);
  const Matrix got = solve_psd(m, 0.1, rhs);
  CHECK((got - oracle).cwiseAbs().maxCoeff() < 1e-8);
  const Matrix resid = (m + 0.1 * Matrix::Identity(6, 6)) * got - rhs;
  CHECK(resid.cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + rhs.cwiseAbs().maxCoeff()));
}

TEST_CASE("solve_psd rejects indefinite systems and bad shapes") {
  Matrix m = Matrix::Identity(3, 3);
  m(2, 2) = -5.0;
  CHECK_THROWS_AS(solve_psd(m, 1.0, Vector(Vector::Ones(3))), NumericalError);
  CHECK_THROWS_AS(solve_psd(Matrix(Matrix::Identity(3, 3)), 1.0, Vector(Vector::Ones(2))), DimensionError);
  CHECK_THROWS_AS(solve_psd(Matrix(Matrix::Identity(3, 2)), 1.0, Vector(Vector::Ones(3))), DimensionError);
}

TEST_CASE("khatri_rao_cols hand example and identity case") {
  Matrix a(2, 1), b(2, 1);
  a << 1, 2;
  b << 3, 4;
  const Matrix kr = khatri_rao_cols(a, b);
  REQUIRE(kr.rows() == 4);
  CHECK(kr(0, 0) == 3);
  CHECK(kr(1, 0) == 4);
  CHECK(kr(2, 0) == 6);
  CHECK(kr(3, 0) == 8);

  const Matrix a2 = random_matrix(3, 5, 4);
  CHECK(khatri_rao_cols(a2, Matrix::Ones(1, 5)) == a2);
  CHECK_THROWS_AS(khatri_rao_cols(a2, Matrix::Ones(2, 4)), DimensionError);
}

TEST_CASE("khatri_rao_cols matches a nested loop and the Gramian identity") {
  const Matrix a = random_matrix(3, 4, 5);
  const Matrix b = random_matrix(2, 4, 6);
  const Matrix kr = khatri_rao_cols(a, b);
  for (Eigen::Index j = 0; j < 4; ++j) {
    for (Eigen::Index i = 0; i < 3; ++i) {
      for (Eigen::Index k = 0; k < 2; ++k) CHECK(kr(i * 2 + k, j) == a(i, j) * b(k, j));
    }
  }
  const Matrix lhs = kr.transpose() * kr;
  const Matrix rhs = (a.transpose() * a).cwiseProduct(b.transpose() * b);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("nystrom with every landmark is exact") {
  const Matrix p = random_matrix(30, 2, 7);
  const GramMatrix k = gram(p, p, KernelSpec({1.0, 1.0}));
  const NystromFactors f = nystrom(k, 30, 11);
  CHECK(f.landmarks.size() == 30);
  CHECK((f.v.array() > 0.0).all());
  const double n2 = 30.0 * 30.0;
  CHECK((k - n2 * f.reconstruct()).norm() <= 1e-6);
}

TEST_CASE("nystrom of a rank-one matrix with one landmark") {
  const Vector v = random_vector(8, 8).cwiseAbs() + Vector::Constant(8, 0.1);
  const Matrix k = v * v.transpose();
  const NystromFactors f = nystrom(k, 1, 3);
  CHECK((k - 64.0 * f.reconstruct()).norm() <= 1e-10 * k.norm());
}

TEST_CASE("nystrom approximation quality and monotonicity on an RBF Gram") {
  const Matrix p = random_matrix(200, 1, 9);
  const GramMatrix k = gram(p, p, KernelSpec({1.0}));
  const Matrix target = k / (200.0 * 200.0);
  auto err = [&](Eigen::Index m, std::uint64_t seed) {
    return (target - nystrom(k, m, seed).reconstruct()).norm() / target.norm();
  };
  CHECK(err(50, 1) < 1e-2);

  double previous = INFINITY;
  for (Eigen::Index m : {10, 25, 50, 100}) {
    double avg = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s) avg += err(m, s) / 5.0;
    CHECK(avg <= previous);
    previous = avg;
  }
}

TEST_CASE("nystrom argument checks") {
  const Matrix k = Matrix::Identity(4, 4);
  CHECK_THROWS_AS(nystrom(k, 0, 1), InvalidArgument);
  CHECK_THROWS_AS(nystrom(k, 5, 1), InvalidArgument);
  CHECK_THROWS_AS(nystrom(Matrix::Zero(4, 4), 2, 1), NumericalError);
  CHECK(nystrom(k, 2, 5).landmarks == nystrom(k, 2, 5).landmarks);
}

TEST_CASE("woodbury apply: trivial cases") {
  const Matrix p = random_matrix(10, 1, 12);
  const GramMatrix k = gram(p, p, KernelSpec({1.0}));
  const NystromFactors f = nystrom(k, 10, 1);
  const Vector rhs = random_vector(10, 13);
  const Vector got = woodbury_regularized_inverse_apply(Matrix::Zero(10, 10), f, 1.0, rhs);
  CHECK(rel_err(got, f.reconstruct() * rhs) < 1e-12);
  CHECK(woodbury_regularized_inverse_apply(k, f, 0.5, Vector::Zero(10)).norm() == 0.0);
  CHECK_THROWS_AS(woodbury_regularized_inverse_apply(k, f, 0.0, rhs), InvalidArgument);
  CHECK_THROWS_AS(woodbury_regularized_inverse_apply(k, f, 1.0, Vector::Ones(3)), DimensionError);
}

TEST_CASE("woodbury apply equals (W L + lambda I)^-1 W rhs") {
  const Matrix p = random_matrix(10, 2, 14);
  const Matrix q = random_matrix(10, 2, 15);
  const GramMatrix l = gram(p, p, KernelSpec({1.0, 1.5}));
  const GramMatrix k = gram(q, q, KernelSpec({0.8, 1.2}));
  const Vector y = random_vector(10, 16);
  const double lambda = 1e-3;
  const NystromFactors f = nystrom(k, 10, 2);
  const Matrix w = k / 100.0;
  const Vector oracle = (w * l + lambda * Matrix::Identity(10, 10)).fullPivLu().solve(w * y);
  CHECK(rel_err(woodbury_regularized_inverse_apply(l, f, lambda, y), oracle) < 1e-6);
}

TEST_CASE("log_grid") {
  const auto g = log_grid(1e-3, 1e1, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == doctest::Approx(1e-3));
  CHECK(g[1] == doctest::Approx(1e-2));
  CHECK(g.back() == doctest::Approx(1e1));
  CHECK(log_grid(2.0, 2.0, 1).front() == 2.0);
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 3), InvalidArgument);
  CHECK_THROWS_AS(log_grid(1.0, 2.0, 0), InvalidArgument);
}

#include "proxi/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "proxi/errors.hpp"

namespace proxi {

namespace {

void require_square(const Matrix& m, const char* who) {
  if (m.rows() != m.cols()) {
    std::ostringstream msg;
    msg << who << ": matrix must be square, got " << m.rows() << "x" << m.cols();
    throw DimensionError(msg.str());
  }
}

}  // namespace

Eigen::LLT<Matrix> cholesky_psd(const Matrix& m, double ridge) {
  require_square(m, "cholesky_psd");
  if (!(ridge > 0.0) || !std::isfinite(ridge)) {
    throw InvalidArgument("cholesky_psd: ridge must be positive and finite");
  }
  Matrix shifted = m;
  shifted.diagonal().array() += ridge;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() == Eigen::Success) return llt;

  shifted = m;
  shifted.diagonal().array() += ridge * (1.0 + 1e-8) + 1e-10;
  llt.compute(shifted);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Cholesky factorization failed after jitter retry; input is indefinite");
  }
  return llt;
}

Matrix solve_psd(const Matrix& m, double ridge, const Matrix& rhs) {
  if (rhs.rows() != m.rows()) {
    throw DimensionError("solve_psd: right-hand side row count does not match the system");
  }
  Matrix out = cholesky_psd(m, ridge).solve(rhs);
  if (!out.allFinite()) throw NumericalError("solve_psd produced non-finite values");
  return out;
}

Vector solve_psd(const Matrix& m, double ridge, const Vector& rhs) {
  return solve_psd(m, ridge, Matrix(rhs)).col(0);
}

Matrix khatri_rao_cols(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << "khatri_rao_cols: column counts " << a.cols() << " and " << b.cols() << " differ";
    throw DimensionError(msg.str());
  }
  const Eigen::Index p = a.rows();
  const Eigen::Index q = b.rows();
  Matrix out(p * q, a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < p; ++i) {
      out.col(j).segment(i * q, q) = a(i, j) * b.col(j);
    }
  }
  return out;
}

Matrix NystromFactors::reconstruct() const { return u * v.asDiagonal() * u.transpose(); }

NystromFactors nystrom(const Matrix& k, Eigen::Index rank, std::uint64_t landmark_seed) {
  require_square(k, "nystrom");
  const Eigen::Index n = k.rows();
  if (rank < 1 || rank > n) {
    std::ostringstream msg;
    msg << "nystrom: rank must lie in [1, " << n << "], got " << rank;
    throw InvalidArgument(msg.str());
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(landmark_seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Eigen::Index> landmarks(order.begin(), order.begin() + rank);
  std::sort(landmarks.begin(), landmarks.end());

  Matrix k_ns(n, rank);
  Matrix c(rank, rank);
  for (Eigen::Index j = 0; j < rank; ++j) {
    k_ns.col(j) = k.col(landmarks[static_cast<std::size_t>(j)]);
  }
  for (Eigen::Index i = 0; i < rank; ++i) {
    c.row(i) = k_ns.row(landmarks[static_cast<std::size_t>(i)]);
  }
  c = 0.5 * (c + c.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(c);
  if (eig.info() != Eigen::Success) throw NumericalError("nystrom: landmark eigensolver failed");

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < rank; ++i) {
    if (eig.eigenvalues()(i) > kNystromEigenFloor) keep.push_back(i);
  }
  if (keep.empty()) throw NumericalError("nystrom: every landmark eigenvalue is below the floor");

  const auto r = static_cast<Eigen::Index>(keep.size());
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(rank);
  NystromFactors out;
  out.landmarks = std::move(landmarks);
  out.u.resize(n, r);
  out.v.resize(r);
  // Approximate eigenpairs of K: u = sqrt(M/n) K_nS q / s, eigenvalue (n/M) s.
  for (Eigen::Index t = 0; t < r; ++t) {
    const Eigen::Index i = keep[static_cast<std::size_t>(t)];
    const double s = eig.eigenvalues()(i);
    out.u.col(t) = std::sqrt(md / nd) / s * (k_ns * eig.eigenvectors().col(i));
    out.v(t) = (nd / md) * s / (nd * nd);
  }
  return out;
}

Vector woodbury_regularized_inverse_apply(const Matrix& l, const NystromFactors& factors,
                                          double lambda, const Vector& rhs) {
  const Eigen::Index n = factors.u.rows();
  if (l.rows() != n || l.cols() != n || rhs.size() != n) {
    throw DimensionError("woodbury_regularized_inverse_apply: inconsistent shapes");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("woodbury_regularized_inverse_apply: lambda must be positive");
  }
  const Matrix us = factors.u * factors.v.cwiseSqrt().asDiagonal();
  const Vector t = us * (us.transpose() * rhs);
  Matrix inner = us.transpose() * l * us / lambda;
  inner = 0.5 * (inner + inner.transpose()).eval();
  inner.diagonal().array() += 1.0;
  Eigen::LLT<Matrix> llt(inner);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("woodbury_regularized_inverse_apply: singular inner system");
  }
  const Vector correction = us * llt.solve(us.transpose() * (l * t)) / lambda;
  Vector out = (t - correction) / lambda;
  if (!out.allFinite()) throw NumericalError("woodbury_regularized_inverse_apply: non-finite result");
  return out;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (count < 1 || !(lo > 0.0) || !(hi >= lo)) {
    throw InvalidArgument("log_grid: need count >= 1 and 0 < lo <= hi");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
  }
  out.back() = hi;
  return out;
}

}  // namespace proxi

#pragma once

#include <cstdint>
#include <vector>

#include "proxi/kernels.hpp"

namespace proxi {

/// Solves (m + ridge * I) x = rhs by Cholesky.
///
/// If the factorization fails, it is retried once with ridge * (1 + 1e-8) + 1e-10;
/// a second failure throws NumericalError. `m` must be square and symmetric.
Matrix solve_psd(const Matrix& m, double ridge, const Matrix& rhs);
Vector solve_psd(const Matrix& m, double ridge, const Vector& rhs);

/// Cholesky factor of (m + ridge * I) with the same retry rule as solve_psd.
Eigen::LLT<Matrix> cholesky_psd(const Matrix& m, double ridge);

/// Column-wise Kronecker (Khatri-Rao) product of a (p x m) and b (q x m).
///
/// Column j of the result is kron(a.col(j), b.col(j)); row index i * q + k
/// holds a(i, j) * b(k, j), i.e. the a-index is the outer one.
Matrix khatri_rao_cols(const Matrix& a, const Matrix& b);

/// Low-rank factors of K / n^2 ~= U diag(V) U^T from a Nystrom approximation.
struct NystromFactors {
  Matrix u;                                 // n x r
  Vector v;                                 // r, strictly positive
  std::vector<Eigen::Index> landmarks;      // M sampled column indices

  Eigen::Index rank() const noexcept { return v.size(); }
  /// Dense U diag(V) U^T.
  Matrix reconstruct() const;
};

inline constexpr double kNystromEigenFloor = 1e-12;

/// Nystrom factorization of K / n^2 using `rank` landmarks drawn uniformly
/// without replacement. Landmark eigenvalues below kNystromEigenFloor are
/// dropped; if none survive NumericalError is thrown.
NystromFactors nystrom(const Matrix& k, Eigen::Index rank, std::uint64_t landmark_seed);

/// Evaluates
///
///   lambda^-1 [I - U (lambda^-1 U^T L U + V^-1)^-1 U^T lambda^-1 L] U V U^T rhs,
///
/// which equals (W L + lambda I)^-1 W rhs for W = U V U^T. The inner system is
/// solved in the symmetrically scaled form V^1/2 (lambda^-1 V^1/2 U^T L U V^1/2 + I)^-1 V^1/2.
Vector woodbury_regularized_inverse_apply(const Matrix& l, const NystromFactors& factors,
                                          double lambda, const Vector& rhs);

/// Inclusive log-spaced grid of `count` points between lo and hi.
std::vector<double> log_grid(double lo, double hi, int count);

}  // namespace proxi

#pragma once

#include <Eigen/Dense>
#include <vector>

namespace proxi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Gram matrices are plain dense matrices; the name documents intent.
using GramMatrix = Eigen::MatrixXd;

/// Per-coordinate bandwidths of a Gaussian product kernel
///
///   k(a, b) = prod_d exp(-(a_d - b_d)^2 / (2 sigma_d^2)).
///
/// An empty spec is valid and describes the kernel over a zero-column
/// variable group, whose Gram matrix is all ones.
class KernelSpec {
 public:
  KernelSpec() = default;
  /// Throws InvalidArgument unless every bandwidth is finite and > 0.
  explicit KernelSpec(std::vector<double> bandwidths);

  const std::vector<double>& bandwidths() const noexcept { return bandwidths_; }
  Eigen::Index dims() const noexcept { return static_cast<Eigen::Index>(bandwidths_.size()); }
  double operator[](std::size_t d) const { return bandwidths_[d]; }

  /// Spec over the column concatenation [this | other].
  KernelSpec concat(const KernelSpec& other) const;

  bool operator==(const KernelSpec&) const = default;

 private:
  std::vector<double> bandwidths_;
};

/// Gram matrix between the rows of `a` (n x d) and the rows of `b` (m x d).
GramMatrix gram(const Matrix& a, const Matrix& b, const KernelSpec& spec);

/// Kernel evaluations k(a_i, q) for every row a_i; `query` has spec.dims() entries.
Vector kernel_column(const Matrix& a, const RowVector& query, const KernelSpec& spec);

/// Elementwise product. Throws DimensionError on shape mismatch.
GramMatrix hadamard(const GramMatrix& g1, const GramMatrix& g2);

/// Per-dimension median of |x_id - x_jd| over all pairs i < j.
///
/// A dimension whose median is zero falls back to the median over all
/// dimensions' pairwise differences, and to 1.0 if that is also zero.
/// Inputs with more than `kMedianMaxPoints` rows use their first
/// `kMedianMaxPoints` rows.
KernelSpec median_heuristic(const Matrix& points);

inline constexpr Eigen::Index kMedianMaxPoints = 3000;

}  // namespace proxi

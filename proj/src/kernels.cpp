#include "proxi/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "proxi/errors.hpp"

namespace proxi {

KernelSpec::KernelSpec(std::vector<double> bandwidths) : bandwidths_(std::move(bandwidths)) {
  for (std::size_t d = 0; d < bandwidths_.size(); ++d) {
    const double s = bandwidths_[d];
    if (!std::isfinite(s) || s <= 0.0) {
      std::ostringstream msg;
      msg << "bandwidth " << d << " must be finite and positive, got " << s;
      throw InvalidArgument(msg.str());
    }
  }
}

KernelSpec KernelSpec::concat(const KernelSpec& other) const {
  std::vector<double> joined = bandwidths_;
  joined.insert(joined.end(), other.bandwidths_.begin(), other.bandwidths_.end());
  return KernelSpec(std::move(joined));
}

GramMatrix gram(const Matrix& a, const Matrix& b, const KernelSpec& spec) {
  if (a.cols() != spec.dims() || b.cols() != spec.dims()) {
    std::ostringstream msg;
    msg << "gram: point dimensions (" << a.cols() << ", " << b.cols()
        << ") do not match the " << spec.dims() << " bandwidths";
    throw DimensionError(msg.str());
  }
  // Accumulate the exponent, then exponentiate once.
  Matrix expo = Matrix::Zero(a.rows(), b.rows());
  for (Eigen::Index d = 0; d < spec.dims(); ++d) {
    const double inv = 1.0 / (2.0 * spec[d] * spec[d]);
    const auto ad = a.col(d);
    const auto bd = b.col(d);
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      expo.col(j).array() -= (ad.array() - bd(j)).square() * inv;
    }
  }
  return expo.array().exp().matrix();
}

Vector kernel_column(const Matrix& a, const RowVector& query, const KernelSpec& spec) {
  if (query.size() != spec.dims()) {
    throw DimensionError("kernel_column: query dimension does not match the spec");
  }
  return gram(a, Matrix(query), spec).col(0);
}

GramMatrix hadamard(const GramMatrix& g1, const GramMatrix& g2) {
  if (g1.rows() != g2.rows() || g1.cols() != g2.cols()) {
    std::ostringstream msg;
    msg << "hadamard: shapes " << g1.rows() << "x" << g1.cols() << " and " << g2.rows() << "x"
        << g2.cols() << " differ";
    throw DimensionError(msg.str());
  }
  return g1.cwiseProduct(g2);
}

namespace {

double median_inplace(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

KernelSpec median_heuristic(const Matrix& points) {
  if (points.rows() < 2) {
    throw InvalidArgument("median_heuristic needs at least 2 points");
  }
  const Eigen::Index n = std::min(points.rows(), kMedianMaxPoints);
  const Eigen::Index dims = points.cols();
  const std::size_t pairs = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;

  std::vector<double> medians(static_cast<std::size_t>(dims));
  std::vector<double> diffs;
  diffs.reserve(pairs);
  bool any_zero = false;
  for (Eigen::Index d = 0; d < dims; ++d) {
    diffs.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        diffs.push_back(std::abs(points(i, d) - points(j, d)));
      }
    }
    medians[static_cast<std::size_t>(d)] = median_inplace(diffs);
    any_zero = any_zero || !(medians[static_cast<std::size_t>(d)] > 0.0);
  }

  if (any_zero) {
    // Pooled median over every dimension's pairwise differences.
    std::vector<double> pooled;
    pooled.reserve(pairs * static_cast<std::size_t>(dims));
    for (Eigen::Index d = 0; d < dims; ++d) {
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
          pooled.push_back(std::abs(points(i, d) - points(j, d)));
        }
      }
    }
    double global = median_inplace(pooled);
    if (!(global > 0.0) || !std::isfinite(global)) global = 1.0;
    for (double& m : medians) {
      if (!(m > 0.0)) m = global;
    }
  }
  return KernelSpec(std::move(medians));
}

}  // namespace proxi

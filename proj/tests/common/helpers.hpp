#pragma once

#include <cstdint>
#include <random>

#include "proxi/dataset.hpp"

namespace testing {

using proxi::Matrix;
using proxi::Vector;

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                            double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  }
  return m;
}

inline Vector random_vector(Eigen::Index n, std::uint64_t seed, double scale = 1.0) {
  return random_matrix(n, 1, seed, scale).col(0);
}

/// Symmetric PSD matrix B B^T of the given size.
inline Matrix random_psd(Eigen::Index n, std::uint64_t seed) {
  const Matrix b = random_matrix(n, n, seed);
  return b * b.transpose();
}

/// Small dataset with scalar A, empty or scalar X, two-column Z and W.
inline proxi::Dataset random_dataset(Eigen::Index n, std::uint64_t seed, Eigen::Index dx = 0) {
  proxi::Dataset d;
  d.a = random_matrix(n, 1, seed);
  d.x = random_matrix(n, dx, seed + 1);
  d.z = random_matrix(n, 2, seed + 2);
  d.w = random_matrix(n, 2, seed + 3);
  d.y = random_vector(n, seed + 4);
  return d;
}

inline double rel_err(const Matrix& got, const Matrix& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-300);
}

}  // namespace testing

#pragma once

#include <optional>

#include "proxi/kernels.hpp"

namespace proxi {

/// Treatment grid with the estimated interventional mean E[Y | do(A = a)]
/// and, when known, the ground truth.
struct DoCurve {
  Vector grid;
  Vector estimate;
  std::optional<Vector> truth;

  Eigen::Index size() const noexcept { return grid.size(); }
  /// Equal lengths and finite values; throws DimensionError / NumericalError.
  void validate() const;
};

/// Equispaced grid of `count` points on [lo, hi].
Vector linspace(double lo, double hi, Eigen::Index count);

}  // namespace proxi

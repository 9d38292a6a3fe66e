#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "proxi/kernels.hpp"

namespace proxi {

/// A tabular sample of treatment A, covariates X, treatment-side proxy Z,
/// outcome-side proxy W and outcome Y. Every block has one row per sample;
/// X commonly has zero columns.
struct Dataset {
  Matrix a;
  Matrix x;
  Matrix z;
  Matrix w;
  Vector y;

  Eigen::Index rows() const noexcept { return y.size(); }
  /// Throws DimensionError if the blocks disagree on the row count.
  void validate() const;
  Dataset subset(const std::vector<Eigen::Index>& idx) const;
  Dataset head(Eigen::Index count) const;

  /// [A | X | Z], [A | W | X] and friends used by the joint kernels.
  Matrix axz() const;
  Matrix awx() const;
  Matrix azx() const;
};

/// Deterministic shuffle of the rows 0..n-1.
std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, std::uint64_t seed);

/// Splits `data` into two halves (first gets floor(n/2) rows) after a seeded shuffle.
std::pair<Dataset, Dataset> split_half(const Dataset& data, std::uint64_t seed);

/// Column-wise concatenation of blocks with matching row counts.
Matrix hstack(std::initializer_list<const Matrix*> blocks);

/// Bandwidths for each variable group; the joint kernels multiply them.
struct KernelSet {
  KernelSpec a;
  KernelSpec x;
  KernelSpec z;
  KernelSpec w;

  /// Median heuristic per group (empty X gives an empty spec).
  static KernelSet median(const Dataset& data);

  KernelSpec axz() const { return a.concat(x).concat(z); }
  KernelSpec awx() const { return a.concat(w).concat(x); }
  KernelSpec azx() const { return a.concat(z).concat(x); }
  KernelSpec ax() const { return a.concat(x); }

  bool operator==(const KernelSet&) const = default;
};

}  // namespace proxi

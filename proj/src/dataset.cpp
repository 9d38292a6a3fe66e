#include "proxi/dataset.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "proxi/docurve.hpp"
#include "proxi/errors.hpp"

namespace proxi {

void Dataset::validate() const {
  const Eigen::Index n = y.size();
  const auto check = [n](const Matrix& m, const char* name) {
    if (m.rows() != n) {
      std::ostringstream msg;
      msg << "dataset block " << name << " has " << m.rows() << " rows, expected " << n;
      throw DimensionError(msg.str());
    }
  };
  check(a, "A");
  check(x, "X");
  check(z, "Z");
  check(w, "W");
}

namespace {

Matrix take_rows(const Matrix& m, const std::vector<Eigen::Index>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(idx[r]);
  return out;
}

}  // namespace

Dataset Dataset::subset(const std::vector<Eigen::Index>& idx) const {
  Dataset out;
  out.a = take_rows(a, idx);
  out.x = take_rows(x, idx);
  out.z = take_rows(z, idx);
  out.w = take_rows(w, idx);
  out.y.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) out.y(static_cast<Eigen::Index>(r)) = y(idx[r]);
  return out;
}

Dataset Dataset::head(Eigen::Index count) const {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(std::min(count, rows())));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  return subset(idx);
}

Matrix hstack(std::initializer_list<const Matrix*> blocks) {
  Eigen::Index rows = -1;
  Eigen::Index cols = 0;
  for (const Matrix* b : blocks) {
    if (rows >= 0 && b->rows() != rows) throw DimensionError("hstack: row counts differ");
    rows = b->rows();
    cols += b->cols();
  }
  Matrix out(std::max<Eigen::Index>(rows, 0), cols);
  Eigen::Index c = 0;
  for (const Matrix* b : blocks) {
    out.middleCols(c, b->cols()) = *b;
    c += b->cols();
  }
  return out;
}

Matrix Dataset::axz() const { return hstack({&a, &x, &z}); }
Matrix Dataset::awx() const { return hstack({&a, &w, &x}); }
Matrix Dataset::azx() const { return hstack({&a, &z, &x}); }

std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, std::uint64_t seed) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

std::pair<Dataset, Dataset> split_half(const Dataset& data, std::uint64_t seed) {
  const auto idx = shuffled_indices(data.rows(), seed);
  const auto half = static_cast<std::ptrdiff_t>(data.rows() / 2);
  std::vector<Eigen::Index> first(idx.begin(), idx.begin() + half);
  std::vector<Eigen::Index> second(idx.begin() + half, idx.end());
  return {data.subset(first), data.subset(second)};
}

KernelSet KernelSet::median(const Dataset& data) {
  const auto spec_for = [&](const Matrix& m) {
    if (m.cols() == 0) return KernelSpec{};
    if (m.rows() < 2) return KernelSpec(std::vector<double>(static_cast<std::size_t>(m.cols()), 1.0));
    return median_heuristic(m);
  };
  return KernelSet{spec_for(data.a), spec_for(data.x), spec_for(data.z), spec_for(data.w)};
}

void DoCurve::validate() const {
  if (estimate.size() != grid.size() || (truth && truth->size() != grid.size())) {
    throw DimensionError("DoCurve: grid, estimate and truth lengths differ");
  }
  if (!grid.allFinite() || !estimate.allFinite() || (truth && !truth->allFinite())) {
    throw NumericalError("DoCurve contains non-finite values");
  }
}

Vector linspace(double lo, double hi, Eigen::Index count) {
  if (count == 1) return Vector::Constant(1, lo);
  return Vector::LinSpaced(count, lo, hi);
}

}  // namespace proxi

#pragma once

#include <cstdint>
#include <vector>

#include "proxi/dataset.hpp"
#include "proxi/docurve.hpp"

namespace proxi::pmmr {

/// h(a, w, x) = sum_i alpha_i l((a_i, w_i, x_i), (a, w, x)).
///
/// `l` is the Gaussian product kernel over (A, W, X) and `k` the one over
/// (A, Z, X); both come from the same per-group bandwidths in `specs`.
struct PmmrModel {
  Matrix awx;  // n x (da + dw + dx), training points of the h-side kernel
  Vector alpha;
  double lambda = 0.0;
  KernelSet specs;

  Eigen::Index size() const noexcept { return alpha.size(); }
};

/// V-statistic (1/n^2) r^T K r for residuals r and instrument-side Gram K.
double vstat_risk(const Vector& residuals, const GramMatrix& k);

/// Regularized objective (1/n^2)(y - L alpha)^T K (y - L alpha) + lambda alpha^T L alpha.
double objective(const GramMatrix& l, const GramMatrix& k, const Vector& y, const Vector& alpha,
                 double lambda);

/// Exact closed form alpha = (L W L + lambda L)^-1 L W y with W = K / n^2.
///
/// L is jittered by 1e-8 * tr(L) / n before the solve, which is carried out
/// through the Cholesky factor R of L: alpha = R^-T (R^T W R + lambda I)^-1 R^T W y.
PmmrModel pmmr_fit(const Dataset& data, const KernelSet& specs, double lambda);

/// Nystrom-accelerated fit: K / n^2 is replaced by a rank-`rank` factorization
/// and the coefficients follow from the Woodbury form.
PmmrModel pmmr_fit_nystrom(const Dataset& data, const KernelSet& specs, double lambda,
                           Eigen::Index rank, std::uint64_t seed);

double pmmr_h(const PmmrModel& model, const RowVector& a, const RowVector& w, const RowVector& x);

/// h at every row of the query blocks.
Vector pmmr_predict(const PmmrModel& model, const Matrix& a, const Matrix& w, const Matrix& x);

/// beta(a) = (1/nt) sum_k h(a, w_k, x_k).
DoCurve pmmr_ate(const PmmrModel& model, const Vector& a_grid, const Matrix& adjust_x,
                 const Matrix& adjust_w);

struct LambdaSelection {
  double lambda = 0.0;
  std::vector<double> scores;  // validation V-statistic per grid point; NaN if the fit failed
};

/// Fits on `train` for every grid value and scores the validation residuals by
/// vstat_risk with the validation-side K. Ties go to the larger lambda.
LambdaSelection pmmr_select_lambda(const Dataset& train, const Dataset& validate,
                                   const KernelSet& specs, const std::vector<double>& lambda_grid);

/// 50 values lambda = 1 / (b n)^2 with b n log-spaced on [2, 450].
std::vector<double> default_lambda_grid();

}  // namespace proxi::pmmr

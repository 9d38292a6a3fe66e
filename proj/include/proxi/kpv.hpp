#pragma once

#include <vector>

#include "proxi/dataset.hpp"
#include "proxi/docurve.hpp"

namespace proxi::kpv {

/// Stage 1: kernel ridge regression of phi(W) on phi(A) x phi(X) x phi(Z).
///
/// Holds the sample-1 points and the Cholesky factor of
/// K_AXZ + m1 * lambda1 * I, so that the embedding coefficients
///
///   Gamma(a, x, z) = (K_AXZ + m1 lambda1 I)^-1 K_axz
///
/// can be evaluated at any query. The conditional mean embedding of W is
/// sum_i Gamma_i(a, x, z) phi(w_i).
class Stage1Fit {
 public:
  Stage1Fit(Dataset sample, KernelSet specs, double lambda1);

  /// Gamma for every row of the query blocks; result is m1 x q.
  Matrix gamma(const Matrix& a, const Matrix& x, const Matrix& z) const;

  const Dataset& sample() const noexcept { return sample_; }
  const KernelSet& specs() const noexcept { return specs_; }
  double lambda1() const noexcept { return lambda1_; }
  Eigen::Index m1() const noexcept { return sample_.rows(); }
  /// K_WW over the sample-1 W points.
  const GramMatrix& k_ww() const noexcept { return k_ww_; }

 private:
  Dataset sample_;
  KernelSet specs_;
  double lambda1_;
  Eigen::LLT<Matrix> chol_;
  GramMatrix k_ww_;
};

Stage1Fit stage1_fit(const Dataset& sample1, const KernelSet& specs, double lambda1);

/// Gamma(a, x, z) for a single query point.
Vector stage1_embedding(const Stage1Fit& fit, const RowVector& a, const RowVector& x,
                        const RowVector& z);

/// Fitted bridge function
///
///   h(a, x, w) = sum_i sum_j alpha_ij k(a~_j, a) k(x~_j, x) k(w_i, w)
///
/// with i over sample-1 W points and j over sample-2 (a~, x~) points.
/// `nu` stores alpha row-major: nu[i * m2 + j] = alpha(i, j), which is the
/// column-wise vectorization of alpha^T and matches khatri_rao_cols.
struct KpvModel {
  Stage1Fit stage1;
  Matrix a2;  // m2 x da
  Matrix x2;  // m2 x dx
  Vector nu;
  double lambda2 = 0.0;

  Eigen::Index m1() const noexcept { return stage1.m1(); }
  Eigen::Index m2() const noexcept { return a2.rows(); }
  Matrix alpha() const;
};

/// Sigma_qp = (Gamma_q^T K_WW Gamma_p) * K_{a~q a~p} K_{x~q x~p}, for a
/// Gamma already evaluated at the sample-2 points (m1 x m2).
Matrix stage2_sigma(const Stage1Fit& fit, const Matrix& gamma2, const Dataset& sample2);

/// nu = (Gamma ⊗̄ I)(m2 lambda2 I + Sigma)^-1 y~, inverting only an m2 x m2 system.
KpvModel kpv_fit(const Stage1Fit& fit, const Dataset& sample2, double lambda2);

/// Builds a model from explicit coefficients (deserialization and tests).
KpvModel kpv_from_alpha(const Stage1Fit& fit, const Matrix& a2, const Matrix& x2,
                        const Matrix& alpha, double lambda2);

double kpv_h(const KpvModel& model, const RowVector& a, const RowVector& x, const RowVector& w);

/// beta(a) = (1/nt) sum_k h(a, x_k, w_k), evaluated as the vectorized triple sum.
/// Throws InvalidArgument when the adjustment sample is empty.
DoCurve kpv_ate(const KpvModel& model, const Vector& a_grid, const Matrix& adjust_x,
                const Matrix& adjust_w);

/// Leave-one-out score of a Stage-1 ridge parameter:
/// (1/m1) tr(H~^-1 H K_WW H H~^-1), H = I - K (K + m1 lambda I)^-1, H~ = diag(H).
double stage1_loo_score(const GramMatrix& k_axz, const GramMatrix& k_ww, double lambda1);

/// Leave-one-out score of a Stage-2 ridge parameter:
/// (1/m2) |H~^-1 H y|^2, H = I - Sigma (m2 lambda I + Sigma)^-1.
double stage2_loo_score(const Matrix& sigma, const Vector& y, double lambda2);

struct LambdaSelection {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::vector<double> stage1_scores;  // aligned with the lambda1 grid
  std::vector<double> stage2_scores;  // aligned with the lambda2 grid
};

/// Independent grid searches: lambda1 by the Stage-1 score, then lambda2 by
/// the Stage-2 score with Sigma built at the chosen lambda1. Ties go to the
/// larger lambda. Throws NumericalError if a whole grid scores non-finite.
LambdaSelection kpv_select_lambdas(const Dataset& sample1, const Dataset& sample2,
                                   const KernelSet& specs, const std::vector<double>& lambda1_grid,
                                   const std::vector<double>& lambda2_grid);

std::vector<double> default_lambda1_grid();
std::vector<double> default_lambda2_grid();

}  // namespace proxi::kpv

#pragma once

#include <vector>

#include "proxi/dataset.hpp"
#include "proxi/docurve.hpp"

namespace proxi::baselines {

/// Kernel ridge regression with coefficients (K + n lambda I)^-1 y.
struct RidgeModel {
  Matrix inputs;
  Vector coef;
  KernelSpec spec;
  double lambda = 0.0;
};

RidgeModel kernel_ridge_fit(const Matrix& inputs, const Vector& y, const KernelSpec& spec,
                            double lambda);
double predict(const RidgeModel& model, const RowVector& query);
Vector predict_batch(const RidgeModel& model, const Matrix& queries);

/// Closed-form leave-one-out mean squared error of a ridge parameter.
double ridge_loo_score(const GramMatrix& k, const Vector& y, double lambda);

/// Argmin of ridge_loo_score over the grid, ties toward the larger lambda.
double ridge_select_lambda(const Matrix& inputs, const Vector& y, const KernelSpec& spec,
                           const std::vector<double>& grid);

std::vector<double> default_lambda_grid();

/// Averages the prediction at (a, c_k) over the adjustment rows c_k, for a model
/// whose inputs are laid out as [A | adjustment columns]. An adjustment matrix
/// with zero columns gives the unadjusted regression curve E[Y | A = a].
DoCurve adjusted_ate(const RidgeModel& model, const Vector& a_grid, const Matrix& adjustment);

/// Coefficients of the linear two-stage fit.
struct LinearTwoStage {
  Vector stage1_intercepts;  // one per W column
  Matrix stage1_coef;        // rows: A, Z, X regressors; columns: W
  double intercept = 0.0;
  Vector coef_a;             // one per A column (A is scalar in practice)
  Vector coef_w;
  Vector coef_x;
  Vector w_mean;
  Vector x_mean;
};

/// Stage 1 regresses each W column on (1, A, Z, X) by least squares; Stage 2
/// regresses Y on (1, A, W-hat, X). Throws NumericalError on rank deficiency
/// and InvalidArgument unless n exceeds the regressor count.
LinearTwoStage linear_two_stage_fit(const Dataset& data);

/// beta(a) = intercept + coef_A a + coef_W . mean(W) + coef_X . mean(X); requires scalar A.
DoCurve linear_two_stage(const Dataset& data, const Vector& a_grid);

}  // namespace proxi::baselines

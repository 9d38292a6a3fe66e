#include "proxi/baselines.hpp"

#include <cmath>
#include <string>

#include "proxi/errors.hpp"
#include "proxi/numerics.hpp"
#include "selection.hpp"

namespace proxi::baselines {

namespace {

void check_lambda(double lambda, const char* who) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument(std::string(who) + ": lambda must be positive and finite");
  }
}

Matrix least_squares(const Matrix& design, const Matrix& rhs, const char* stage) {
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < design.cols()) {
    throw NumericalError(std::string("linear_two_stage: rank-deficient design in ") + stage);
  }
  return qr.solve(rhs);
}

}  // namespace

RidgeModel kernel_ridge_fit(const Matrix& inputs, const Vector& y, const KernelSpec& spec,
                            double lambda) {
  check_lambda(lambda, "kernel_ridge_fit");
  if (inputs.rows() != y.size()) throw DimensionError("kernel_ridge_fit: inputs and y differ in rows");
  if (y.size() < 1) throw InvalidArgument("kernel_ridge_fit: need at least one sample");
  const auto n = static_cast<double>(y.size());
  Vector coef = solve_psd(gram(inputs, inputs, spec), n * lambda, y);
  if (!coef.allFinite()) throw NumericalError("kernel_ridge_fit produced non-finite coefficients");
  return RidgeModel{inputs, std::move(coef), spec, lambda};
}

double predict(const RidgeModel& model, const RowVector& query) {
  return kernel_column(model.inputs, query, model.spec).dot(model.coef);
}

Vector predict_batch(const RidgeModel& model, const Matrix& queries) {
  return gram(queries, model.inputs, model.spec) * model.coef;
}

namespace {

// LOO residuals of the smoother H = K (K + c I)^-1 from an eigendecomposition of K.
double loo_from_eigen(const Eigen::SelfAdjointEigenSolver<Matrix>& es, const Vector& y, double c) {
  const Vector s = es.eigenvalues().cwiseMax(0.0);
  const Matrix& q = es.eigenvectors();
  const Vector shrink = (c / (s.array() + c)).matrix();
  // I - H = Q diag(c / (s + c)) Q^T
  const Vector resid = q * shrink.cwiseProduct(q.transpose() * y);
  const Vector diag = (q.array().square().matrix() * shrink);
  return (resid.array() / diag.array()).square().mean();
}

}  // namespace

double ridge_loo_score(const GramMatrix& k, const Vector& y, double lambda) {
  check_lambda(lambda, "ridge_loo_score");
  if (k.rows() != y.size() || k.cols() != y.size()) {
    throw DimensionError("ridge_loo_score: K must be n x n");
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> es(k);
  if (es.info() != Eigen::Success) throw NumericalError("ridge_loo_score: eigendecomposition failed");
  return loo_from_eigen(es, y, static_cast<double>(y.size()) * lambda);
}

double ridge_select_lambda(const Matrix& inputs, const Vector& y, const KernelSpec& spec,
                           const std::vector<double>& grid) {
  detail::require_grid(grid, "ridge_select_lambda");
  if (inputs.rows() != y.size()) throw DimensionError("ridge_select_lambda: inputs and y differ in rows");
  const Eigen::SelfAdjointEigenSolver<Matrix> es(gram(inputs, inputs, spec));
  if (es.info() != Eigen::Success) {
    throw NumericalError("ridge_select_lambda: eigendecomposition failed");
  }
  const auto n = static_cast<double>(y.size());
  std::vector<double> scores(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) scores[i] = loo_from_eigen(es, y, n * grid[i]);
  return grid[detail::argmin_prefer_larger(grid, scores, "ridge_select_lambda")];
}

std::vector<double> default_lambda_grid() { return log_grid(1e-6, 1.0, 25); }

DoCurve adjusted_ate(const RidgeModel& model, const Vector& a_grid, const Matrix& adjustment) {
  const Eigen::Index nt = adjustment.rows();
  if (nt < 1) throw InvalidArgument("adjusted_ate: empty adjustment sample");
  const Eigen::Index dc = adjustment.cols();
  const Eigen::Index da = model.spec.dims() - dc;
  if (da != 1) throw DimensionError("adjusted_ate: model inputs must be [scalar A | adjustment]");

  // The product kernel splits into the A factor and the adjustment factor.
  std::vector<double> a_bw(model.spec.bandwidths().begin(), model.spec.bandwidths().begin() + 1);
  std::vector<double> c_bw(model.spec.bandwidths().begin() + 1, model.spec.bandwidths().end());
  const KernelSpec a_spec(a_bw);
  const KernelSpec c_spec(c_bw);
  const Matrix train_a = model.inputs.leftCols(1);
  const Matrix train_c = model.inputs.rightCols(dc);
  const Vector weights =
      model.coef.cwiseProduct(gram(train_c, adjustment, c_spec).rowwise().sum()) /
      static_cast<double>(nt);

  DoCurve curve;
  curve.grid = a_grid;
  const Matrix grid_pts = Eigen::Map<const Matrix>(a_grid.data(), a_grid.size(), 1);
  curve.estimate = gram(grid_pts, train_a, a_spec) * weights;
  return curve;
}

LinearTwoStage linear_two_stage_fit(const Dataset& data) {
  data.validate();
  const Eigen::Index n = data.rows();
  const Matrix ones = Matrix::Ones(n, 1);
  const Matrix design1 = hstack({&ones, &data.a, &data.z, &data.x});
  const Eigen::Index p2 = 1 + data.a.cols() + data.w.cols() + data.x.cols();
  if (n <= design1.cols() || n <= p2) {
    throw InvalidArgument("linear_two_stage: n must exceed the number of regressors");
  }
  const Matrix b1 = least_squares(design1, data.w, "stage 1");
  const Matrix w_hat = design1 * b1;
  const Matrix design2 = hstack({&ones, &data.a, &w_hat, &data.x});
  const Vector b2 = least_squares(design2, data.y, "stage 2");

  LinearTwoStage fit;
  fit.stage1_intercepts = b1.row(0).transpose();
  fit.stage1_coef = b1.bottomRows(b1.rows() - 1);
  fit.intercept = b2(0);
  const Eigen::Index da = data.a.cols();
  const Eigen::Index dw = data.w.cols();
  const Eigen::Index dx = data.x.cols();
  fit.coef_a = b2.segment(1, da);
  fit.coef_w = b2.segment(1 + da, dw);
  fit.coef_x = b2.segment(1 + da + dw, dx);
  fit.w_mean = data.w.colwise().mean().transpose();
  fit.x_mean = dx > 0 ? Vector(data.x.colwise().mean().transpose()) : Vector(0);
  return fit;
}

DoCurve linear_two_stage(const Dataset& data, const Vector& a_grid) {
  if (data.a.cols() != 1) throw DimensionError("linear_two_stage: requires scalar A");
  const LinearTwoStage fit = linear_two_stage_fit(data);
  const double offset = fit.intercept + fit.coef_w.dot(fit.w_mean) + fit.coef_x.dot(fit.x_mean);
  DoCurve curve;
  curve.grid = a_grid;
  curve.estimate = (fit.coef_a(0) * a_grid.array() + offset).matrix();
  return curve;
}

}  // namespace proxi::baselines

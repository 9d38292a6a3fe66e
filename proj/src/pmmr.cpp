#include "proxi/pmmr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "proxi/errors.hpp"
#include "proxi/numerics.hpp"
#include "selection.hpp"

namespace proxi::pmmr {

namespace {

void check_inputs(const Dataset& data, double lambda) {
  data.validate();
  if (data.rows() < 1) throw InvalidArgument("pmmr: need at least one sample");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("pmmr: lambda must be positive and finite");
  }
}

// Solver for (L_j W L_j + lambda L_j) alpha = L_j W y across many lambdas,
// with L_j = L + jitter I = R R^T and W = K / n^2.
class ExactSolver {
 public:
  ExactSolver(const GramMatrix& l, const GramMatrix& k, const Vector& y) {
    const auto n = static_cast<double>(l.rows());
    const double jitter = 1e-8 * l.trace() / n;
    const Eigen::LLT<Matrix> llt = cholesky_psd(l, jitter);
    r_ = llt.matrixL();
    const Matrix w = k / (n * n);
    const Matrix wr = w * r_.triangularView<Eigen::Lower>();
    rtwr_ = r_.transpose().triangularView<Eigen::Upper>() * wr;
    rtwr_ = 0.5 * (rtwr_ + rtwr_.transpose()).eval();
    rhs_ = wr.transpose() * y;
  }

  Vector solve(double lambda) const {
    const Vector beta = solve_psd(rtwr_, lambda, rhs_);
    Vector alpha = r_.transpose().triangularView<Eigen::Upper>().solve(beta);
    if (!alpha.allFinite()) throw NumericalError("pmmr_fit produced non-finite coefficients");
    return alpha;
  }

 private:
  Matrix r_;
  Matrix rtwr_;
  Vector rhs_;
};

}  // namespace

double vstat_risk(const Vector& residuals, const GramMatrix& k) {
  const Eigen::Index n = residuals.size();
  if (k.rows() != n || k.cols() != n) throw DimensionError("vstat_risk: K must be n x n");
  if (n == 0) return 0.0;
  const auto nd = static_cast<double>(n);
  return residuals.dot(k * residuals) / (nd * nd);
}

double objective(const GramMatrix& l, const GramMatrix& k, const Vector& y, const Vector& alpha,
                 double lambda) {
  const Vector r = y - l * alpha;
  return vstat_risk(r, k) + lambda * alpha.dot(l * alpha);
}

PmmrModel pmmr_fit(const Dataset& data, const KernelSet& specs, double lambda) {
  check_inputs(data, lambda);
  const Matrix awx = data.awx();
  const Matrix azx = data.azx();
  const GramMatrix l = gram(awx, awx, specs.awx());
  const GramMatrix k = gram(azx, azx, specs.azx());
  return PmmrModel{awx, ExactSolver(l, k, data.y).solve(lambda), lambda, specs};
}

PmmrModel pmmr_fit_nystrom(const Dataset& data, const KernelSet& specs, double lambda,
                           Eigen::Index rank, std::uint64_t seed) {
  check_inputs(data, lambda);
  const Matrix awx = data.awx();
  const Matrix azx = data.azx();
  const GramMatrix l = gram(awx, awx, specs.awx());
  const NystromFactors factors = nystrom(gram(azx, azx, specs.azx()), rank, seed);
  return PmmrModel{awx, woodbury_regularized_inverse_apply(l, factors, lambda, data.y), lambda,
                   specs};
}

double pmmr_h(const PmmrModel& model, const RowVector& a, const RowVector& w, const RowVector& x) {
  RowVector q(a.size() + w.size() + x.size());
  q << a, w, x;
  return kernel_column(model.awx, q, model.specs.awx()).dot(model.alpha);
}

Vector pmmr_predict(const PmmrModel& model, const Matrix& a, const Matrix& w, const Matrix& x) {
  const Matrix q = hstack({&a, &w, &x});
  return gram(q, model.awx, model.specs.awx()) * model.alpha;
}

DoCurve pmmr_ate(const PmmrModel& model, const Vector& a_grid, const Matrix& adjust_x,
                 const Matrix& adjust_w) {
  const Eigen::Index nt = adjust_w.rows();
  if (nt < 1) throw InvalidArgument("pmmr_ate: empty adjustment sample");
  if (adjust_x.rows() != nt) throw DimensionError("pmmr_ate: adjustment X and W row counts differ");
  const KernelSet& s = model.specs;
  const Eigen::Index da = s.a.dims();
  const Eigen::Index dw = s.w.dims();
  const Eigen::Index dx = s.x.dims();
  if (da != 1) throw DimensionError("pmmr_ate: treatment grid needs a scalar A");
  if (adjust_w.cols() != dw || adjust_x.cols() != dx) {
    throw DimensionError("pmmr_ate: adjustment columns do not match the model");
  }

  // The kernel factorizes over (A) and (W, X): average the (W, X) factor first.
  const Matrix train_a = model.awx.leftCols(da);
  const Matrix train_w = model.awx.middleCols(da, dw);
  const Matrix train_x = model.awx.rightCols(dx);
  GramMatrix k_wx = gram(train_w, adjust_w, s.w);
  k_wx.array() *= gram(train_x, adjust_x, s.x).array();
  const Vector weights = model.alpha.cwiseProduct(k_wx.rowwise().sum()) / static_cast<double>(nt);

  DoCurve curve;
  curve.grid = a_grid;
  const Matrix grid_pts = Eigen::Map<const Matrix>(a_grid.data(), a_grid.size(), 1);
  curve.estimate = gram(grid_pts, train_a, s.a) * weights;
  return curve;
}

LambdaSelection pmmr_select_lambda(const Dataset& train, const Dataset& validate,
                                   const KernelSet& specs, const std::vector<double>& lambda_grid) {
  detail::require_grid(lambda_grid, "pmmr_select_lambda");
  check_inputs(train, lambda_grid.front());
  validate.validate();
  if (validate.rows() < 1) throw InvalidArgument("pmmr_select_lambda: empty validation set");

  const Matrix awx = train.awx();
  const Matrix azx = train.azx();
  const KernelSpec l_spec = specs.awx();
  const GramMatrix l = gram(awx, awx, l_spec);
  const GramMatrix k = gram(azx, azx, specs.azx());
  const GramMatrix l_val = gram(validate.awx(), awx, l_spec);
  const Matrix val_azx = validate.azx();
  const GramMatrix k_val = gram(val_azx, val_azx, specs.azx());

  LambdaSelection out;
  out.scores.assign(lambda_grid.size(), std::numeric_limits<double>::quiet_NaN());
  std::optional<ExactSolver> solver;
  try {
    solver.emplace(l, k, train.y);
  } catch (const NumericalError&) {
    throw NumericalError("pmmr_select_lambda: every fit failed (L is not factorizable)");
  }
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    try {
      const Vector alpha = solver->solve(lambda_grid[i]);
      out.scores[i] = vstat_risk(validate.y - l_val * alpha, k_val);
    } catch (const NumericalError&) {
      // Leave NaN; argmin skips it.
    }
  }
  out.lambda = lambda_grid[detail::argmin_prefer_larger(lambda_grid, out.scores,
                                                        "pmmr_select_lambda")];
  return out;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (double bn : log_grid(2.0, 450.0, 50)) grid.push_back(1.0 / (bn * bn));
  std::sort(grid.begin(), grid.end());
  return grid;
}

}  // namespace proxi::pmmr

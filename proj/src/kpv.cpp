#include "proxi/kpv.hpp"

#include <cmath>
#include <sstream>

#include "proxi/errors.hpp"
#include "proxi/numerics.hpp"
#include "selection.hpp"

namespace proxi::kpv {

namespace {

GramMatrix k_axz(const Dataset& s1, const Matrix& a, const Matrix& x, const Matrix& z,
                 const KernelSet& specs) {
  GramMatrix k = gram(s1.a, a, specs.a);
  k.array() *= gram(s1.x, x, specs.x).array();
  k.array() *= gram(s1.z, z, specs.z).array();
  return k;
}

// Eigendecomposition shared by the ridge-path leave-one-out scores:
// H(lambda) = I - K (K + c I)^-1 = Q diag(c / (s + c)) Q^T.
class RidgePath {
 public:
  explicit RidgePath(const Matrix& k) : eig_(0.5 * (k + k.transpose())) {
    if (eig_.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    s_ = eig_.eigenvalues().cwiseMax(0.0);
  }
  Matrix residual_operator(double c) const {
    const Vector d = (c / (s_.array() + c)).matrix();
    return eig_.eigenvectors() * d.asDiagonal() * eig_.eigenvectors().transpose();
  }

 private:
  Eigen::SelfAdjointEigenSolver<Matrix> eig_;
  Vector s_;
};

double stage1_score(const RidgePath& path, const GramMatrix& k_ww, double lambda1) {
  const auto m1 = static_cast<double>(k_ww.rows());
  const Matrix h = path.residual_operator(m1 * lambda1);
  const Matrix hk = h * k_ww;
  // (H K_WW H)_ii with H symmetric.
  const Vector quad = hk.cwiseProduct(h).rowwise().sum();
  const Vector hd = h.diagonal();
  return (quad.array() / hd.array().square()).sum() / m1;
}

double stage2_score(const RidgePath& path, const Vector& y, double lambda2) {
  const auto m2 = static_cast<double>(y.size());
  const Matrix h = path.residual_operator(m2 * lambda2);
  const Vector r = (h * y).array() / h.diagonal().array();
  return r.squaredNorm() / m2;
}

}  // namespace

Stage1Fit::Stage1Fit(Dataset sample, KernelSet specs, double lambda1)
    : sample_(std::move(sample)), specs_(std::move(specs)), lambda1_(lambda1) {
  sample_.validate();
  if (sample_.rows() < 2) throw InvalidArgument("stage1_fit needs m1 >= 2");
  if (!(lambda1 > 0.0) || !std::isfinite(lambda1)) {
    throw InvalidArgument("stage1_fit: lambda1 must be positive");
  }
  const GramMatrix k = k_axz(sample_, sample_.a, sample_.x, sample_.z, specs_);
  chol_ = cholesky_psd(k, static_cast<double>(m1()) * lambda1_);
  k_ww_ = gram(sample_.w, sample_.w, specs_.w);
}

Matrix Stage1Fit::gamma(const Matrix& a, const Matrix& x, const Matrix& z) const {
  if (a.rows() != x.rows() || a.rows() != z.rows()) {
    throw DimensionError("Stage1Fit::gamma: query blocks have different row counts");
  }
  return chol_.solve(k_axz(sample_, a, x, z, specs_));
}

Stage1Fit stage1_fit(const Dataset& sample1, const KernelSet& specs, double lambda1) {
  return Stage1Fit(sample1, specs, lambda1);
}

Vector stage1_embedding(const Stage1Fit& fit, const RowVector& a, const RowVector& x,
                        const RowVector& z) {
  return fit.gamma(Matrix(a), Matrix(x), Matrix(z)).col(0);
}

Matrix KpvModel::alpha() const {
  // nu is row-major alpha; Eigen maps are column-major, so map alpha^T.
  return Eigen::Map<const Matrix>(nu.data(), m2(), m1()).transpose();
}

Matrix stage2_sigma(const Stage1Fit& fit, const Matrix& gamma2, const Dataset& sample2) {
  const KernelSet& specs = fit.specs();
  Matrix sigma = gamma2.transpose() * fit.k_ww() * gamma2;
  sigma.array() *= gram(sample2.a, sample2.a, specs.a).array();
  sigma.array() *= gram(sample2.x, sample2.x, specs.x).array();
  return 0.5 * (sigma + sigma.transpose());
}

KpvModel kpv_fit(const Stage1Fit& fit, const Dataset& sample2, double lambda2) {
  sample2.validate();
  if (sample2.rows() < 1) throw InvalidArgument("kpv_fit needs m2 >= 1");
  if (!(lambda2 > 0.0) || !std::isfinite(lambda2)) {
    throw InvalidArgument("kpv_fit: lambda2 must be positive");
  }
  const Eigen::Index m2 = sample2.rows();
  const Matrix gamma2 = fit.gamma(sample2.a, sample2.x, sample2.z);
  const Matrix sigma = stage2_sigma(fit, gamma2, sample2);
  const Vector c = solve_psd(sigma, static_cast<double>(m2) * lambda2, sample2.y);

  // (Gamma ⊗̄ I) c without forming the (m1 m2) x m2 matrix: alpha_ij = Gamma_ij c_j.
  const Matrix alpha = gamma2 * c.asDiagonal();
  return kpv_from_alpha(fit, sample2.a, sample2.x, alpha, lambda2);
}

KpvModel kpv_from_alpha(const Stage1Fit& fit, const Matrix& a2, const Matrix& x2,
                        const Matrix& alpha, double lambda2) {
  if (alpha.rows() != fit.m1() || alpha.cols() != a2.rows() || x2.rows() != a2.rows()) {
    throw DimensionError("kpv_from_alpha: alpha must be m1 x m2");
  }
  KpvModel model{fit, a2, x2, Vector(alpha.size()), lambda2};
  Eigen::Map<Matrix>(model.nu.data(), alpha.cols(), alpha.rows()) = alpha.transpose();
  if (!model.nu.allFinite()) throw NumericalError("kpv_fit produced non-finite coefficients");
  return model;
}

double kpv_h(const KpvModel& model, const RowVector& a, const RowVector& x, const RowVector& w) {
  const KernelSet& specs = model.stage1.specs();
  const Vector kw = kernel_column(model.stage1.sample().w, w, specs.w);
  const Vector kax = kernel_column(model.a2, a, specs.a).cwiseProduct(
      kernel_column(model.x2, x, specs.x));
  return kw.dot(model.alpha() * kax);
}

DoCurve kpv_ate(const KpvModel& model, const Vector& a_grid, const Matrix& adjust_x,
                const Matrix& adjust_w) {
  const Eigen::Index nt = adjust_w.rows();
  if (nt < 1) throw InvalidArgument("kpv_ate: empty adjustment sample");
  if (adjust_x.rows() != nt) throw DimensionError("kpv_ate: adjustment X and W row counts differ");
  const KernelSet& specs = model.stage1.specs();

  const GramMatrix k_w = gram(model.stage1.sample().w, adjust_w, specs.w);  // m1 x nt
  const GramMatrix k_x = gram(model.x2, adjust_x, specs.x);                 // m2 x nt
  const Matrix p = model.alpha().transpose() * k_w;                         // m2 x nt
  const Vector q = p.cwiseProduct(k_x).rowwise().sum() / static_cast<double>(nt);

  DoCurve curve;
  curve.grid = a_grid;
  const Matrix grid_pts = Eigen::Map<const Matrix>(a_grid.data(), a_grid.size(), 1);
  if (model.a2.cols() != 1) throw DimensionError("kpv_ate: treatment grid needs a scalar A");
  curve.estimate = gram(grid_pts, model.a2, specs.a) * q;
  return curve;
}

double stage1_loo_score(const GramMatrix& k_axz, const GramMatrix& k_ww, double lambda1) {
  if (k_axz.rows() != k_ww.rows() || k_axz.cols() != k_ww.cols() || k_axz.rows() != k_axz.cols()) {
    throw DimensionError("stage1_loo_score: Gram shapes differ");
  }
  return stage1_score(RidgePath(k_axz), k_ww, lambda1);
}

double stage2_loo_score(const Matrix& sigma, const Vector& y, double lambda2) {
  if (sigma.rows() != y.size() || sigma.cols() != y.size()) {
    throw DimensionError("stage2_loo_score: Sigma must be m2 x m2");
  }
  return stage2_score(RidgePath(sigma), y, lambda2);
}

LambdaSelection kpv_select_lambdas(const Dataset& sample1, const Dataset& sample2,
                                   const KernelSet& specs, const std::vector<double>& lambda1_grid,
                                   const std::vector<double>& lambda2_grid) {
  detail::require_grid(lambda1_grid, "kpv_select_lambdas (lambda1)");
  detail::require_grid(lambda2_grid, "kpv_select_lambdas (lambda2)");
  LambdaSelection out;

  {
    const GramMatrix k = k_axz(sample1, sample1.a, sample1.x, sample1.z, specs);
    const GramMatrix k_ww = gram(sample1.w, sample1.w, specs.w);
    const RidgePath path(k);
    for (double l1 : lambda1_grid) out.stage1_scores.push_back(stage1_score(path, k_ww, l1));
    out.lambda1 = lambda1_grid[detail::argmin_prefer_larger(lambda1_grid, out.stage1_scores,
                                                            "kpv stage-1 selection")];
  }

  const Stage1Fit fit(sample1, specs, out.lambda1);
  const Matrix gamma2 = fit.gamma(sample2.a, sample2.x, sample2.z);
  const RidgePath path(stage2_sigma(fit, gamma2, sample2));
  for (double l2 : lambda2_grid) out.stage2_scores.push_back(stage2_score(path, sample2.y, l2));
  out.lambda2 = lambda2_grid[detail::argmin_prefer_larger(lambda2_grid, out.stage2_scores,
                                                          "kpv stage-2 selection")];
  return out;
}

std::vector<double> default_lambda1_grid() { return log_grid(1e-5, 1.0, 21); }
std::vector<double> default_lambda2_grid() { return log_grid(1e-6, 1.0, 25); }

}  // namespace proxi::kpv

#include "proxi/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "proxi/errors.hpp"

namespace proxi::synth {

namespace {

struct Confounder {
  double u1;
  double u2;
};

template <class Rng>
Confounder draw_u(Rng& rng) {
  std::uniform_real_distribution<double> unif_u2(-1.0, 2.0);
  std::uniform_real_distribution<double> unif01(0.0, 1.0);
  const double u2 = unif_u2(rng);
  const double u1 = unif01(rng) - ((u2 >= 0.0 && u2 <= 1.0) ? 1.0 : 0.0);
  return {u1, u2};
}

void check_table(const Matrix& t, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (t.rows() != rows || t.cols() != cols) {
    throw InvalidArgument(std::string("discrete toy: ") + name + " has the wrong shape");
  }
  if ((t.array() < 0.0).any() || !t.allFinite()) {
    throw InvalidArgument(std::string("discrete toy: ") + name + " has invalid probabilities");
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (std::abs(t.row(r).sum() - 1.0) > 1e-12) {
      throw InvalidArgument(std::string("discrete toy: rows of ") + name + " must sum to 1");
    }
  }
}

// p(u | a, z) for every z: k x k matrix with rows z and columns u.
Matrix posterior_u(const DiscreteToySpec& spec, Eigen::Index a) {
  const Eigen::Index k = spec.states();
  if (a < 0 || a >= spec.levels()) throw InvalidArgument("discrete toy: treatment level out of range");
  Matrix post(k, k);
  for (Eigen::Index z = 0; z < k; ++z) {
    for (Eigen::Index u = 0; u < k; ++u) {
      post(z, u) = spec.p_u(u) * spec.p_a_given_u(u, a) * spec.p_z_given_u(u, z);
    }
    const double mass = post.row(z).sum();
    if (!(mass > 0.0)) throw NumericalError("discrete toy: p(a, z) = 0 for some level pair");
    post.row(z) /= mass;
  }
  return post;
}

}  // namespace

SyntheticDraw gen_main(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("gen_main: n must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif_pm1(-1.0, 1.0);
  std::normal_distribution<double> proxy_noise(0.0, std::sqrt(kProxyNoiseVariance));
  std::normal_distribution<double> treat_noise(0.0, std::sqrt(kTreatmentNoiseVariance));

  SyntheticDraw draw;
  draw.seed = seed;
  draw.u.resize(n, 2);
  Dataset& d = draw.data;
  d.a.resize(n, 1);
  d.x.resize(n, 0);
  d.z.resize(n, 2);
  d.w.resize(n, 2);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Confounder u = draw_u(rng);
    d.w(i, 0) = u.u1 + unif_pm1(rng);
    d.w(i, 1) = u.u2 + proxy_noise(rng);
    d.z(i, 0) = u.u1 + proxy_noise(rng);
    d.z(i, 1) = u.u2 + unif_pm1(rng);
    d.a(i, 0) = u.u2 + treat_noise(rng);
    d.y(i) = structural_outcome(d.a(i, 0), u.u1, u.u2);
    draw.u(i, 0) = u.u1;
    draw.u(i, 1) = u.u2;
  }
  return draw;
}

double structural_outcome(double a, double u1, double u2) {
  return u2 * std::cos(2.0 * (a + 0.3 * u1 + 0.2));
}

DoCurve true_ate(const Vector& a_grid, Eigen::Index mc_samples, std::uint64_t seed) {
  if (mc_samples < 1) throw InvalidArgument("true_ate: mc_samples must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<Confounder> us(static_cast<std::size_t>(mc_samples));
  for (auto& u : us) u = draw_u(rng);

  DoCurve curve;
  curve.grid = a_grid;
  curve.estimate.resize(a_grid.size());
  for (Eigen::Index g = 0; g < a_grid.size(); ++g) {
    double sum = 0.0;
    for (const auto& u : us) sum += structural_outcome(a_grid(g), u.u1, u.u2);
    curve.estimate(g) = sum / static_cast<double>(mc_samples);
  }
  curve.truth = curve.estimate;
  return curve;
}

Vector default_a_grid() {
  static const Vector grid = [] {
    const SyntheticDraw draw = gen_main(kTruthSamples, kOracleSeed);
    std::vector<double> a(draw.data.a.data(), draw.data.a.data() + draw.data.a.size());
    auto quantile = [&a](double p) {
      // Linear interpolation between order statistics.
      const double pos = p * static_cast<double>(a.size() - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(lo), a.end());
      const double v_lo = a[lo];
      if (lo + 1 >= a.size()) return v_lo;
      const double v_hi = *std::min_element(a.begin() + static_cast<std::ptrdiff_t>(lo) + 1, a.end());
      return v_lo + (pos - static_cast<double>(lo)) * (v_hi - v_lo);
    };
    const double lo = quantile(0.05);
    const double hi = quantile(0.95);
    return linspace(lo, hi, 9);
  }();
  return grid;
}

void DiscreteToySpec::validate() const {
  const Eigen::Index k = states();
  if (k < 1) throw InvalidArgument("discrete toy: need at least one hidden state");
  if (levels() < 1) throw InvalidArgument("discrete toy: need at least one treatment level");
  if ((p_u.array() < 0.0).any() || std::abs(p_u.sum() - 1.0) > 1e-12) {
    throw InvalidArgument("discrete toy: p_u must be a probability vector");
  }
  check_table(p_a_given_u, k, levels(), "p_a_given_u");
  check_table(p_z_given_u, k, k, "p_z_given_u");
  check_table(p_w_given_u, k, k, "p_w_given_u");
  if (outcome.cols() != k || !outcome.allFinite()) {
    throw InvalidArgument("discrete toy: outcome must be levels x k and finite");
  }
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw InvalidArgument("discrete toy: noise_sd must be non-negative");
  }
}

DiscreteToySpec two_state_toy() {
  DiscreteToySpec s;
  s.p_u.resize(2);
  s.p_u << 0.4, 0.6;
  s.p_a_given_u.resize(2, 2);
  s.p_a_given_u << 0.7, 0.3,
                   0.3, 0.7;
  s.p_z_given_u.resize(2, 2);
  s.p_z_given_u << 0.9, 0.1,
                   0.15, 0.85;
  s.p_w_given_u.resize(2, 2);
  s.p_w_given_u << 0.85, 0.15,
                   0.1, 0.9;
  s.outcome.resize(2, 2);
  s.outcome << 1.0, -0.5,
               0.2, 1.5;
  s.noise_sd = 0.1;
  return s;
}

Matrix conditional_w_given_az(const DiscreteToySpec& spec, Eigen::Index a) {
  spec.validate();
  return posterior_u(spec, a) * spec.p_w_given_u;
}

Vector conditional_y_given_az(const DiscreteToySpec& spec, Eigen::Index a) {
  spec.validate();
  return posterior_u(spec, a) * spec.outcome.row(a).transpose();
}

Vector enumerated_do_mean(const DiscreteToySpec& spec) {
  spec.validate();
  return spec.outcome * spec.p_u;
}

Matrix exact_bridge(const DiscreteToySpec& spec) {
  spec.validate();
  const Eigen::Index k = spec.states();
  Matrix h(spec.levels(), k);
  for (Eigen::Index a = 0; a < spec.levels(); ++a) {
    const Matrix p = conditional_w_given_az(spec, a);
    const Eigen::FullPivLU<Matrix> lu(p);
    if (!lu.isInvertible() || lu.rcond() < 1e-12) {
      throw NumericalError("exact_bridge: p(w | a, z) is singular at level " + std::to_string(a));
    }
    h.row(a) = lu.solve(conditional_y_given_az(spec, a)).transpose();
  }
  return h;
}

DiscreteToy gen_discrete_toy(const DiscreteToySpec& spec, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("gen_discrete_toy: n must be at least 1");
  DiscreteToy toy;
  toy.bridge = exact_bridge(spec);
  toy.do_mean = enumerated_do_mean(spec);
  toy.levels = Vector::LinSpaced(spec.levels(), 0.0, static_cast<double>(spec.levels() - 1));

  const Eigen::Index k = spec.states();
  auto make = [](const auto& values) {
    std::vector<double> w(values.begin(), values.end());
    return std::discrete_distribution<int>(w.begin(), w.end());
  };
  auto dist_u = make(spec.p_u);
  std::vector<std::discrete_distribution<int>> dist_a, dist_z, dist_w;
  for (Eigen::Index u = 0; u < k; ++u) {
    dist_a.push_back(make(spec.p_a_given_u.row(u)));
    dist_z.push_back(make(spec.p_z_given_u.row(u)));
    dist_w.push_back(make(spec.p_w_given_u.row(u)));
  }
  std::normal_distribution<double> noise(0.0, 1.0);

  std::mt19937_64 rng(seed);
  Dataset& d = toy.data;
  d.a.resize(n, 1);
  d.x.resize(n, 0);
  d.z.resize(n, 1);
  d.w.resize(n, 1);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int u = dist_u(rng);
    const int a = dist_a[u](rng);
    d.a(i, 0) = a;
    d.z(i, 0) = dist_z[u](rng);
    d.w(i, 0) = dist_w[u](rng);
    d.y(i) = spec.outcome(a, u) + spec.noise_sd * noise(rng);
  }
  return toy;
}

}  // namespace proxi::synth

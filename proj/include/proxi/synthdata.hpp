#pragma once

#include <cstdint>

#include "proxi/dataset.hpp"
#include "proxi/docurve.hpp"

namespace proxi::synth {

/// One draw of the two-dimensional-confounder benchmark:
///
///   U2 ~ Unif[-1, 2],  U1 ~ Unif[0, 1] - 1[0 <= U2 <= 1]
///   W  = [U1 + Unif[-1, 1], U2 + N(0, 3)]
///   Z  = [U1 + N(0, 3),     U2 + Unif[-1, 1]]
///   A  = U2 + N(0, 0.05)
///   Y  = U2 cos(2 (A + 0.3 U1 + 0.2))
///
/// Normal parameters are variances. X is empty.
struct SyntheticDraw {
  Dataset data;
  Matrix u;  // n x 2 hidden confounder
  std::uint64_t seed = 0;
};

inline constexpr double kProxyNoiseVariance = 3.0;
inline constexpr double kTreatmentNoiseVariance = 0.05;

SyntheticDraw gen_main(Eigen::Index n, std::uint64_t seed);

/// Outcome equation with A pinned: U2 cos(2 (a + 0.3 U1 + 0.2)).
double structural_outcome(double a, double u1, double u2);

/// Monte-Carlo E[Y | do(A = a)] for every grid value, with fresh U draws
/// shared across the grid.
DoCurve true_ate(const Vector& a_grid, Eigen::Index mc_samples, std::uint64_t seed);

inline constexpr Eigen::Index kTruthSamples = 1'000'000;
inline constexpr std::uint64_t kOracleSeed = 20210101;

/// Nine equispaced treatment values spanning the 5%..95% quantiles of A,
/// estimated from kTruthSamples draws with kOracleSeed.
Vector default_a_grid();

/// Finite proximal model with |U| = |Z| = |W| = k hidden/proxy states:
/// U ~ p_u, A | U ~ p_a_given_u, Z | U ~ p_z_given_u, W | U ~ p_w_given_u and
/// Y = f(A, U) + N(0, noise_sd^2). State s of A, Z and W is encoded as the real s.
struct DiscreteToySpec {
  Vector p_u;            // k
  Matrix p_a_given_u;    // k x levels, rows sum to 1
  Matrix p_z_given_u;    // k x k
  Matrix p_w_given_u;    // k x k
  Matrix outcome;        // levels x k, f(a, u)
  double noise_sd = 0.1;

  Eigen::Index states() const noexcept { return p_u.size(); }
  Eigen::Index levels() const noexcept { return outcome.rows(); }
  /// Throws InvalidArgument on malformed probability tables.
  void validate() const;
};

/// The hand-built two-state model used by the identification tests.
DiscreteToySpec two_state_toy();

struct DiscreteToy {
  Dataset data;
  Matrix bridge;        // levels x k: h*(a, w)
  Vector do_mean;       // levels: enumerated E[Y | do(a)]
  Vector levels;        // treatment values 0..levels-1
};

/// p(w | a, z) as a k x k matrix (rows z, columns w), by enumeration over U.
Matrix conditional_w_given_az(const DiscreteToySpec& spec, Eigen::Index a);
/// E[Y | a, z] for every z, by enumeration over U.
Vector conditional_y_given_az(const DiscreteToySpec& spec, Eigen::Index a);
/// E[Y | do(a)] = sum_u f(a, u) p(u) for every treatment level.
Vector enumerated_do_mean(const DiscreteToySpec& spec);
/// Solves sum_w h(a, w) p(w | a, z) = E[Y | a, z] for every level a.
/// Throws NumericalError when p(w | a, z) is singular.
Matrix exact_bridge(const DiscreteToySpec& spec);

DiscreteToy gen_discrete_toy(const DiscreteToySpec& spec, Eigen::Index n, std::uint64_t seed);

}  // namespace proxi::synth

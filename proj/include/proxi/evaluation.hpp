#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "proxi/docurve.hpp"
#include "proxi/synthdata.hpp"

namespace proxi::eval {

/// Mean over the grid of |estimate - truth|. Throws DimensionError if the
/// grids differ.
double cmae(const DoCurve& estimate, const DoCurve& truth);

enum class Method { kpv, pmmr, pmmr_nystrom, ridge, ridge_w, ridge_wz, linear2s };

std::string to_string(Method m);
/// Accepts the CLI spellings ("kpv", "pmmr-nystrom", "ridge-wz", ...).
Method parse_method(const std::string& name);
std::vector<Method> all_methods();

struct ExperimentConfig {
  Eigen::Index n = 500;
  std::vector<std::uint64_t> seeds;        // defaults to 0..19
  std::vector<Method> methods;
  std::vector<double> kpv_lambda1_grid;     // empty -> library default
  std::vector<double> kpv_lambda2_grid;
  std::vector<double> pmmr_lambda_grid;
  std::vector<double> ridge_lambda_grid;
  Eigen::Index nystrom_rank = 0;            // 0 -> n / 4
  Eigen::Index truth_samples = synth::kTruthSamples;
  std::uint64_t truth_seed = synth::kOracleSeed;
  Vector a_grid;                            // empty -> synth::default_a_grid()
  unsigned threads = 0;                     // 0 -> PROXI_THREADS or hardware concurrency

  void validate() const;
};

/// Outcome of one method on one seed.
struct SeedResult {
  std::uint64_t seed = 0;
  double cmae = 0.0;
  bool ok = true;
  std::string error;
  std::map<std::string, double> hyperparameters;
  Vector estimate;
};

struct MethodSummary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over successful seeds
  int failures = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  DoCurve truth;
  std::map<Method, std::vector<SeedResult>> per_seed;
  std::map<Method, MethodSummary> summary;
};

/// Runs one method on one draw and returns its estimated curve; `hyper`
/// receives the selected hyperparameters.
DoCurve run_method(Method method, const Dataset& data, const Vector& a_grid,
                   const ExperimentConfig& config, std::uint64_t seed,
                   std::map<std::string, double>* hyper = nullptr);

/// Generate, select hyperparameters, fit and score every method on every
/// seed. Seeds run on worker threads; results are ordered by seed index.
/// A method failing on more than 25% of seeds throws Error with diagnostics.
ExperimentResult run_table(const ExperimentConfig& config);

/// Aggregates per-seed values (mean and population std over ok entries).
MethodSummary summarize(const std::vector<SeedResult>& seeds);

/// Worker count from PROXI_THREADS, falling back to hardware concurrency.
unsigned default_threads();

}  // namespace proxi::eval

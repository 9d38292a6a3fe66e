#include "proxi/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

#include "proxi/baselines.hpp"
#include "proxi/errors.hpp"
#include "proxi/kpv.hpp"
#include "proxi/pmmr.hpp"

namespace proxi::eval {

double cmae(const DoCurve& estimate, const DoCurve& truth) {
  const Vector& ref = truth.truth ? *truth.truth : truth.estimate;
  if (estimate.grid.size() != truth.grid.size() || estimate.estimate.size() != ref.size() ||
      estimate.estimate.size() != estimate.grid.size()) {
    throw DimensionError("cmae: curves have different lengths");
  }
  if (estimate.grid.size() == 0) throw DimensionError("cmae: empty grid");
  const double scale = 1.0 + estimate.grid.cwiseAbs().maxCoeff();
  if ((estimate.grid - truth.grid).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw DimensionError("cmae: curves are on different grids");
  }
  return (estimate.estimate - ref).cwiseAbs().mean();
}

namespace {

struct MethodName {
  Method method;
  const char* name;
};

constexpr MethodName kMethodNames[] = {
    {Method::kpv, "kpv"},         {Method::pmmr, "pmmr"},         {Method::pmmr_nystrom, "pmmr-nystrom"},
    {Method::ridge, "ridge"},     {Method::ridge_w, "ridge-w"},   {Method::ridge_wz, "ridge-wz"},
    {Method::linear2s, "linear2s"},
};

template <class T>
const std::vector<T>& or_default(const std::vector<T>& grid, const std::vector<T>& fallback) {
  return grid.empty() ? fallback : grid;
}

DoCurve ridge_curve(const Matrix& inputs, const KernelSpec& spec, const Matrix& adjustment,
                    const Dataset& data, const Vector& a_grid, const ExperimentConfig& config,
                    std::map<std::string, double>* hyper) {
  const std::vector<double> fallback = baselines::default_lambda_grid();
  const double lambda =
      baselines::ridge_select_lambda(inputs, data.y, spec, or_default(config.ridge_lambda_grid, fallback));
  if (hyper) (*hyper)["lambda"] = lambda;
  const auto model = baselines::kernel_ridge_fit(inputs, data.y, spec, lambda);
  return baselines::adjusted_ate(model, a_grid, adjustment);
}

}  // namespace

std::string to_string(Method m) {
  for (const auto& entry : kMethodNames) {
    if (entry.method == m) return entry.name;
  }
  throw InvalidArgument("unknown method");
}

Method parse_method(const std::string& name) {
  for (const auto& entry : kMethodNames) {
    if (name == entry.name) return entry.method;
  }
  throw InvalidArgument("unknown method '" + name +
                        "' (expected kpv, pmmr, pmmr-nystrom, ridge, ridge-w, ridge-wz or linear2s)");
}

std::vector<Method> all_methods() {
  std::vector<Method> out;
  for (const auto& entry : kMethodNames) out.push_back(entry.method);
  return out;
}

void ExperimentConfig::validate() const {
  if (n < 4) throw InvalidArgument("experiment: n must be at least 4");
  if (methods.empty()) throw InvalidArgument("experiment: no methods requested");
  if (nystrom_rank < 0 || nystrom_rank > n) {
    throw InvalidArgument("experiment: Nystrom rank must lie in [0, n]");
  }
  if (truth_samples < 1) throw InvalidArgument("experiment: truth_samples must be positive");
  for (const auto* grid : {&kpv_lambda1_grid, &kpv_lambda2_grid, &pmmr_lambda_grid, &ridge_lambda_grid}) {
    for (double g : *grid) {
      if (!(g > 0.0) || !std::isfinite(g)) {
        throw InvalidArgument("experiment: lambda grids must be positive and finite");
      }
    }
  }
  if (!a_grid.allFinite()) throw InvalidArgument("experiment: a-grid must be finite");
}

DoCurve run_method(Method method, const Dataset& data, const Vector& a_grid,
                   const ExperimentConfig& config, std::uint64_t seed,
                   std::map<std::string, double>* hyper) {
  const KernelSet specs = KernelSet::median(data);
  switch (method) {
    case Method::kpv: {
      const auto [s1, s2] = split_half(data, seed);
      const auto l1 = kpv::default_lambda1_grid();
      const auto l2 = kpv::default_lambda2_grid();
      const auto sel = kpv::kpv_select_lambdas(s1, s2, specs, or_default(config.kpv_lambda1_grid, l1),
                                               or_default(config.kpv_lambda2_grid, l2));
      if (hyper) {
        (*hyper)["lambda1"] = sel.lambda1;
        (*hyper)["lambda2"] = sel.lambda2;
      }
      const auto model = kpv::kpv_fit(kpv::stage1_fit(s1, specs, sel.lambda1), s2, sel.lambda2);
      return kpv::kpv_ate(model, a_grid, data.x, data.w);
    }
    case Method::pmmr:
    case Method::pmmr_nystrom: {
      const auto [train, valid] = split_half(data, seed);
      const auto fallback = pmmr::default_lambda_grid();
      const auto sel =
          pmmr::pmmr_select_lambda(train, valid, specs, or_default(config.pmmr_lambda_grid, fallback));
      if (hyper) (*hyper)["lambda"] = sel.lambda;
      if (method == Method::pmmr) {
        return pmmr::pmmr_ate(pmmr::pmmr_fit(data, specs, sel.lambda), a_grid, data.x, data.w);
      }
      const Eigen::Index rank =
          config.nystrom_rank > 0 ? std::min(config.nystrom_rank, data.rows())
                                  : std::max<Eigen::Index>(1, data.rows() / 4);
      if (hyper) (*hyper)["rank"] = static_cast<double>(rank);
      const auto model = pmmr::pmmr_fit_nystrom(data, specs, sel.lambda, rank, seed);
      return pmmr::pmmr_ate(model, a_grid, data.x, data.w);
    }
    case Method::ridge: {
      const Matrix none(data.rows(), 0);
      return ridge_curve(data.a, specs.a, none, data, a_grid, config, hyper);
    }
    case Method::ridge_w:
      return ridge_curve(hstack({&data.a, &data.w}), specs.a.concat(specs.w), data.w, data, a_grid,
                         config, hyper);
    case Method::ridge_wz: {
      const Matrix wz = hstack({&data.w, &data.z});
      return ridge_curve(hstack({&data.a, &wz}), specs.a.concat(specs.w).concat(specs.z), wz, data,
                         a_grid, config, hyper);
    }
    case Method::linear2s:
      return baselines::linear_two_stage(data, a_grid);
  }
  throw InvalidArgument("run_method: unknown method");
}

MethodSummary summarize(const std::vector<SeedResult>& seeds) {
  MethodSummary s;
  std::vector<double> vals;
  for (const auto& r : seeds) {
    if (r.ok) {
      vals.push_back(r.cmae);
    } else {
      ++s.failures;
    }
  }
  if (vals.empty()) {
    s.mean = s.std = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double v : vals) sum += v;
  s.mean = sum / static_cast<double>(vals.size());
  double ss = 0.0;
  for (double v : vals) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(vals.size()));
  return s;
}

unsigned default_threads() {
  if (const char* env = std::getenv("PROXI_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentResult run_table(const ExperimentConfig& input) {
  ExperimentResult result;
  result.config = input;
  ExperimentConfig& config = result.config;
  if (config.seeds.empty()) {
    for (std::uint64_t s = 0; s < 20; ++s) config.seeds.push_back(s);
  }
  if (config.a_grid.size() == 0) config.a_grid = synth::default_a_grid();
  config.validate();

  result.truth = synth::true_ate(config.a_grid, config.truth_samples, config.truth_seed);
  const std::size_t n_seeds = config.seeds.size();
  const std::size_t n_methods = config.methods.size();
  std::vector<std::vector<SeedResult>> cells(n_seeds, std::vector<SeedResult>(n_methods));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n_seeds; i = next++) {
      const std::uint64_t seed = config.seeds[i];
      const Dataset data = synth::gen_main(config.n, seed).data;
      for (std::size_t m = 0; m < n_methods; ++m) {
        SeedResult& cell = cells[i][m];
        cell.seed = seed;
        try {
          const DoCurve curve =
              run_method(config.methods[m], data, config.a_grid, config, seed, &cell.hyperparameters);
          curve.validate();
          cell.estimate = curve.estimate;
          cell.cmae = cmae(curve, result.truth);
        } catch (const std::exception& e) {
          cell.ok = false;
          cell.error = e.what();
        }
      }
    }
  };
  const unsigned threads = std::max<unsigned>(
      1, std::min<unsigned>(config.threads > 0 ? config.threads : default_threads(),
                            static_cast<unsigned>(n_seeds)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t m = 0; m < n_methods; ++m) {
    std::vector<SeedResult>& column = result.per_seed[config.methods[m]];
    for (std::size_t i = 0; i < n_seeds; ++i) column.push_back(std::move(cells[i][m]));
    const MethodSummary s = summarize(column);
    if (static_cast<double>(s.failures) > 0.25 * static_cast<double>(n_seeds)) {
      std::ostringstream msg;
      msg << "run_table: " << to_string(config.methods[m]) << " failed on " << s.failures << " of "
          << n_seeds << " seeds";
      for (const auto& r : column) {
        if (!r.ok) msg << "; seed " << r.seed << ": " << r.error;
      }
      throw Error(msg.str());
    }
    result.summary[config.methods[m]] = s;
  }
  return result;
}

}  // namespace proxi::eval

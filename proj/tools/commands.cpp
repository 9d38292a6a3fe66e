#include <cstdio>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "proxi/baselines.hpp"
#include "proxi/errors.hpp"
#include "proxi/evaluation.hpp"
#include "proxi/io.hpp"
#include "proxi/kpv.hpp"
#include "proxi/pmmr.hpp"
#include "proxi/synthdata.hpp"
#include "proxi/version.hpp"

namespace proxi::cli {

using nlohmann::json;

namespace {

json provenance(const RunConfig& cfg) { return json{{"version", kVersion}, {"config", cfg.to_json()}}; }

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

/// A dataset plus how it was obtained, so a model can point back at it.
struct LoadedData {
  Dataset data;
  json reference;
  std::optional<DoCurve> truth_on_levels;  // discrete generator only
};

LoadedData generate(const std::string& generator, long long n, std::uint64_t seed) {
  LoadedData out;
  if (generator == "main") {
    out.data = synth::gen_main(n, seed).data;
  } else {
    auto toy = synth::gen_discrete_toy(synth::two_state_toy(), n, seed);
    out.data = std::move(toy.data);
    out.truth_on_levels = DoCurve{toy.levels, toy.do_mean, toy.do_mean};
  }
  out.reference = json{{"path", nullptr},
                       {"generator", generator},
                       {"n", n},
                       {"seed", seed},
                       {"hash", io::content_hash_bytes(io::dataset_csv(out.data))}};
  return out;
}

LoadedData load(const RunConfig& cfg) {
  if (cfg.data.empty()) return generate(cfg.generator, cfg.n, cfg.seed);
  LoadedData out;
  out.data = io::read_dataset_csv(cfg.data);
  out.reference = json{{"path", cfg.data}, {"hash", io::content_hash(cfg.data)}};
  return out;
}

Vector a_grid_for(const RunConfig& cfg, const LoadedData& loaded) {
  if (!cfg.a_grid.empty()) return parse_a_grid(cfg.a_grid);
  if (loaded.truth_on_levels) return loaded.truth_on_levels->grid;
  return synth::default_a_grid();
}

std::vector<double> grid_or(const std::string& text, std::vector<double> fallback) {
  auto grid = parse_lambda_grid(text);
  return grid.empty() ? fallback : grid;
}

void attach_truth(DoCurve& curve, const RunConfig& cfg, const LoadedData& loaded) {
  if (loaded.truth_on_levels && cfg.a_grid.empty()) {
    curve.truth = loaded.truth_on_levels->estimate;
  } else if (cfg.data.empty() && cfg.generator == "main") {
    curve.truth = synth::true_ate(curve.grid, synth::kTruthSamples, synth::kOracleSeed).estimate;
  }
}

/// Ridge inputs and adjustment columns for the three regression baselines.
struct RidgeLayout {
  Matrix inputs;
  Matrix adjustment;
  KernelSpec spec;
};

RidgeLayout ridge_layout(eval::Method method, const Dataset& data, const KernelSet& specs) {
  switch (method) {
    case eval::Method::ridge:
      return {data.a, Matrix(data.rows(), 0), specs.a};
    case eval::Method::ridge_w:
      return {hstack({&data.a, &data.w}), data.w, specs.a.concat(specs.w)};
    default: {
      const Matrix wz = hstack({&data.w, &data.z});
      return {hstack({&data.a, &wz}), wz, specs.a.concat(specs.w).concat(specs.z)};
    }
  }
}

/// Rebuilds the fitted curve from the stored coefficients and the training data.
DoCurve curve_from_model(const json& model, const Dataset& data, const Vector& a_grid) {
  const auto method = eval::parse_method(model.at("method").get<std::string>());
  const json& coef = model.at("coefficients");
  const json& lambdas = model.at("lambdas");
  const KernelSet specs = io::kernel_set_from_json(model.at("kernels"));
  switch (method) {
    case eval::Method::kpv: {
      const auto [s1, s2] = split_half(data, model.at("split_seed").get<std::uint64_t>());
      const auto fit = kpv::stage1_fit(s1, specs, lambdas.at("lambda1").get<double>());
      const auto m = kpv::kpv_from_alpha(fit, s2.a, s2.x, io::matrix_from_json(coef.at("alpha")),
                                         lambdas.at("lambda2").get<double>());
      return kpv::kpv_ate(m, a_grid, data.x, data.w);
    }
    case eval::Method::pmmr:
    case eval::Method::pmmr_nystrom: {
      const Vector alpha = io::vector_from_json(coef.at("alpha"));
      if (alpha.size() != data.rows()) throw SchemaError("model: alpha length does not match the data");
      const pmmr::PmmrModel m{data.awx(), alpha, lambdas.at("lambda").get<double>(), specs};
      return pmmr::pmmr_ate(m, a_grid, data.x, data.w);
    }
    case eval::Method::ridge:
    case eval::Method::ridge_w:
    case eval::Method::ridge_wz: {
      auto layout = ridge_layout(method, data, specs);
      baselines::RidgeModel m{std::move(layout.inputs), io::vector_from_json(coef.at("coef")), layout.spec,
                              lambdas.at("lambda").get<double>()};
      if (m.coef.size() != data.rows()) throw SchemaError("model: coef length does not match the data");
      return baselines::adjusted_ate(m, a_grid, layout.adjustment);
    }
    case eval::Method::linear2s: {
      const double offset = coef.at("intercept").get<double>() +
                            io::vector_from_json(coef.at("coef_w")).dot(io::vector_from_json(coef.at("w_mean"))) +
                            io::vector_from_json(coef.at("coef_x")).dot(io::vector_from_json(coef.at("x_mean")));
      const Vector coef_a = io::vector_from_json(coef.at("coef_a"));
      if (coef_a.size() != 1) throw SchemaError("model: linear2s needs scalar A");
      return DoCurve{a_grid, (coef_a(0) * a_grid.array() + offset).matrix(), std::nullopt};
    }
  }
  throw SchemaError("model: unknown method");
}

std::string format(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

eval::ExperimentConfig experiment_config(const RunConfig& cfg, long long n) {
  eval::ExperimentConfig ec;
  ec.n = n;
  ec.seeds = parse_seeds(cfg.seeds);
  for (const auto& m : split_commas(cfg.methods)) ec.methods.push_back(eval::parse_method(m));
  const auto grid = parse_lambda_grid(cfg.lambda_grid);
  ec.kpv_lambda1_grid = grid;
  ec.pmmr_lambda_grid = grid;
  ec.ridge_lambda_grid = grid;
  ec.kpv_lambda2_grid = parse_lambda_grid(cfg.lambda2_grid);
  ec.nystrom_rank = cfg.rank;
  ec.truth_samples = cfg.truth_samples;
  if (!cfg.a_grid.empty()) ec.a_grid = parse_a_grid(cfg.a_grid);
  ec.threads = cfg.threads;
  return ec;
}

void append_rows(std::ostream& out, const eval::ExperimentResult& result, long long n) {
  for (const auto& [method, rows] : result.per_seed) {
    for (const auto& r : rows) {
      json hyper = r.hyperparameters;
      std::string error = r.error;
      for (char& c : error) {
        if (c == ',' || c == '\n') c = ';';
      }
      out << n << ',' << eval::to_string(method) << ',' << r.seed << ',' << (r.ok ? format(r.cmae) : "nan")
          << ',' << (r.ok ? 1 : 0) << ',' << error << '\n';
    }
  }
}

json summary_json(const eval::ExperimentResult& result) {
  json methods = json::object();
  for (const auto& [method, s] : result.summary) {
    json per_seed = json::array();
    for (const auto& r : result.per_seed.at(method)) {
      per_seed.push_back(json{{"seed", r.seed},
                              {"ok", r.ok},
                              {"cmae", r.ok ? json(r.cmae) : json(nullptr)},
                              {"hyperparameters", r.hyperparameters},
                              {"error", r.error}});
    }
    methods[eval::to_string(method)] =
        json{{"mean", s.mean}, {"std", s.std}, {"failures", s.failures}, {"per_seed", per_seed}};
  }
  return json{{"n", result.config.n},
              {"a_grid", io::to_json(result.truth.grid)},
              {"truth", io::to_json(result.truth.estimate)},
              {"methods", methods}};
}

int failed_seed_count(const eval::ExperimentResult& result) {
  int failures = 0;
  for (const auto& [method, s] : result.summary) failures += s.failures;
  return failures;
}

void print_summary(const eval::ExperimentResult& result) {
  for (const auto& [method, s] : result.summary) {
    std::cout << "n=" << result.config.n << ' ' << eval::to_string(method) << ": c-MAE " << s.mean
              << " +/- " << s.std;
    if (s.failures) std::cout << " (" << s.failures << " failed)";
    std::cout << '\n';
  }
}

/// Exit status 0 when every cell succeeded; otherwise report on stderr.
int finish(int failures) {
  if (failures == 0) return 0;
  std::cerr << json{{"error", "partial_failure"},
                    {"message", std::to_string(failures) + " method/seed runs failed; see the summary"}}
                   .dump()
            << '\n';
  return 3;
}

}  // namespace

int cmd_gen(const RunConfig& cfg) {
  const LoadedData loaded = generate(cfg.generator, cfg.n, cfg.seed);
  io::write_dataset_csv(loaded.data, cfg.out);
  json sidecar = provenance(cfg);
  sidecar["hash"] = io::content_hash(cfg.out);
  io::write_text(cfg.out + ".json", sidecar.dump(2) + "\n");
  return 0;
}

int cmd_fit(const RunConfig& cfg) {
  const LoadedData loaded = load(cfg);
  const Dataset& data = loaded.data;
  data.validate();
  const KernelSet specs = parse_bandwidth(cfg.bandwidth, data);
  const Vector a_grid = a_grid_for(cfg, loaded);
  const auto method = eval::parse_method(cfg.method);

  json lambdas = json::object();
  json coef = json::object();
  DoCurve curve;
  switch (method) {
    case eval::Method::kpv: {
      const auto [s1, s2] = split_half(data, cfg.seed);
      double l1 = cfg.lambda1.value_or(0.0);
      double l2 = cfg.lambda2.value_or(0.0);
      if (!cfg.lambda1 || !cfg.lambda2) {
        const auto sel = kpv::kpv_select_lambdas(
            s1, s2, specs, cfg.lambda1 ? std::vector<double>{l1} : grid_or(cfg.lambda_grid, kpv::default_lambda1_grid()),
            cfg.lambda2 ? std::vector<double>{l2} : grid_or(cfg.lambda2_grid, kpv::default_lambda2_grid()));
        l1 = sel.lambda1;
        l2 = sel.lambda2;
      }
      const auto m = kpv::kpv_fit(kpv::stage1_fit(s1, specs, l1), s2, l2);
      lambdas = json{{"lambda1", l1}, {"lambda2", l2}};
      coef["alpha"] = io::to_json(m.alpha());
      curve = kpv::kpv_ate(m, a_grid, data.x, data.w);
      break;
    }
    case eval::Method::pmmr:
    case eval::Method::pmmr_nystrom: {
      double lambda = cfg.lambda1.value_or(0.0);
      if (!cfg.lambda1) {
        if (data.rows() < 4) throw InvalidArgument("PMMR on fewer than 4 rows needs a fixed --lambda1");
        const auto [train, valid] = split_half(data, cfg.seed);
        lambda = pmmr::pmmr_select_lambda(train, valid, specs, grid_or(cfg.lambda_grid, pmmr::default_lambda_grid()))
                     .lambda;
      }
      pmmr::PmmrModel m;
      if (method == eval::Method::pmmr) {
        m = pmmr::pmmr_fit(data, specs, lambda);
      } else {
        const Eigen::Index rank = cfg.rank > 0 ? std::min<Eigen::Index>(cfg.rank, data.rows())
                                               : std::max<Eigen::Index>(1, data.rows() / 4);
        m = pmmr::pmmr_fit_nystrom(data, specs, lambda, rank, cfg.seed);
        lambdas["rank"] = rank;
      }
      lambdas["lambda"] = lambda;
      coef["alpha"] = io::to_json(m.alpha);
      curve = pmmr::pmmr_ate(m, a_grid, data.x, data.w);
      break;
    }
    case eval::Method::ridge:
    case eval::Method::ridge_w:
    case eval::Method::ridge_wz: {
      auto layout = ridge_layout(method, data, specs);
      const double lambda =
          cfg.lambda1 ? *cfg.lambda1
                      : baselines::ridge_select_lambda(layout.inputs, data.y, layout.spec,
                                                       grid_or(cfg.lambda_grid, baselines::default_lambda_grid()));
      const auto m = baselines::kernel_ridge_fit(layout.inputs, data.y, layout.spec, lambda);
      lambdas["lambda"] = lambda;
      coef["coef"] = io::to_json(m.coef);
      curve = baselines::adjusted_ate(m, a_grid, layout.adjustment);
      break;
    }
    case eval::Method::linear2s: {
      const auto fit = baselines::linear_two_stage_fit(data);
      coef = json{{"stage1_intercepts", io::to_json(fit.stage1_intercepts)},
                  {"stage1_coef", io::to_json(fit.stage1_coef)},
                  {"intercept", fit.intercept},
                  {"coef_a", io::to_json(fit.coef_a)},
                  {"coef_w", io::to_json(fit.coef_w)},
                  {"coef_x", io::to_json(fit.coef_x)},
                  {"w_mean", io::to_json(fit.w_mean)},
                  {"x_mean", io::to_json(fit.x_mean)}};
      curve = baselines::linear_two_stage(data, a_grid);
      break;
    }
  }
  curve.validate();
  attach_truth(curve, cfg, loaded);

  json model = provenance(cfg);
  model["method"] = eval::to_string(method);
  model["data"] = loaded.reference;
  model["split_seed"] = cfg.seed;
  model["kernels"] = io::to_json(specs);
  model["lambdas"] = lambdas;
  model["coefficients"] = coef;
  model["a_grid"] = io::to_json(a_grid);
  model["curve"] = io::to_json(curve.estimate);
  io::write_text(cfg.out, model.dump() + "\n");
  if (!cfg.curve_out.empty()) io::write_docurve_csv(curve, cfg.curve_out, provenance(cfg));
  if (curve.truth) {
    std::cout << "c-MAE " << eval::cmae(curve, DoCurve{curve.grid, *curve.truth, std::nullopt}) << '\n';
  }
  return 0;
}

int cmd_ate(const RunConfig& cfg) {
  json model;
  try {
    model = json::parse(io::read_text(cfg.model));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("model file is not valid JSON: ") + e.what());
  }
  const json& ref = model.at("data");
  const std::string expected = ref.at("hash").get<std::string>();
  Dataset data;
  if (!cfg.data.empty()) {
    const std::string actual = io::content_hash(cfg.data);
    if (actual != expected) {
      throw SchemaError("dataset hash " + actual + " does not match the model's training data " + expected);
    }
    data = io::read_dataset_csv(cfg.data);
  } else if (!ref.at("path").is_null()) {
    const std::string path = ref.at("path").get<std::string>();
    if (io::content_hash(path) != expected) {
      throw SchemaError("training data " + path + " changed since the model was fitted");
    }
    data = io::read_dataset_csv(path);
  } else {
    data = generate(ref.at("generator").get<std::string>(), ref.at("n").get<long long>(),
                    ref.at("seed").get<std::uint64_t>())
               .data;
    if (io::content_hash_bytes(io::dataset_csv(data)) != expected) {
      throw SchemaError("regenerated training data does not match the model hash");
    }
  }
  const Vector a_grid = cfg.a_grid.empty() ? io::vector_from_json(model.at("a_grid")) : parse_a_grid(cfg.a_grid);
  DoCurve curve = curve_from_model(model, data, a_grid);
  curve.validate();
  json prov = provenance(cfg);
  prov["model_hash"] = io::content_hash(cfg.model);
  io::write_docurve_csv(curve, cfg.out, prov);
  return 0;
}

int cmd_experiment(const RunConfig& cfg) {
  const auto result = eval::run_table(experiment_config(cfg, cfg.n));
  std::ostringstream csv;
  csv << "# " << provenance(cfg).dump() << '\n' << "n,method,seed,cmae,ok,error\n";
  append_rows(csv, result, cfg.n);
  io::write_text(cfg.out + ".csv", csv.str());
  json summary = provenance(cfg);
  summary["results"] = json::array({summary_json(result)});
  io::write_text(cfg.out + ".json", summary.dump(2) + "\n");
  print_summary(result);
  return finish(failed_seed_count(result));
}

int cmd_sweep(const RunConfig& cfg) {
  std::ostringstream csv;
  csv << "# " << provenance(cfg).dump() << '\n' << "n,method,seed,cmae,ok,error\n";
  json summary = provenance(cfg);
  summary["results"] = json::array();
  int failures = 0;
  for (long long n : parse_int_list(cfg.ns)) {
    const auto result = eval::run_table(experiment_config(cfg, n));
    append_rows(csv, result, n);
    summary["results"].push_back(summary_json(result));
    print_summary(result);
    failures += failed_seed_count(result);
  }
  io::write_text(cfg.out + ".csv", csv.str());
  io::write_text(cfg.out + ".json", summary.dump(2) + "\n");
  return finish(failures);
}

}  // namespace proxi::cli

#include <exception>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli.hpp"
#include "proxi/errors.hpp"
#include "proxi/version.hpp"

namespace {

int report(const char* kind, const std::string& message, int code) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using proxi::cli::RunConfig;
  RunConfig cfg;
  CLI::App app{"Kernel proxy-variable estimators of E[Y | do(A = a)]"};
  app.set_version_flag("--version", std::string(proxi::kVersion));
  app.require_subcommand(1);

  auto data_flags = [&cfg](CLI::App* sub) {
    sub->add_option("--data", cfg.data, "Dataset CSV (default: generate one)");
    sub->add_option("--generator", cfg.generator, "Generator when --data is absent: main | discrete");
    sub->add_option("--n", cfg.n, "Sample size");
    sub->add_option("--seed", cfg.seed, "Generator, split and landmark seed");
  };
  auto lambda_flags = [&cfg](CLI::App* sub) {
    sub->add_option("--lambda-grid", cfg.lambda_grid, "lo:hi:count (log-spaced) or comma list");
    sub->add_option("--lambda2-grid", cfg.lambda2_grid, "KPV stage-2 grid, same syntax");
    sub->add_option("--rank", cfg.rank, "Nystrom rank (0: n/4)");
    sub->add_option("--a-grid", cfg.a_grid, "Treatment grid min:max:count");
  };

  auto* gen = app.add_subcommand("gen", "Write a synthetic dataset CSV");
  gen->add_option("--generator", cfg.generator, "main | discrete");
  gen->add_option("--n", cfg.n, "Sample size");
  gen->add_option("--seed", cfg.seed, "Seed");
  gen->add_option("--out", cfg.out, "Output CSV")->required();

  auto* fit = app.add_subcommand("fit", "Fit one estimator and write a model file");
  data_flags(fit);
  lambda_flags(fit);
  fit->add_option("--method", cfg.method,
                  "kpv | pmmr | pmmr-nystrom | ridge | ridge-w | ridge-wz | linear2s");
  fit->add_option_function<double>("--lambda1,--lambda", [&cfg](double v) { cfg.lambda1 = v; },
                                   "Fixed stage-1 (or single) ridge parameter");
  fit->add_option_function<double>("--lambda2", [&cfg](double v) { cfg.lambda2 = v; },
                                   "Fixed KPV stage-2 ridge parameter");
  fit->add_option("--bandwidth", cfg.bandwidth, "median or comma list ordered A, X, Z, W columns");
  fit->add_option("--out", cfg.out, "Model JSON")->required();
  fit->add_option("--curve", cfg.curve_out, "Also write the fitted curve as CSV");

  auto* ate = app.add_subcommand("ate", "Evaluate a fitted model's dose-response curve");
  ate->add_option("--model", cfg.model, "Model JSON from fit")->required();
  ate->add_option("--data", cfg.data, "Training CSV; must match the model's data hash");
  ate->add_option("--a-grid", cfg.a_grid, "Treatment grid min:max:count (default: the fit grid)");
  ate->add_option("--out", cfg.out, "Curve CSV")->required();

  auto experiment_flags = [&](CLI::App* sub) {
    lambda_flags(sub);
    sub->add_option("--seeds", cfg.seeds, "Seeds, e.g. 0-19 or 0,3,5-7");
    sub->add_option("--methods", cfg.methods, "Comma list of methods");
    sub->add_option("--truth-samples", cfg.truth_samples, "Monte-Carlo draws for the true curve");
    sub->add_option("--threads", cfg.threads, "Worker threads (0: PROXI_THREADS or all cores)");
    sub->add_option("--out", cfg.out, "Output prefix for .csv and .json")->required();
  };
  auto* experiment = app.add_subcommand("experiment", "Score methods over seeds on the synthetic benchmark");
  experiment->add_option("--n", cfg.n, "Sample size");
  experiment_flags(experiment);
  auto* sweep = app.add_subcommand("sweep", "Run the experiment for several sample sizes");
  sweep->add_option("--ns", cfg.ns, "Comma list of sample sizes");
  experiment_flags(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report("usage", e.what(), 2);
  }

  try {
    cfg.subcommand = app.get_subcommands().front()->get_name();
    cfg.validate();
    if (cfg.subcommand == "gen") return proxi::cli::cmd_gen(cfg);
    if (cfg.subcommand == "fit") return proxi::cli::cmd_fit(cfg);
    if (cfg.subcommand == "ate") return proxi::cli::cmd_ate(cfg);
    if (cfg.subcommand == "experiment") return proxi::cli::cmd_experiment(cfg);
    return proxi::cli::cmd_sweep(cfg);
  } catch (const proxi::Error& e) {
    return report(e.kind(), e.what(), 1);
  } catch (const nlohmann::json::exception& e) {
    return report("schema", std::string("model file: ") + e.what(), 1);
  } catch (const std::exception& e) {
    return report("error", e.what(), 1);
  }
}

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "proxi/dataset.hpp"

namespace proxi::cli {

/// Everything a subcommand was asked to do. Validated before execution and
/// written verbatim into every output for provenance.
struct RunConfig {
  std::string subcommand;
  std::string data;                       // dataset CSV path; empty -> generator
  std::string generator = "main";         // main | discrete
  long long n = 500;
  std::uint64_t seed = 0;
  std::string seeds = "0-19";
  std::string method = "kpv";
  std::string methods = "kpv,pmmr,pmmr-nystrom,ridge,ridge-w,ridge-wz,linear2s";
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  std::string lambda_grid;                // empty -> library default
  std::string lambda2_grid;
  std::string bandwidth = "median";
  long long rank = 0;
  std::string a_grid;                     // empty -> default grid
  std::string ns = "200,500,1000";
  long long truth_samples = 1'000'000;
  std::string model;
  std::string out;
  std::string curve_out;
  unsigned threads = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

/// "1e-4:1:9" (log-spaced) or a comma list.
std::vector<double> parse_lambda_grid(const std::string& text);
/// "0-19", "3", "0,2,5-7".
std::vector<std::uint64_t> parse_seeds(const std::string& text);
/// "min:max:count".
Vector parse_a_grid(const std::string& text);
std::vector<long long> parse_int_list(const std::string& text);
/// "median" or a comma list of bandwidths ordered A, X, Z, W columns.
KernelSet parse_bandwidth(const std::string& text, const Dataset& data);

int cmd_gen(const RunConfig& cfg);
int cmd_fit(const RunConfig& cfg);
int cmd_ate(const RunConfig& cfg);
int cmd_experiment(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg);

}  // namespace proxi::cli

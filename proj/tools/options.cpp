#include <cmath>
#include <sstream>

#include "cli.hpp"
#include "proxi/errors.hpp"
#include "proxi/evaluation.hpp"
#include "proxi/numerics.hpp"

namespace proxi::cli {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw InvalidArgument("cannot parse " + what + " value '" + s + "'");
  }
  return v;
}

long long to_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw InvalidArgument("cannot parse " + what + " value '" + s + "'");
  return v;
}

}  // namespace

std::vector<double> parse_lambda_grid(const std::string& text) {
  if (text.empty()) return {};
  const auto parts = split(text, ':');
  std::vector<double> grid;
  if (parts.size() == 3) {
    grid = log_grid(to_double(parts[0], "lambda grid"), to_double(parts[1], "lambda grid"),
                    static_cast<int>(to_int(parts[2], "lambda grid")));
  } else if (parts.size() == 1) {
    for (const auto& item : split(text, ',')) grid.push_back(to_double(item, "lambda grid"));
  } else {
    throw InvalidArgument("lambda grid must be lo:hi:count or a comma list");
  }
  for (double g : grid) {
    if (!(g > 0.0)) throw InvalidArgument("lambda grid values must be positive");
  }
  return grid;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : split(text, ',')) {
    const auto dash = item.find('-', 1);
    const long long lo = to_int(item.substr(0, dash), "seed");
    const long long hi = dash == std::string::npos ? lo : to_int(item.substr(dash + 1), "seed");
    if (lo < 0 || hi < lo) throw InvalidArgument("invalid seed range '" + item + "'");
    for (long long s = lo; s <= hi; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (seeds.empty()) throw InvalidArgument("no seeds given");
  return seeds;
}

Vector parse_a_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw InvalidArgument("--a-grid must be min:max:count");
  const double lo = to_double(parts[0], "a-grid");
  const double hi = to_double(parts[1], "a-grid");
  const long long count = to_int(parts[2], "a-grid");
  if (count < 1 || hi < lo) throw InvalidArgument("--a-grid needs count >= 1 and min <= max");
  return linspace(lo, hi, count);
}

std::vector<long long> parse_int_list(const std::string& text) {
  std::vector<long long> out;
  for (const auto& item : split(text, ',')) out.push_back(to_int(item, "integer list"));
  if (out.empty()) throw InvalidArgument("empty integer list");
  return out;
}

KernelSet parse_bandwidth(const std::string& text, const Dataset& data) {
  if (text == "median") return KernelSet::median(data);
  std::vector<double> all;
  for (const auto& item : split(text, ',')) all.push_back(to_double(item, "bandwidth"));
  const auto da = static_cast<std::size_t>(data.a.cols());
  const auto dx = static_cast<std::size_t>(data.x.cols());
  const auto dz = static_cast<std::size_t>(data.z.cols());
  const auto dw = static_cast<std::size_t>(data.w.cols());
  if (all.size() != da + dx + dz + dw) {
    throw InvalidArgument("--bandwidth needs " + std::to_string(da + dx + dz + dw) +
                          " values (A, X, Z, W columns in order)");
  }
  auto take = [&all](std::size_t from, std::size_t count) {
    return KernelSpec(std::vector<double>(all.begin() + static_cast<std::ptrdiff_t>(from),
                                          all.begin() + static_cast<std::ptrdiff_t>(from + count)));
  };
  return KernelSet{take(0, da), take(da, dx), take(da + dx, dz), take(da + dx + dz, dw)};
}

void RunConfig::validate() const {
  if (n < 1) throw InvalidArgument("--n must be positive");
  if (generator != "main" && generator != "discrete") {
    throw InvalidArgument("--generator must be main or discrete");
  }
  if (lambda1 && !(*lambda1 > 0.0)) throw InvalidArgument("--lambda1 must be positive");
  if (lambda2 && !(*lambda2 > 0.0)) throw InvalidArgument("--lambda2 must be positive");
  if (rank < 0) throw InvalidArgument("--rank must be non-negative");
  if (truth_samples < 1) throw InvalidArgument("--truth-samples must be positive");
  parse_lambda_grid(lambda_grid);
  parse_lambda_grid(lambda2_grid);
  if (!a_grid.empty()) parse_a_grid(a_grid);
  if (bandwidth != "median") {
    for (const auto& item : split(bandwidth, ',')) {
      if (!(to_double(item, "bandwidth") > 0.0)) throw InvalidArgument("bandwidths must be positive");
    }
  }
  if (subcommand == "fit") eval::parse_method(method);
  if (subcommand == "experiment" || subcommand == "sweep") {
    parse_seeds(seeds);
    for (const auto& m : split(methods, ',')) eval::parse_method(m);
  }
  if (subcommand == "sweep") {
    for (long long v : parse_int_list(ns)) {
      if (v < 4) throw InvalidArgument("--ns values must be at least 4");
    }
  }
  if (subcommand == "ate" && model.empty()) throw InvalidArgument("ate needs --model");
  if (out.empty()) throw InvalidArgument("--out is required");
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j{{"subcommand", subcommand},
                   {"data", data},
                   {"generator", generator},
                   {"n", n},
                   {"seed", seed},
                   {"lambda_grid", lambda_grid},
                   {"lambda2_grid", lambda2_grid},
                   {"bandwidth", bandwidth},
                   {"a_grid", a_grid},
                   {"out", out}};
  j["lambda1"] = lambda1 ? nlohmann::json(*lambda1) : nlohmann::json(nullptr);
  j["lambda2"] = lambda2 ? nlohmann::json(*lambda2) : nlohmann::json(nullptr);
  if (subcommand == "fit") {
    j["method"] = method;
    j["rank"] = rank;
    j["curve_out"] = curve_out;
  }
  if (subcommand == "ate") j["model"] = model;
  if (subcommand == "experiment" || subcommand == "sweep") {
    j["seeds"] = seeds;
    j["methods"] = methods;
    j["rank"] = rank;
    j["truth_samples"] = truth_samples;
    j["threads"] = threads;
  }
  if (subcommand == "sweep") j["ns"] = ns;
  return j;
}

}  // namespace proxi::cli

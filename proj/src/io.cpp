#include "proxi/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "proxi/errors.hpp"

namespace proxi::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno != ERANGE;
}

void append_names(std::vector<std::string>& names, char letter, Eigen::Index cols) {
  if (cols == 1) {
    names.emplace_back(1, letter);
    return;
  }
  for (Eigen::Index j = 1; j <= cols; ++j) names.push_back(std::string(1, letter) + std::to_string(j));
}

// Blocks in column order: A, X, Z, W, Y.
std::vector<std::pair<char, const Matrix*>> blocks(const Dataset& d) {
  return {{'A', &d.a}, {'X', &d.x}, {'Z', &d.z}, {'W', &d.w}};
}

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// Non-comment, non-blank lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> content_lines(const std::string& text) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    out.emplace_back(no, t);
  }
  return out;
}

}  // namespace

std::string csv_header(const Dataset& data) {
  std::vector<std::string> names;
  for (const auto& [letter, block] : blocks(data)) append_names(names, letter, block->cols());
  names.emplace_back("Y");
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ',';
    out += names[i];
  }
  return out;
}

std::string dataset_csv(const Dataset& data) {
  data.validate();
  std::ostringstream out;
  out << csv_header(data) << '\n';
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    bool first = true;
    for (const auto& [letter, block] : blocks(data)) {
      (void)letter;
      for (Eigen::Index j = 0; j < block->cols(); ++j) {
        if (!first) out << ',';
        out << format_double((*block)(i, j));
        first = false;
      }
    }
    if (!first) out << ',';
    out << format_double(data.y(i)) << '\n';
  }
  return out.str();
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  write_text(path, dataset_csv(data));
}

Dataset parse_dataset_csv(const std::string& text) {
  const auto lines = content_lines(text);
  if (lines.empty()) throw SchemaError("dataset CSV: missing header row");
  const auto header = split(lines[0].second);

  // Column index lists per block, in header order.
  std::vector<Eigen::Index> cols_a, cols_x, cols_z, cols_w, cols_y;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    const bool suffix_ok =
        name.size() >= 1 && name.find_first_not_of("0123456789", 1) == std::string::npos;
    std::vector<Eigen::Index>* target = nullptr;
    if (suffix_ok) {
      switch (name[0]) {
        case 'A': target = &cols_a; break;
        case 'X': target = &cols_x; break;
        case 'Z': target = &cols_z; break;
        case 'W': target = &cols_w; break;
        case 'Y': target = name.size() == 1 ? &cols_y : nullptr; break;
        default: break;
      }
    }
    if (!target) {
      throw SchemaError("dataset CSV line " + std::to_string(lines[0].first) + ", column " +
                        std::to_string(c + 1) + ": unrecognized column name '" + name + "'");
    }
    target->push_back(static_cast<Eigen::Index>(c));
  }
  const std::pair<const char*, const std::vector<Eigen::Index>*> required[] = {
      {"A", &cols_a}, {"Z", &cols_z}, {"W", &cols_w}, {"Y", &cols_y}};
  for (const auto& [name, cols] : required) {
    if (cols->empty()) throw SchemaError(std::string("dataset CSV: missing required column ") + name);
  }
  if (cols_y.size() != 1) throw SchemaError("dataset CSV: Y must appear exactly once");

  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  Matrix table(n, static_cast<Eigen::Index>(header.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& [no, line] = lines[static_cast<std::size_t>(i) + 1];
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw SchemaError("dataset CSV line " + std::to_string(no) + ": expected " +
                        std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v) || !std::isfinite(v)) {
        throw SchemaError("dataset CSV line " + std::to_string(no) + ", column " + header[c] +
                          ": non-numeric cell '" + cells[c] + "'");
      }
      table(i, static_cast<Eigen::Index>(c)) = v;
    }
  }
  auto take = [&table, n](const std::vector<Eigen::Index>& cols) {
    Matrix m(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = table.col(cols[j]);
    return m;
  };
  Dataset d;
  d.a = take(cols_a);
  d.x = take(cols_x);
  d.z = take(cols_z);
  d.w = take(cols_w);
  d.y = table.col(cols_y[0]);
  return d;
}

Dataset read_dataset_csv(const std::filesystem::path& path) { return parse_dataset_csv(read_text(path)); }

std::string content_hash_bytes(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::string content_hash(const std::filesystem::path& path) { return content_hash_bytes(read_text(path)); }

void write_docurve_csv(const DoCurve& curve, const std::filesystem::path& path,
                       const nlohmann::json& provenance) {
  curve.validate();
  std::ostringstream out;
  if (!provenance.is_null()) out << "# " << provenance.dump() << '\n';
  out << (curve.truth ? "a,estimate,truth\n" : "a,estimate\n");
  for (Eigen::Index i = 0; i < curve.size(); ++i) {
    out << format_double(curve.grid(i)) << ',' << format_double(curve.estimate(i));
    if (curve.truth) out << ',' << format_double((*curve.truth)(i));
    out << '\n';
  }
  write_text(path, out.str());
}

DoCurve read_docurve_csv(const std::filesystem::path& path) {
  const auto lines = content_lines(read_text(path));
  if (lines.empty()) throw SchemaError("curve CSV: missing header row");
  const auto header = split(lines[0].second);
  const bool with_truth = header.size() == 3 && header[2] == "truth";
  if (header.size() < 2 || header[0] != "a" || header[1] != "estimate" ||
      (header.size() == 3 && !with_truth) || header.size() > 3) {
    throw SchemaError("curve CSV: expected header a,estimate[,truth]");
  }
  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  DoCurve curve;
  curve.grid.resize(n);
  curve.estimate.resize(n);
  Vector truth(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& [no, line] = lines[static_cast<std::size_t>(i) + 1];
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw SchemaError("curve CSV line " + std::to_string(no) + ": wrong number of cells");
    }
    double vals[3] = {0.0, 0.0, 0.0};
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_double(cells[c], vals[c])) {
        throw SchemaError("curve CSV line " + std::to_string(no) + ", column " + header[c] +
                          ": non-numeric cell '" + cells[c] + "'");
      }
    }
    curve.grid(i) = vals[0];
    curve.estimate(i) = vals[1];
    truth(i) = vals[2];
  }
  if (with_truth) curve.truth = truth;
  return curve;
}

nlohmann::json to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

nlohmann::json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Matrix matrix_from_json(const nlohmann::json& j) {
  try {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows) {
      throw SchemaError("matrix JSON: row count mismatch");
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto& row = data.at(static_cast<std::size_t>(i));
      if (static_cast<Eigen::Index>(row.size()) != cols) throw SchemaError("matrix JSON: ragged rows");
      for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("matrix JSON: ") + e.what());
  }
}

Vector vector_from_json(const nlohmann::json& j) {
  try {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("vector JSON: ") + e.what());
  }
}

nlohmann::json to_json(const KernelSet& specs) {
  return {{"a", specs.a.bandwidths()},
          {"x", specs.x.bandwidths()},
          {"z", specs.z.bandwidths()},
          {"w", specs.w.bandwidths()}};
}

KernelSet kernel_set_from_json(const nlohmann::json& j) {
  try {
    return KernelSet{KernelSpec(j.at("a").get<std::vector<double>>()),
                     KernelSpec(j.at("x").get<std::vector<double>>()),
                     KernelSpec(j.at("z").get<std::vector<double>>()),
                     KernelSpec(j.at("w").get<std::vector<double>>())};
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("kernel JSON: ") + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  out.close();
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace proxi::io

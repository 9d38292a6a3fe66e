#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "proxi/dataset.hpp"
#include "proxi/docurve.hpp"

namespace proxi::io {

/// Header names: "A" for a scalar block, otherwise A1..Ad (likewise X, Z, W);
/// "Y" for the outcome.
std::string csv_header(const Dataset& data);

/// Writes a header row then one row per sample, 17 significant digits.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
std::string dataset_csv(const Dataset& data);

/// Parses a dataset CSV. Lines starting with '#' are skipped. Columns are
/// grouped by their leading letter (A, X, Z, W, Y); other columns and
/// missing required columns (A, W, Z, Y) raise SchemaError naming the
/// offending line and column.
Dataset read_dataset_csv(const std::filesystem::path& path);
Dataset parse_dataset_csv(const std::string& text);

/// FNV-1a 64-bit hash of the file contents, hex encoded.
std::string content_hash(const std::filesystem::path& path);
std::string content_hash_bytes(const std::string& bytes);

/// CSV with columns a, estimate[, truth]. A non-empty `provenance` is written
/// first as a single '#'-prefixed JSON line.
void write_docurve_csv(const DoCurve& curve, const std::filesystem::path& path,
                       const nlohmann::json& provenance = nullptr);
DoCurve read_docurve_csv(const std::filesystem::path& path);

nlohmann::json to_json(const Matrix& m);
nlohmann::json to_json(const Vector& v);
Matrix matrix_from_json(const nlohmann::json& j);
Vector vector_from_json(const nlohmann::json& j);
nlohmann::json to_json(const KernelSet& specs);
KernelSet kernel_set_from_json(const nlohmann::json& j);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace proxi::io

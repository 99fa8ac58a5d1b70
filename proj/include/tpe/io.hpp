#pragma once

#include "tpe/dataset.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tpe {

namespace fs = std::filesystem;

struct LoadOptions {
  bool normalize = true;
  /// Feature file for a `row`-style manifest. Defaults to the manifest path
  /// with its extension replaced by `.bin`.
  std::optional<fs::path> binary_path;
};

/// Loads either an inline CSV (`record_id,subject,media_id,template_id,split,f0,...`)
/// or a label manifest (`record_id,subject,media_id,template_id,split,row`)
/// that indexes into a `TPE1` binary feature file.
Dataset load_manifest(const fs::path& path, const LoadOptions& opts = {});

/// Inline CSV; values are written with round-trip precision.
void save_csv(const Dataset& ds, const fs::path& path);

/// `TPE1` feature file plus a label manifest whose `row` column is the record index.
void save_binary(const Dataset& ds, const fs::path& features_path, const fs::path& manifest_path);

/// Raw `TPE1` payload: count x dim float32 values widened to double.
RowMatrixXd read_feature_binary(const fs::path& path);
void write_feature_binary(const fs::path& path, const RowMatrixXd& values);

/// `TPEW` file: u32 rows, u32 cols, row-major float64.
MatrixXd read_matrix(const fs::path& path);
void write_matrix(const fs::path& path, const MatrixXd& w);

/// Splits one CSV line on commas; quoting is not supported. A trailing '\r' is dropped.
std::vector<std::string_view> split_fields(std::string_view line);

/// Reads a whole file into lines. Throws IoError when it cannot be opened.
std::vector<std::string> read_lines(const fs::path& path);

/// Writes `text` to `path`, creating parent directories.
void write_text(const fs::path& path, std::string_view text);

/// Shortest string that parses back to exactly `v`.
std::string format_double(double v);

} // namespace tpe

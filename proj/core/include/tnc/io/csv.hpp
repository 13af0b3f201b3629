#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tnc/dataset.hpp"

namespace tnc::io {

/// Numeric table. The first row is a header when any of its fields is not a
/// number; otherwise columns are named by their 0-based index.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  /// Column by header name, or by 0-based index when `key` is an integer.
  /// Throws ConfigError listing the available columns.
  std::size_t column_index(const std::string& key) const;
};

/// Throws LoadError with "source:line:" context on malformed input.
CsvTable parse_csv(const std::string& text, const std::string& source = "<memory>");
CsvTable read_csv(const std::filesystem::path& path);

/// One instance per file; every non-label column is a feature. Label values
/// must be integers in [0, 255]. All files must agree on columns and length.
TimeSeriesDataset dataset_from_csv(std::span<const std::filesystem::path> files,
                                   const std::optional<std::string>& label_column = std::nullopt);

}  // namespace tnc::io

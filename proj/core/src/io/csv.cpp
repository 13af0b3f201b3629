#include "tnc/io/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tnc/error.hpp"

namespace tnc::io {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::size_t CsvTable::column_index(const std::string& key) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == key) return i;
  std::size_t idx = 0;
  const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), idx);
  if (ec == std::errc() && ptr == key.data() + key.size() && idx < columns.size()) return idx;
  std::string names;
  for (const auto& h : header) names += (names.empty() ? "" : ", ") + h;
  throw ConfigError("no column '" + key + "' (available: " + names + ")");
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (first) {
      first = false;
      table.columns.resize(fields.size());
      bool header = false;
      for (const auto& f : fields) header = header || !number(f);
      if (header) {
        table.header = fields;
        continue;
      }
      for (std::size_t i = 0; i < fields.size(); ++i) table.header.push_back(std::to_string(i));
    }
    if (fields.size() != table.columns.size())
      throw LoadError(source + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(table.columns.size()) + " fields, found " + std::to_string(fields.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto v = number(fields[i]);
      if (!v || !std::isfinite(*v))
        throw LoadError(source + ":" + std::to_string(line_no) + ": field " + std::to_string(i + 1) +
                        " ('" + fields[i] + "') is not a finite number");
      table.columns[i].push_back(*v);
    }
  }
  if (table.columns.empty()) throw LoadError(source + ": empty CSV");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw LoadError("cannot open CSV " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str(), path.string());
}

TimeSeriesDataset dataset_from_csv(std::span<const std::filesystem::path> files,
                                   const std::optional<std::string>& label_column) {
  if (files.empty()) throw ConfigError("no CSV files given");
  std::vector<CsvTable> tables;
  for (const auto& f : files) tables.push_back(read_csv(f));
  const CsvTable& ref = tables.front();
  std::optional<std::size_t> label_idx;
  if (label_column) label_idx = ref.column_index(*label_column);
  const std::size_t d = ref.columns.size() - (label_idx ? 1 : 0);
  if (d == 0) throw ConfigError("CSV has no feature columns");
  const std::size_t t = ref.rows();
  if (t == 0) throw LoadError(files[0].string() + ": no data rows");

  TimeSeriesDataset data(files.size(), d, t);
  if (label_idx) data.enable_labels();
  for (std::size_t n = 0; n < tables.size(); ++n) {
    const auto& tab = tables[n];
    if (tab.header != ref.header || tab.rows() != t)
      throw LoadError(files[n].string() + ": columns or length differ from " + files[0].string());
    std::size_t feature = 0;
    for (std::size_t c = 0; c < tab.columns.size(); ++c) {
      if (label_idx && c == *label_idx) {
        for (std::size_t k = 0; k < t; ++k) {
          const double v = tab.columns[c][k];
          if (v < 0 || v > 255 || v != std::floor(v))
            throw LoadError(files[n].string() + ": data row " + std::to_string(k + 1) +
                            ": label must be an integer in [0, 255]");
          data.label(n, k) = static_cast<std::uint8_t>(v);
        }
        continue;
      }
      for (std::size_t k = 0; k < t; ++k) data.at(n, feature, k) = static_cast<float>(tab.columns[c][k]);
      ++feature;
    }
  }
  data.validate();
  return data;
}

}  // namespace tnc::io

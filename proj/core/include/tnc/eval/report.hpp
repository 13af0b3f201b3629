#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace tnc::eval {

/// Metrics in insertion order plus free-form report lines.
class EvalReport {
 public:
  explicit EvalReport(std::string mode) : mode_(std::move(mode)) {}

  void set(const std::string& key, double value);
  void set(const std::string& key, long long value);
  void set(const std::string& key, const std::string& value);
  void note(std::string line) { notes_.push_back(std::move(line)); }

  const std::string& mode() const { return mode_; }
  bool contains(const std::string& key) const;
  const std::string& get(const std::string& key) const;

  /// key=value lines.
  std::string metrics_text() const;
  /// Human-readable summary.
  std::string text() const;

  /// Writes report.txt and metrics.txt into `dir`.
  void save(const std::filesystem::path& dir) const;

 private:
  std::string mode_;
  std::vector<std::pair<std::string, std::string>> metrics_;
  std::vector<std::string> notes_;
};

}  // namespace tnc::eval

#include "tnc/eval/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "tnc/error.hpp"

namespace tnc::eval {

void EvalReport::set(const std::string& key, double value) {
  std::ostringstream ss;
  ss << std::setprecision(10) << value;
  set(key, ss.str());
}

void EvalReport::set(const std::string& key, long long value) { set(key, std::to_string(value)); }

void EvalReport::set(const std::string& key, const std::string& value) {
  if (key.empty() || key.find_first_of("=\n ") != std::string::npos)
    throw ContractError("report key '" + key + "' is not a plain identifier");
  auto it = std::find_if(metrics_.begin(), metrics_.end(), [&](const auto& kv) { return kv.first == key; });
  if (it != metrics_.end())
    it->second = value;
  else
    metrics_.emplace_back(key, value);
}

bool EvalReport::contains(const std::string& key) const {
  return std::any_of(metrics_.begin(), metrics_.end(), [&](const auto& kv) { return kv.first == key; });
}

const std::string& EvalReport::get(const std::string& key) const {
  for (const auto& [k, v] : metrics_)
    if (k == key) return v;
  throw ContractError("report has no metric '" + key + "'");
}

std::string EvalReport::metrics_text() const {
  std::string out = "mode=" + mode_ + "\n";
  for (const auto& [k, v] : metrics_) out += k + "=" + v + "\n";
  return out;
}

std::string EvalReport::text() const {
  std::ostringstream ss;
  ss << "TNC evaluation (" << mode_ << ")\n";
  std::size_t width = 0;
  for (const auto& kv : metrics_) width = std::max(width, kv.first.size());
  for (const auto& [k, v] : metrics_) ss << "  " << std::left << std::setw(static_cast<int>(width)) << k << "  " << v << '\n';
  if (!notes_.empty()) ss << '\n';
  for (const auto& n : notes_) ss << n << '\n';
  return ss.str();
}

void EvalReport::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [name, body] : {std::pair{"report.txt", text()}, std::pair{"metrics.txt", metrics_text()}}) {
    std::ofstream f(dir / name);
    f << body;
    if (!f) throw LoadError("cannot write " + (dir / name).string());
  }
}

}  // namespace tnc::eval

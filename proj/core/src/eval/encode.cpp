#include "tnc/eval/encode.hpp"

#include <algorithm>
#include <array>
#include <iomanip>

#include "tnc/encoder.hpp"
#include "tnc/error.hpp"
#include "tnc/parallel.hpp"

namespace tnc::eval {

int EncodedSet::n_classes() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

EncodedSet EncodedSet::instance(std::size_t n) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < windows.size(); ++i)
    if (windows[i].instance == n) rows.push_back(static_cast<Eigen::Index>(i));
  EncodedSet out;
  out.encodings.resize(static_cast<Eigen::Index>(rows.size()), encodings.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.encodings.row(static_cast<Eigen::Index>(r)) = encodings.row(rows[r]);
    out.windows.push_back(windows[static_cast<std::size_t>(rows[r])]);
    if (labeled()) out.labels.push_back(labels[static_cast<std::size_t>(rows[r])]);
  }
  return out;
}

std::vector<std::size_t> window_starts(std::size_t length, int delta, int stride) {
  if (delta < 1 || stride < 1) throw ConfigError("window size and stride must be >= 1");
  const auto d = static_cast<std::size_t>(delta);
  if (length < d)
    throw RangeError("series length " + std::to_string(length) + " is shorter than the window " +
                     std::to_string(delta));
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + d <= length; s += static_cast<std::size_t>(stride)) starts.push_back(s);
  return starts;
}

int majority_label(std::span<const std::uint8_t> states) {
  if (states.empty()) throw ContractError("majority_label: empty window");
  std::array<int, 256> counts{};
  for (auto s : states) ++counts[s];
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

namespace {

EncodedSet skeleton(const TimeSeriesDataset& data, int delta, int stride, Eigen::Index cols) {
  const auto starts = window_starts(data.length(), delta, stride);
  EncodedSet set;
  const std::size_t per = starts.size();
  set.encodings.resize(static_cast<Eigen::Index>(data.n_instances() * per), cols);
  set.windows.reserve(data.n_instances() * per);
  for (std::size_t n = 0; n < data.n_instances(); ++n) {
    for (auto s : starts) {
      set.windows.push_back({n, s, s + static_cast<std::size_t>(delta / 2)});
      if (data.has_labels())
        set.labels.push_back(majority_label(
            data.instance_labels(n).subspan(s, static_cast<std::size_t>(delta))));
    }
  }
  return set;
}

}  // namespace

EncodedSet encode_dataset(const model::ModelCheckpoint& ckpt, const TimeSeriesDataset& data,
                          int delta, int stride, int threads) {
  const auto& cfg = ckpt.encoder_config;
  if (delta != cfg.window_size || static_cast<int>(data.n_features()) != cfg.input_features)
    throw ConfigError("checkpoint expects D=" + std::to_string(cfg.input_features) +
                      ", delta=" + std::to_string(cfg.window_size) + "; got D=" +
                      std::to_string(data.n_features()) + ", delta=" + std::to_string(delta) +
                      ", T=" + std::to_string(data.length()));
  EncodedSet set = skeleton(data, delta, stride, cfg.encoding_size);
  const model::Encoder<float> encoder(cfg);

  constexpr std::size_t kChunk = 256;
  const std::size_t total = set.windows.size();
  const std::size_t chunks = (total + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t first = c * kChunk;
    const auto b = static_cast<Eigen::Index>(std::min(kChunk, total - first));
    model::Mat<float> inputs(static_cast<Eigen::Index>(data.n_features()), delta * b);
    for (Eigen::Index j = 0; j < b; ++j) {
      const auto& w = set.windows[first + static_cast<std::size_t>(j)];
      const InstanceView x = data.instance(w.instance);
      for (Eigen::Index s = 0; s < delta; ++s)
        inputs.col(s * b + j) = x.col(static_cast<Eigen::Index>(w.start) + s);
    }
    const model::Mat<float> z = encoder.forward(ckpt.encoder, inputs, b);
    set.encodings.middleRows(static_cast<Eigen::Index>(first), b) = z.transpose().cast<double>();
  });
  if (!set.encodings.allFinite()) throw NumericalError("encode_dataset: non-finite encoding");
  return set;
}

EncodedSet raw_windows(const TimeSeriesDataset& data, int delta, int stride) {
  const auto d = static_cast<Eigen::Index>(data.n_features());
  EncodedSet set = skeleton(data, delta, stride, d * delta);
  for (std::size_t i = 0; i < set.windows.size(); ++i) {
    const auto& w = set.windows[i];
    const InstanceView x = data.instance(w.instance);
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index f = 0; f < d; ++f)
      for (Eigen::Index s = 0; s < delta; ++s)
        set.encodings(row, f * delta + s) = x(f, static_cast<Eigen::Index>(w.start) + s);
  }
  return set;
}

EncodedSet concat(std::span<const EncodedSet> parts) {
  EncodedSet out;
  if (parts.empty()) return out;
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.encodings.cols() != parts[0].encodings.cols())
      throw ContractError("concat: encoding widths differ");
    if (p.labeled() != parts[0].labeled()) throw ContractError("concat: mixed labeled/unlabeled");
    rows += p.encodings.rows();
  }
  out.encodings.resize(rows, parts[0].encodings.cols());
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.encodings.middleRows(at, p.encodings.rows()) = p.encodings;
    at += p.encodings.rows();
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
    out.windows.insert(out.windows.end(), p.windows.begin(), p.windows.end());
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const EncodedSet& set) {
  out << "t";
  for (Eigen::Index m = 0; m < set.encodings.cols(); ++m) out << ",z_" << (m + 1);
  out << ",state_label\n";
  out << std::setprecision(9);
  for (std::size_t i = 0; i < set.size(); ++i) {
    out << set.windows[i].center;
    for (Eigen::Index m = 0; m < set.encodings.cols(); ++m)
      out << ',' << set.encodings(static_cast<Eigen::Index>(i), m);
    out << ',';
    if (set.labeled()) out << set.labels[i];
    out << '\n';
  }
}

TransitionScore transition_detection(const EncodedSet& set, std::span<const int> nearest,
                                     std::span<const std::uint8_t> states, int tolerance) {
  if (nearest.size() != set.size()) throw ContractError("transition_detection: size mismatch");
  TransitionScore score;
  if (set.size() < 2) return score;
  const std::size_t stride = set.windows[1].start - set.windows[0].start;
  const std::size_t end = set.windows.back().start + stride;
  // boundary j sits between windows j-1 and j
  std::vector<bool> changed(set.size() + 1, false);
  for (std::size_t j = 1; j < set.size(); ++j) changed[j] = nearest[j] != nearest[j - 1];
  for (std::size_t t = 1; t < std::min(states.size(), end); ++t) {
    if (states[t] == states[t - 1]) continue;
    ++score.transitions;
    const auto b = static_cast<long>((t - set.windows[0].start + stride / 2) / stride);
    for (long j = b - tolerance; j <= b + tolerance; ++j) {
      if (j >= 1 && j < static_cast<long>(set.size()) && changed[static_cast<std::size_t>(j)]) {
        ++score.detected;
        break;
      }
    }
  }
  return score;
}

}  // namespace tnc::eval

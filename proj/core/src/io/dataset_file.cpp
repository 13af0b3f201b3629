#include "tnc/io/dataset_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include <zlib.h>

#include "tnc/error.hpp"

namespace tnc::io {

static_assert(std::endian::native == std::endian::little, "dataset files assume a little-endian host");

namespace {

std::uint32_t crc_of(const char* data, std::size_t n) {
  return static_cast<std::uint32_t>(crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t end, const std::string& source)
      : bytes_(bytes), end_(end), source_(source) {}

  template <typename T>
  T get(const char* what) {
    T v;
    raw(&v, sizeof(T), what);
    return v;
  }

  void raw(void* dst, std::size_t n, const char* what) {
    if (n > end_ - pos_) throw LoadError(source_ + ": truncated while reading " + what);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  std::size_t remaining() const { return end_ - pos_; }

 private:
  const std::string& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
  const std::string& source_;
};

}  // namespace

std::string serialize_dataset(const TimeSeriesDataset& data) {
  constexpr auto max32 = std::numeric_limits<std::uint32_t>::max();
  if (data.n_instances() > max32 || data.n_features() > max32 || data.length() > max32)
    throw ContractError("dataset dimensions exceed the file format's 32-bit fields");
  std::string out(kDatasetMagic, 4);
  std::uint32_t flags = 0;
  if (data.has_labels()) flags |= kFlagLabels;
  if (data.normalized()) flags |= kFlagNormalized;
  put(out, kDatasetVersion);
  put(out, static_cast<std::uint32_t>(data.n_instances()));
  put(out, static_cast<std::uint32_t>(data.n_features()));
  put(out, static_cast<std::uint32_t>(data.length()));
  put(out, flags);
  if (data.normalized()) {
    for (double m : data.normalization()->mean) put(out, m);
    for (double s : data.normalization()->stddev) put(out, s);
  }
  const auto values = data.values();
  out.append(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(float));
  if (data.has_labels()) {
    const auto labels = data.labels();
    out.append(reinterpret_cast<const char*>(labels.data()), labels.size());
  }
  put(out, crc_of(out.data(), out.size()));
  return out;
}

TimeSeriesDataset deserialize_dataset(const std::string& bytes, const std::string& source) {
  if (bytes.size() < 4 + 5 * 4 + 4) throw LoadError(source + ": file too short for a dataset header");
  if (std::memcmp(bytes.data(), kDatasetMagic, 4) != 0) throw LoadError(source + ": missing TNCD magic");
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, bytes.data() + body, 4);
  if (crc_of(bytes.data(), body) != stored_crc) throw LoadError(source + ": checksum mismatch");

  Reader r(bytes, body, source);
  char magic[4];
  r.raw(magic, 4, "magic");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kDatasetVersion)
    throw LoadError(source + ": unsupported dataset version " + std::to_string(version));
  const auto n = r.get<std::uint32_t>("N");
  const auto d = r.get<std::uint32_t>("D");
  const auto t = r.get<std::uint32_t>("T");
  const auto flags = r.get<std::uint32_t>("flags");
  if (flags & ~(kFlagLabels | kFlagNormalized)) throw LoadError(source + ": unknown flag bits");

  const std::uint64_t cells = std::uint64_t{n} * d * t;
  std::uint64_t expected = cells * sizeof(float);
  if (flags & kFlagNormalized) expected += std::uint64_t{d} * 2 * sizeof(double);
  if (flags & kFlagLabels) expected += std::uint64_t{n} * t;
  if (expected != r.remaining())
    throw LoadError(source + ": declared N=" + std::to_string(n) + " D=" + std::to_string(d) +
                    " T=" + std::to_string(t) + " needs " + std::to_string(expected) +
                    " payload bytes, found " + std::to_string(r.remaining()));

  TimeSeriesDataset data(n, d, t);
  std::optional<Normalization> norm;
  if (flags & kFlagNormalized) {
    norm.emplace();
    norm->mean.resize(d);
    norm->stddev.resize(d);
    r.raw(norm->mean.data(), d * sizeof(double), "normalization means");
    r.raw(norm->stddev.data(), d * sizeof(double), "normalization deviations");
  }
  auto values = data.values();
  r.raw(values.data(), values.size() * sizeof(float), "values");
  if (flags & kFlagLabels) {
    data.enable_labels();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < t; ++k) data.label(i, k) = r.get<std::uint8_t>("labels");
  }
  if (norm) data.set_normalization(std::move(*norm));
  try {
    data.validate();
  } catch (const Error& e) {
    throw LoadError(source + ": " + e.what());
  }
  return data;
}

void save_dataset(const TimeSeriesDataset& data, const std::filesystem::path& path) {
  const std::string bytes = serialize_dataset(data);
  std::ofstream f(path, std::ios::binary);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw LoadError("cannot write dataset " + path.string());
}

TimeSeriesDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LoadError("cannot open dataset " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_dataset(bytes, path.string());
}

}  // namespace tnc::io

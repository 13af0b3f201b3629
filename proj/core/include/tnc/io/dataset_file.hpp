#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "tnc/dataset.hpp"

namespace tnc::io {

inline constexpr char kDatasetMagic[4] = {'T', 'N', 'C', 'D'};
inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::uint32_t kFlagLabels = 1u << 0;
inline constexpr std::uint32_t kFlagNormalized = 1u << 1;

/// Binary dataset file, all integers and floats little-endian:
///   "TNCD" | u32 version | u32 N | u32 D | u32 T | u32 flags
///   | if normalized: f64 mean[D], f64 stddev[D]
///   | f32 values[N][D][T] | if labels: u8 labels[N][T]
///   | u32 crc32 of every preceding byte
std::string serialize_dataset(const TimeSeriesDataset& data);
TimeSeriesDataset deserialize_dataset(const std::string& bytes, const std::string& source = "<memory>");

void save_dataset(const TimeSeriesDataset& data, const std::filesystem::path& path);
/// Throws LoadError naming the path for missing, truncated or corrupt files.
TimeSeriesDataset load_dataset(const std::filesystem::path& path);

}  // namespace tnc::io

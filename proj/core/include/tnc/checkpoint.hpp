#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "tnc/discriminator.hpp"
#include "tnc/encoder.hpp"

namespace tnc::model {

inline constexpr int kCheckpointVersion = 1;

/// Encoder and discriminator parameters with the configuration that produced them.
struct ModelCheckpoint {
  EncoderConfig encoder_config;
  ParamStore<float> encoder;
  DiscriminatorConfig discriminator_config;
  ParamStore<float> discriminator;
  std::map<std::string, std::string> train_config;  ///< flat snapshot, keys without prefix
  std::uint64_t seed = 0;
  int epoch = 0;

  friend bool operator==(const ModelCheckpoint&, const ModelCheckpoint&) = default;
};

/// Fresh checkpoint with seeded initial parameters.
ModelCheckpoint initial_checkpoint(const EncoderConfig& encoder, const DiscriminatorConfig& disc,
                                   std::uint64_t seed);

/// Text manifest (key=value lines, terminated by "end") followed by a
/// little-endian float32 blob holding every tensor in manifest order.
std::string serialize_checkpoint(const ModelCheckpoint& ckpt);
ModelCheckpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tnc::model

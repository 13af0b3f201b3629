#include "tnc/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "tnc/error.hpp"

namespace tnc::model {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint blob assumes little-endian host");
static_assert(sizeof(float) == 4);

constexpr const char* kMagic = "TNC-CHECKPOINT";

std::uint32_t crc_of(const char* data, std::size_t n) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

long long parse_int(const std::string& key, const std::string& value) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw LoadError("checkpoint: key '" + key + "' has non-integer value '" + value + "'");
  return out;
}

std::vector<std::size_t> parse_shape(const std::string& text) {
  std::vector<std::size_t> shape;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) shape.push_back(static_cast<std::size_t>(parse_int("shape", part)));
  return shape;
}

}  // namespace

ModelCheckpoint initial_checkpoint(const EncoderConfig& encoder, const DiscriminatorConfig& disc,
                                   std::uint64_t seed) {
  ModelCheckpoint ckpt;
  ckpt.encoder_config = encoder;
  ckpt.discriminator_config = disc;
  ckpt.encoder = Encoder<float>(encoder).make_params();
  ckpt.discriminator = Discriminator<float>(disc).make_params();
  Rng rng = derive_rng(seed, 0x1717);
  initialize_encoder(ckpt.encoder, encoder, rng);
  initialize_discriminator(ckpt.discriminator, disc, rng);
  ckpt.seed = seed;
  return ckpt;
}

std::string serialize_checkpoint(const ModelCheckpoint& ckpt) {
  std::vector<float> blob;
  blob.reserve(ckpt.encoder.size() + ckpt.discriminator.size());
  blob.insert(blob.end(), ckpt.encoder.flat().begin(), ckpt.encoder.flat().end());
  blob.insert(blob.end(), ckpt.discriminator.flat().begin(), ckpt.discriminator.flat().end());
  const char* blob_bytes = reinterpret_cast<const char*>(blob.data());
  const std::size_t blob_size = blob.size() * sizeof(float);

  std::ostringstream m;
  const auto& e = ckpt.encoder_config;
  const auto& d = ckpt.discriminator_config;
  m << kMagic << '\n'
    << "version=" << kCheckpointVersion << '\n'
    << "encoder.input_features=" << e.input_features << '\n'
    << "encoder.window_size=" << e.window_size << '\n'
    << "encoder.hidden_size=" << e.hidden_size << '\n'
    << "encoder.encoding_size=" << e.encoding_size << '\n'
    << "encoder.bidirectional=" << (e.bidirectional ? 1 : 0) << '\n'
    << "discriminator.encoding_size=" << d.encoding_size << '\n'
    << "discriminator.hidden_size=" << d.hidden_size << '\n'
    << "seed=" << ckpt.seed << '\n'
    << "epoch=" << ckpt.epoch << '\n';
  for (const auto& [k, v] : ckpt.train_config) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
      throw ContractError("train config key/value not representable: " + k);
    m << "train." << k << '=' << v << '\n';
  }
  std::size_t base = 0;
  for (const auto* store : {&ckpt.encoder, &ckpt.discriminator}) {
    const char* group = store == &ckpt.encoder ? "encoder" : "discriminator";
    for (const auto& t : store->tensors())
      m << "tensor=" << group << ' ' << t.name << ' ' << shape_string(t.shape) << ' '
        << base + t.offset << ' ' << t.size << '\n';
    base += store->size();
  }
  m << "blob_floats=" << blob.size() << '\n'
    << "blob_crc32=" << crc_of(blob_bytes, blob_size) << '\n'
    << "end\n";
  std::string out = m.str();
  out.append(blob_bytes, blob_size);
  return out;
}

ModelCheckpoint deserialize_checkpoint(const std::string& bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string::npos) throw LoadError("checkpoint: truncated manifest");
    std::string line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };
  if (next_line() != kMagic) throw LoadError("checkpoint: bad magic line");

  std::map<std::string, std::string> kv;
  struct TensorLine {
    std::string group, name;
    std::vector<std::size_t> shape;
    std::size_t offset, size;
  };
  std::vector<TensorLine> tensors;
  std::map<std::string, std::string> train;
  for (;;) {
    const std::string line = next_line();
    if (line == "end") break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw LoadError("checkpoint: malformed manifest line '" + line + "'");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "tensor") {
      std::istringstream ss(value);
      TensorLine t;
      std::string shape;
      if (!(ss >> t.group >> t.name >> shape >> t.offset >> t.size))
        throw LoadError("checkpoint: malformed tensor line '" + line + "'");
      t.shape = parse_shape(shape);
      tensors.push_back(std::move(t));
    } else if (key.starts_with("train.")) {
      train[key.substr(6)] = value;
    } else {
      kv[key] = value;
    }
  }
  auto get = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw LoadError("checkpoint: missing key '" + key + "'");
    return parse_int(key, it->second);
  };
  const long long version = get("version");
  if (version != kCheckpointVersion)
    throw LoadError("checkpoint: version " + std::to_string(version) + " not supported (expected " +
                    std::to_string(kCheckpointVersion) + ")");

  ModelCheckpoint ckpt;
  ckpt.encoder_config.input_features = static_cast<int>(get("encoder.input_features"));
  ckpt.encoder_config.window_size = static_cast<int>(get("encoder.window_size"));
  ckpt.encoder_config.hidden_size = static_cast<int>(get("encoder.hidden_size"));
  ckpt.encoder_config.encoding_size = static_cast<int>(get("encoder.encoding_size"));
  ckpt.encoder_config.bidirectional = get("encoder.bidirectional") != 0;
  ckpt.discriminator_config.encoding_size = static_cast<int>(get("discriminator.encoding_size"));
  ckpt.discriminator_config.hidden_size = static_cast<int>(get("discriminator.hidden_size"));
  ckpt.seed = static_cast<std::uint64_t>(get("seed"));
  ckpt.epoch = static_cast<int>(get("epoch"));
  ckpt.train_config = std::move(train);
  try {
    ckpt.encoder_config.validate();
    ckpt.discriminator_config.validate();
  } catch (const ConfigError& e) {
    throw LoadError(std::string("checkpoint: ") + e.what());
  }

  const auto blob_floats = static_cast<std::size_t>(get("blob_floats"));
  const auto blob_crc = static_cast<std::uint32_t>(get("blob_crc32"));
  const std::size_t blob_size = blob_floats * sizeof(float);
  if (bytes.size() - pos != blob_size)
    throw LoadError("checkpoint: blob holds " + std::to_string(bytes.size() - pos) +
                    " bytes, manifest declares " + std::to_string(blob_size));
  if (crc_of(bytes.data() + pos, blob_size) != blob_crc) throw LoadError("checkpoint: blob checksum mismatch");
  std::vector<float> blob(blob_floats);
  std::memcpy(blob.data(), bytes.data() + pos, blob_size);

  // Rebuild the layouts the configs imply, then check the manifest agrees.
  ckpt.encoder = Encoder<float>(ckpt.encoder_config).make_params();
  ckpt.discriminator = Discriminator<float>(ckpt.discriminator_config).make_params();
  if (tensors.size() != ckpt.encoder.tensors().size() + ckpt.discriminator.tensors().size())
    throw LoadError("checkpoint: tensor list does not match the configured architecture");
  std::size_t idx = 0, base = 0;
  for (auto* store : {&ckpt.encoder, &ckpt.discriminator}) {
    const char* group = store == &ckpt.encoder ? "encoder" : "discriminator";
    for (const auto& t : store->tensors()) {
      const auto& line = tensors[idx++];
      if (line.group != group || line.name != t.name || line.shape != t.shape ||
          line.offset != base + t.offset || line.size != t.size)
        throw LoadError("checkpoint: tensor entry for '" + t.name + "' does not match layout");
      if (line.offset + line.size > blob.size()) throw LoadError("checkpoint: tensor exceeds blob");
      std::copy_n(blob.begin() + static_cast<std::ptrdiff_t>(line.offset), line.size,
                  store->flat().begin() + static_cast<std::ptrdiff_t>(t.offset));
    }
    base += store->size();
  }
  if (base != blob.size()) throw LoadError("checkpoint: blob has trailing floats");
  return ckpt;
}

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LoadError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw LoadError("write to '" + path.string() + "' failed");
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace tnc::model

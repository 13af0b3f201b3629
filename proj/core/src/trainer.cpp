#include "tnc/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <mutex>
#include <sstream>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "tnc/error.hpp"
#include "tnc/objective.hpp"
#include "tnc/parallel.hpp"
#include "tnc/sampling.hpp"

namespace tnc::train {

using model::Mat;

void TrainConfig::validate() const {
  if (delta < 1) throw ConfigError("delta must be >= 1");
  if (encoding_size < 1) throw ConfigError("encoding_size must be >= 1");
  if (hidden_size < 1) throw ConfigError("hidden_size must be >= 1");
  if (discriminator_hidden < 0) throw ConfigError("discriminator_hidden must be >= 0");
  if (!(w >= 0.0 && w < 1.0)) throw ConfigError("w must lie in [0, 1)");
  if (samples_per_anchor < 1 || anchors_per_instance < 1 || anchors_per_batch < 1 || epochs < 1)
    throw ConfigError("sample, anchor, batch and epoch counts must be >= 1");
  if (validation_anchors_per_instance < 1)
    throw ConfigError("validation_anchors_per_instance must be >= 1");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("Adam decay rates must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (eta_max < 1) throw ConfigError("eta_max must be >= 1");
  if (!(p_threshold >= 0.0 && p_threshold <= 1.0)) throw ConfigError("p_threshold must lie in [0, 1]");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw ConfigError("validation_fraction must lie in [0, 1)");
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

model::EncoderConfig TrainConfig::encoder_config(int input_features) const {
  return {.input_features = input_features, .window_size = delta, .hidden_size = hidden_size,
          .encoding_size = encoding_size, .bidirectional = bidirectional};
}

model::DiscriminatorConfig TrainConfig::discriminator_config() const {
  return {.encoding_size = encoding_size,
          .hidden_size = discriminator_hidden > 0 ? discriminator_hidden : 4 * encoding_size};
}

std::map<std::string, std::string> TrainConfig::to_map() const {
  std::map<std::string, std::string> m;
  auto put = [&](const char* k, auto v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    m[k] = ss.str();
  };
  put("delta", delta);
  put("encoding_size", encoding_size);
  put("hidden_size", hidden_size);
  put("discriminator_hidden", discriminator_hidden);
  put("bidirectional", bidirectional ? 1 : 0);
  put("w", w);
  put("samples_per_anchor", samples_per_anchor);
  put("anchors_per_instance", anchors_per_instance);
  put("anchors_per_batch", anchors_per_batch);
  put("validation_anchors_per_instance", validation_anchors_per_instance);
  put("epochs", epochs);
  put("learning_rate", learning_rate);
  put("beta1", beta1);
  put("beta2", beta2);
  put("adam_eps", adam_eps);
  put("weight_decay", weight_decay);
  put("seed", seed);
  put("eta_max", eta_max);
  put("p_threshold", p_threshold);
  m["policy"] = stationarity::to_string(policy);
  put("validation_fraction", validation_fraction);
  return m;
}

Adam::Adam(std::size_t size, double learning_rate, double beta1, double beta2, double eps,
           double weight_decay)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay),
      m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<float> params, std::span<const float> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw ContractError("Adam: parameter/gradient size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = static_cast<double>(grads[i]) + weight_decay_ * params[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
    const double update = lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    params[i] = static_cast<float>(params[i] - update);
  }
}

std::string format_epoch(const EpochRecord& r) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(5) << "epoch=" << r.epoch << " loss=" << r.train.total
     << " neighbor=" << r.train.neighbor_term
     << " nonneighbor_neg=" << r.train.nonneighbor_negative_term
     << " nonneighbor_pos=" << r.train.nonneighbor_positive_term
     << " accuracy=" << r.train.discriminator_accuracy << " val_loss=" << r.validation.total
     << " val_accuracy=" << r.validation.discriminator_accuracy << std::setprecision(3)
     << " mean_eta=" << r.mean_eta << " anchors=" << r.anchors << " skipped=" << r.skipped_anchors
     << std::setprecision(2) << " seconds=" << r.seconds;
  return ss.str();
}

void split_instances(std::size_t n, double validation_fraction, std::uint64_t seed,
                     std::vector<std::size_t>& train, std::vector<std::size_t>& validation) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = derive_rng(seed, 0x5717);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t n_val = static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(n)));
  if (n_val >= n) n_val = n > 1 ? n - 1 : 0;
  validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(validation.begin(), validation.end());
  std::sort(train.begin(), train.end());
}

namespace {

struct AnchorSample {
  std::size_t instance = 0;
  std::size_t center = 0;
  int eta = 1;
  std::vector<std::size_t> neighbors;
  std::vector<std::size_t> non_neighbors;
};

class Run {
 public:
  Run(const TimeSeriesDataset& data, const TrainConfig& cfg) : data_(data), cfg_(cfg) {
    eta_options_ = {.p_threshold = cfg.p_threshold, .eta_max = cfg.eta_max, .policy = cfg.policy};
    reach_ = static_cast<std::size_t>(cfg.eta_max) * static_cast<std::size_t>(cfg.delta);
    if (data.length() < 2 * reach_)
      throw ConfigError("series length " + std::to_string(data.length()) +
                        " is too short for eta_max * delta = " + std::to_string(reach_) +
                        " on both sides of an anchor");
  }

  std::size_t draw_center(Rng& rng) const {
    return std::uniform_int_distribution<std::size_t>(reach_, data_.length() - reach_)(rng);
  }

  // eta for every anchor (parallel, memoized), then sequential sampling.
  std::vector<AnchorSample> complete(std::vector<AnchorSample> anchors, Rng& rng, int& skipped) {
    parallel_for(anchors.size(), cfg_.threads, [&](std::size_t i) {
      auto& a = anchors[i];
      a.eta = cache_.get_or_compute(a.instance, a.center, cfg_.delta, [&] {
        return stationarity::estimate_eta(data_.instance(a.instance), a.center, cfg_.delta,
                                          eta_options_)
            .eta;
      });
    });
    std::vector<AnchorSample> out;
    out.reserve(anchors.size());
    const auto count = static_cast<std::size_t>(cfg_.samples_per_anchor);
    for (auto& a : anchors) {
      const stationarity::NeighborhoodSpec spec{.eta = a.eta, .eta_max = cfg_.eta_max,
                                                .delta = cfg_.delta, .p_threshold = cfg_.p_threshold};
      try {
        a.neighbors = sample_neighbor_centers(a.center, data_.length(), spec, count, rng);
        a.non_neighbors = sample_non_neighbor_centers(a.center, data_.length(), spec, count, rng);
      } catch (const SamplingError&) {
        ++skipped;
        continue;
      }
      out.push_back(std::move(a));
    }
    return out;
  }

  PairBatch<float> pack(std::span<const AnchorSample> anchors) const {
    PairBatch<float> batch;
    batch.anchors = static_cast<Eigen::Index>(anchors.size());
    batch.neighbors_per_anchor = cfg_.samples_per_anchor;
    batch.non_neighbors_per_anchor = cfg_.samples_per_anchor;
    const Eigen::Index b = batch.windows();
    const Eigen::Index delta = cfg_.delta;
    batch.inputs.resize(static_cast<Eigen::Index>(data_.n_features()), delta * b);
    Eigen::Index col = 0;
    auto put = [&](std::size_t instance, std::size_t center) {
      const InstanceView x = data_.instance(instance);
      const Eigen::Index start = window_start(center, cfg_.delta);
      for (Eigen::Index s = 0; s < delta; ++s) batch.inputs.col(s * b + col) = x.col(start + s);
      ++col;
    };
    for (const auto& a : anchors) put(a.instance, a.center);
    for (const auto& a : anchors)
      for (auto c : a.neighbors) put(a.instance, c);
    for (const auto& a : anchors)
      for (auto c : a.non_neighbors) put(a.instance, c);
    return batch;
  }

 private:
  const TimeSeriesDataset& data_;
  const TrainConfig& cfg_;
  stationarity::EtaOptions eta_options_;
  stationarity::EtaCache cache_;
  std::size_t reach_ = 0;
};

void accumulate(BatchLoss& acc, const BatchLoss& l, double weight) {
  acc.total += weight * l.total;
  acc.neighbor_term += weight * l.neighbor_term;
  acc.nonneighbor_negative_term += weight * l.nonneighbor_negative_term;
  acc.nonneighbor_positive_term += weight * l.nonneighbor_positive_term;
  acc.discriminator_accuracy += weight * l.discriminator_accuracy;
}

void scale(BatchLoss& l, double s) {
  l.total *= s;
  l.neighbor_term *= s;
  l.nonneighbor_negative_term *= s;
  l.nonneighbor_positive_term *= s;
  l.discriminator_accuracy *= s;
}

}  // namespace

namespace {

// Keeps multi-megabyte activation buffers on the heap between batches.
void keep_large_buffers() {
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 32 << 20);
    mallopt(M_TRIM_THRESHOLD, 256 << 20);
  });
#endif
}

}  // namespace

TrainResult train(const TimeSeriesDataset& data, const TrainConfig& cfg, std::ostream* log) {
  keep_large_buffers();
  cfg.validate();
  data.validate();
  if (data.n_instances() == 0) throw ConfigError("training dataset is empty");
  if (data.length() < static_cast<std::size_t>(cfg.delta))
    throw ConfigError("delta exceeds series length");

  Run run(data, cfg);
  TrainResult result;
  split_instances(data.n_instances(), cfg.validation_fraction, cfg.seed, result.train_instances,
                  result.validation_instances);

  model::ModelCheckpoint ckpt = model::initial_checkpoint(
      cfg.encoder_config(static_cast<int>(data.n_features())), cfg.discriminator_config(), cfg.seed);
  ckpt.train_config = cfg.to_map();
  const model::Encoder<float> encoder(ckpt.encoder_config);
  const model::Discriminator<float> disc(ckpt.discriminator_config);
  Adam enc_opt(ckpt.encoder.size(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps,
               cfg.weight_decay);
  Adam disc_opt(ckpt.discriminator.size(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps,
                cfg.weight_decay);

  // Fixed validation anchors so epochs are compared on the same pairs.
  std::vector<PairBatch<float>> val_batches;
  std::vector<double> val_weights;
  {
    Rng rng = derive_rng(cfg.seed, 2);
    std::vector<AnchorSample> anchors;
    for (auto inst : result.validation_instances)
      for (int j = 0; j < cfg.validation_anchors_per_instance; ++j)
        anchors.push_back(AnchorSample{inst, run.draw_center(rng), 1, {}, {}});
    int skipped = 0;
    const auto ready = run.complete(std::move(anchors), rng, skipped);
    for (std::size_t i = 0; i < ready.size(); i += static_cast<std::size_t>(cfg.anchors_per_batch)) {
      const std::size_t n = std::min(ready.size() - i, static_cast<std::size_t>(cfg.anchors_per_batch));
      val_batches.push_back(run.pack(std::span(ready).subspan(i, n)));
      val_weights.push_back(static_cast<double>(n));
    }
  }

  double best = std::numeric_limits<double>::infinity();
  Gradients<float> grads{ckpt.encoder.zeros_like(), ckpt.discriminator.zeros_like()};

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    Rng rng = derive_rng(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch));
    std::vector<std::size_t> order = result.train_instances;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<AnchorSample> anchors;
    for (auto inst : order)
      for (int j = 0; j < cfg.anchors_per_instance; ++j)
        anchors.push_back(AnchorSample{inst, run.draw_center(rng), 1, {}, {}});

    EpochRecord rec;
    rec.epoch = epoch;
    double eta_sum = 0.0;
    for (std::size_t i = 0; i < anchors.size(); i += static_cast<std::size_t>(cfg.anchors_per_batch)) {
      const std::size_t n = std::min(anchors.size() - i, static_cast<std::size_t>(cfg.anchors_per_batch));
      std::vector<AnchorSample> chunk(anchors.begin() + static_cast<std::ptrdiff_t>(i),
                                      anchors.begin() + static_cast<std::ptrdiff_t>(i + n));
      const auto ready = run.complete(std::move(chunk), rng, rec.skipped_anchors);
      if (ready.empty()) continue;
      for (const auto& a : ready) eta_sum += a.eta;
      const PairBatch<float> batch = run.pack(ready);

      std::fill(grads.encoder.flat().begin(), grads.encoder.flat().end(), 0.0f);
      std::fill(grads.discriminator.flat().begin(), grads.discriminator.flat().end(), 0.0f);
      BatchLoss loss;
      try {
        loss = tnc_objective(encoder, ckpt.encoder, disc, ckpt.discriminator, batch, cfg.w, &grads);
      } catch (const NumericalError& e) {
        throw TrainingError("epoch " + std::to_string(epoch) + ", anchors " + std::to_string(i) +
                            ".." + std::to_string(i + n - 1) + ": " + e.what());
      }
      enc_opt.step(ckpt.encoder.flat(), grads.encoder.flat());
      disc_opt.step(ckpt.discriminator.flat(), grads.discriminator.flat());
      accumulate(rec.train, loss, static_cast<double>(ready.size()));
      rec.anchors += static_cast<int>(ready.size());
    }
    if (rec.anchors == 0) throw TrainingError("epoch " + std::to_string(epoch) + ": every anchor was skipped");
    scale(rec.train, 1.0 / rec.anchors);
    rec.mean_eta = eta_sum / rec.anchors;

    double val_total = 0.0;
    for (std::size_t b = 0; b < val_batches.size(); ++b) {
      accumulate(rec.validation,
                 tnc_objective(encoder, ckpt.encoder, disc, ckpt.discriminator, val_batches[b], cfg.w),
                 val_weights[b]);
      val_total += val_weights[b];
    }
    if (val_total > 0) scale(rec.validation, 1.0 / val_total);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    ckpt.epoch = epoch;
    const double score = val_total > 0 ? rec.validation.total : rec.train.total;
    if (score < best) {
      best = score;
      result.checkpoint = ckpt;
      result.best_epoch = epoch;
    }
    result.history.push_back(rec);
    if (log) *log << format_epoch(rec) << std::endl;
  }
  result.last = ckpt;
  return result;
}

}  // namespace tnc::train

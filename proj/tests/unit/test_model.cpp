#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tnc/checkpoint.hpp"
#include "tnc/discriminator.hpp"
#include "tnc/encoder.hpp"
#include "tnc/error.hpp"

using namespace tnc;
using namespace tnc::model;

namespace {

ParamStore<double> random_params(ParamStore<double> p, std::uint64_t seed, double scale = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  for (auto& v : p.flat()) v = g(rng);
  return p;
}

std::vector<std::vector<double>> random_window(int d, int l, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> w(static_cast<std::size_t>(d), std::vector<double>(static_cast<std::size_t>(l)));
  for (auto& row : w)
    for (auto& v : row) v = g(rng);
  return w;
}

Mat<double> to_mat(const std::vector<std::vector<double>>& w) {
  Mat<double> m(static_cast<Eigen::Index>(w.size()), static_cast<Eigen::Index>(w[0].size()));
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < w[0].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w[i][j];
  return m;
}

}  // namespace

TEST(ParamStore, LayoutAndErrors) {
  ParamStore<float> p;
  p.add("a", {2, 3});
  p.add("b", {4});
  EXPECT_EQ(p.size(), 10u);
  EXPECT_EQ(p.info("b").offset, 6u);
  EXPECT_THROW(p.add("a", {1}), ContractError);
  EXPECT_THROW(p.add("c", {1, 2, 3}), ContractError);
  EXPECT_THROW(p.info("missing"), ContractError);
  p.matrix("a")(1, 2) = 5.0f;
  EXPECT_EQ(p.flat()[5], 5.0f);  // column-major
  p.values("b")[0] = std::nanf("");
  try {
    p.check_finite("probe");
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos);
  }
  const auto d = p.cast<double>();
  EXPECT_TRUE(p.same_layout(d));
}

TEST(Encoder, ParameterShapes) {
  const EncoderConfig cfg{.input_features = 3, .window_size = 50, .hidden_size = 8, .encoding_size = 10};
  const auto p = Encoder<float>(cfg).make_params();
  EXPECT_EQ(p.info("gru.fwd.w_ih").shape, (std::vector<std::size_t>{24, 3}));
  EXPECT_EQ(p.info("gru.bwd.w_hh").shape, (std::vector<std::size_t>{24, 8}));
  EXPECT_EQ(p.info("proj.weight").shape, (std::vector<std::size_t>{10, 16}));
  EncoderConfig uni = cfg;
  uni.bidirectional = false;
  const auto q = Encoder<float>(uni).make_params();
  EXPECT_FALSE(q.contains("gru.bwd.w_ih"));
  EXPECT_EQ(q.info("proj.weight").shape, (std::vector<std::size_t>{10, 8}));
}

TEST(Encoder, MatchesScalarRecurrence) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 12; ++trial) {
    const EncoderConfig cfg{.input_features = 1 + trial % 3, .window_size = 3 + trial % 5,
                            .hidden_size = 2 + trial % 4, .encoding_size = 2 + trial % 3,
                            .bidirectional = trial % 2 == 0};
    const Encoder<double> enc(cfg);
    const auto p = random_params(enc.make_params(), 100 + static_cast<std::uint64_t>(trial));
    std::vector<Mat<double>> windows;
    std::vector<std::vector<std::vector<double>>> raw;
    for (int b = 0; b < 4; ++b) {
      raw.push_back(random_window(cfg.input_features, cfg.window_size, rng));
      windows.push_back(to_mat(raw.back()));
    }
    const Mat<double> z = enc.forward(p, pack_windows<double>(windows), 4);
    for (int b = 0; b < 4; ++b) {
      const auto expect = oracle::gru_window(p, cfg, raw[static_cast<std::size_t>(b)]);
      for (int m = 0; m < cfg.encoding_size; ++m) EXPECT_NEAR(z(m, b), expect[static_cast<std::size_t>(m)], 1e-12);
      const Vec<double> single = encoder_forward(p, cfg, windows[static_cast<std::size_t>(b)]);
      for (int m = 0; m < cfg.encoding_size; ++m) EXPECT_NEAR(single(m), z(m, b), 1e-12);
    }
  }
}

TEST(Encoder, BatchCompositionDoesNotChangeEncodings) {
  const EncoderConfig cfg{.input_features = 3, .window_size = 10, .hidden_size = 6, .encoding_size = 4};
  const Encoder<double> enc(cfg);
  const auto p = random_params(enc.make_params(), 9);
  std::mt19937_64 rng(1);
  std::vector<Mat<double>> w;
  for (int i = 0; i < 5; ++i) w.push_back(to_mat(random_window(3, 10, rng)));
  const auto all = enc.forward(p, pack_windows<double>(w), 5);
  std::vector<Mat<double>> tail(w.begin() + 2, w.end());
  const auto part = enc.forward(p, pack_windows<double>(tail), 3);
  EXPECT_LT((all.rightCols(3) - part).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Encoder, RejectsBadInputs) {
  const EncoderConfig cfg{.input_features = 3, .window_size = 10, .hidden_size = 4, .encoding_size = 2};
  const Encoder<float> enc(cfg);
  const auto p = enc.make_params();
  EXPECT_THROW(enc.forward(p, Mat<float>::Zero(2, 20), 2), ContractError);
  EXPECT_THROW(enc.forward(p, Mat<float>::Zero(3, 25), 2), ContractError);
  EncoderConfig bad = cfg;
  bad.hidden_size = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Encoder, InitializationBounds) {
  const EncoderConfig cfg{.input_features = 3, .window_size = 50, .hidden_size = 16, .encoding_size = 10};
  auto p = Encoder<float>(cfg).make_params();
  Rng rng = derive_rng(1, 2);
  initialize_encoder(p, cfg, rng);
  for (auto v : p.values("gru.fwd.w_hh")) EXPECT_LE(std::abs(v), 1.0 / std::sqrt(16.0) + 1e-7);
  for (auto v : p.values("proj.weight")) EXPECT_LE(std::abs(v), 1.0 / std::sqrt(32.0) + 1e-7);
  double spread = 0;
  for (auto v : p.values("gru.bwd.w_ih")) spread = std::max(spread, static_cast<double>(std::abs(v)));
  EXPECT_GT(spread, 0.1);
}

TEST(Discriminator, MatchesDirectFormula) {
  const DiscriminatorConfig cfg{.encoding_size = 3, .hidden_size = 5};
  const Discriminator<double> disc(cfg);
  const auto p = random_params(disc.make_params(), 12);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Mat<double> za(3, 4), zo(3, 4);
  for (Eigen::Index i = 0; i < za.size(); ++i) {
    za.data()[i] = g(rng);
    zo.data()[i] = g(rng);
  }
  const auto logits = disc.logits(p, za, zo);
  const auto w1 = p.matrix("fc1.weight");
  const auto b1 = p.vector("fc1.bias");
  const auto w2 = p.matrix("fc2.weight");
  const auto b2 = p.vector("fc2.bias");
  for (int c = 0; c < 4; ++c) {
    double out = b2(0);
    for (int h = 0; h < 5; ++h) {
      double a = b1(h);
      for (int k = 0; k < 3; ++k) a += w1(h, k) * za(k, c) + w1(h, 3 + k) * zo(k, c);
      out += w2(0, h) * std::max(0.0, a);
    }
    EXPECT_NEAR(logits(0, c), out, 1e-12);
    const Vec<double> va = za.col(c), vo = zo.col(c);
    EXPECT_NEAR(discriminator_forward(p, cfg, va, vo), 1.0 / (1.0 + std::exp(-out)), 1e-12);
  }
}

TEST(Discriminator, SigmoidIsStable) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_GT(sigmoid(-800.0), -1e-300);
  EXPECT_DOUBLE_EQ(sigmoid(800.0), 1.0);
  EXPECT_TRUE(std::isfinite(sigmoid(-800.0f)));
}

TEST(Gradient, FiniteDifferencesAgree) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto r = oracle::gradient_check(seed);
    EXPECT_LT(r.max_relative_error, 1e-5) << "seed " << seed << " worst " << r.worst << " analytic " << r.worst_analytic
                                        << " numeric " << r.worst_numeric;
    EXPECT_GT(r.parameters, 10u);
  }
}

TEST(Checkpoint, RoundTripIsExact) {
  const EncoderConfig ec{.input_features = 3, .window_size = 50, .hidden_size = 8, .encoding_size = 10};
  const DiscriminatorConfig dc{.encoding_size = 10, .hidden_size = 40};
  ModelCheckpoint ck = initial_checkpoint(ec, dc, 42);
  ck.train_config = {{"w", "0.05"}, {"delta", "50"}};
  ck.epoch = 7;
  const auto bytes = serialize_checkpoint(ck);
  EXPECT_EQ(bytes.rfind("TNC-CHECKPOINT", 0), 0u);
  EXPECT_EQ(deserialize_checkpoint(bytes), ck);
  EXPECT_EQ(serialize_checkpoint(deserialize_checkpoint(bytes)), bytes);
}

TEST(Checkpoint, SeededInitialization) {
  const EncoderConfig ec{.hidden_size = 8};
  const DiscriminatorConfig dc;
  EXPECT_EQ(initial_checkpoint(ec, dc, 1), initial_checkpoint(ec, dc, 1));
  EXPECT_FALSE(initial_checkpoint(ec, dc, 1) == initial_checkpoint(ec, dc, 2));
}

TEST(Checkpoint, CorruptionDetected) {
  const ModelCheckpoint ck = initial_checkpoint({.hidden_size = 4}, {}, 3);
  std::string bytes = serialize_checkpoint(ck);
  std::string flipped = bytes;
  flipped[flipped.size() - 3] ^= 0x10;
  EXPECT_THROW(deserialize_checkpoint(flipped), LoadError);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() - 8)), LoadError);
  std::string version = bytes;
  version.replace(version.find("version=1"), 9, "version=9");
  EXPECT_THROW(deserialize_checkpoint(version), LoadError);
  EXPECT_THROW(load_checkpoint("/nonexistent/ckpt.tnc"), LoadError);
}

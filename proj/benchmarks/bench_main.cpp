#include <benchmark/benchmark.h>

#include <random>

#include "tnc/encoder.hpp"
#include "tnc/eval/dtw.hpp"
#include "tnc/objective.hpp"
#include "tnc/rng.hpp"
#include "tnc/simgen.hpp"
#include "tnc/stationarity.hpp"

using namespace tnc;

namespace {

model::Mat<float> random_inputs(int d, Eigen::Index cols, std::uint64_t seed) {
  Rng rng = derive_rng(seed, 0);
  std::normal_distribution<float> g;
  model::Mat<float> m(d, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

model::ParamStore<float> random_encoder(const model::Encoder<float>& enc) {
  auto p = enc.make_params();
  Rng rng = derive_rng(3, 1);
  model::initialize_encoder(p, enc.config(), rng);
  return p;
}

void BM_EncoderForward(benchmark::State& state) {
  const model::EncoderConfig cfg{.input_features = 3, .window_size = 50, .hidden_size = int(state.range(0)),
                                 .encoding_size = 10};
  const model::Encoder<float> enc(cfg);
  const auto params = random_encoder(enc);
  const Eigen::Index batch = 128;
  const auto x = random_inputs(3, 50 * batch, 1);
  for (auto _ : state) benchmark::DoNotOptimize(enc.forward(params, x, batch));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_EncoderForward)->Arg(32)->Arg(64);

void BM_EncoderForwardBackward(benchmark::State& state) {
  const model::EncoderConfig cfg{.input_features = 3, .window_size = 50, .hidden_size = int(state.range(0)),
                                 .encoding_size = 10};
  const model::Encoder<float> enc(cfg);
  const auto params = random_encoder(enc);
  const Eigen::Index batch = 128;
  const auto x = random_inputs(3, 50 * batch, 2);
  const model::Mat<float> d_out = model::Mat<float>::Ones(10, batch);
  auto grads = params.zeros_like();
  for (auto _ : state) {
    model::EncoderTape<float> tape;
    enc.forward(params, x, batch, &tape);
    enc.backward(params, tape, d_out, grads);
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_EncoderForwardBackward)->Arg(32)->Arg(64);

void BM_Adf(benchmark::State& state) {
  Rng rng = derive_rng(4, 0);
  std::normal_distribution<double> g;
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(stationarity::adf_test(x));
}
BENCHMARK(BM_Adf)->Arg(100)->Arg(300)->Arg(500);

void BM_EtaEstimate(benchmark::State& state) {
  const auto data = simgen::assemble_dataset(simgen::benchmark_generator(), simgen::benchmark_hmm(), 1, 2000, 5);
  const auto inst = data.instance(0);
  std::size_t t = 150;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stationarity::estimate_eta(inst, t, 50, {}));
    t = t >= 1800 ? 150 : t + 37;
  }
}
BENCHMARK(BM_EtaEstimate);

void BM_Dtw(benchmark::State& state) {
  const Eigen::Index len = state.range(0);
  const eval::Matrix a = random_inputs(3, len, 6).cast<double>();
  const eval::Matrix b = random_inputs(3, len, 7).cast<double>();
  for (auto _ : state) benchmark::DoNotOptimize(eval::dtw_distance(a, b));
}
BENCHMARK(BM_Dtw)->Arg(50)->Arg(200);

void BM_GpSample(benchmark::State& state) {
  simgen::GpFactorCache cache;
  const auto spec = simgen::ProcessSpec::gp_squared_exp();
  Rng rng = derive_rng(8, 0);
  cache.factor(spec, 2000);
  for (auto _ : state) benchmark::DoNotOptimize(cache.sample(spec, 2000, rng));
}
BENCHMARK(BM_GpSample);

}  // namespace

BENCHMARK_MAIN();

#include "tnc/encoder.hpp"

#include <cmath>
#include <string>

#include "tnc/error.hpp"

namespace tnc::model {

namespace {

const char* kDirNames[] = {"gru.fwd", "gru.bwd"};

std::string tensor(int dir, const char* leaf) { return std::string(kDirNames[dir]) + "." + leaf; }

template <typename T>
void sigmoid_inplace(Eigen::Ref<Mat<T>> m) {
  m = (T(1) + (-m.array()).exp()).inverse().matrix();
}

}  // namespace

void EncoderConfig::validate() const {
  if (input_features < 1) throw ConfigError("encoder input_features must be >= 1");
  if (window_size < 1) throw ConfigError("encoder window_size must be >= 1");
  if (hidden_size < 1) throw ConfigError("encoder hidden_size must be >= 1");
  if (encoding_size < 1) throw ConfigError("encoder encoding_size must be >= 1");
}

template <typename T>
Encoder<T>::Encoder(EncoderConfig config) : config_(config) {
  config_.validate();
}

template <typename T>
ParamStore<T> Encoder<T>::make_params() const {
  const auto d = static_cast<std::size_t>(config_.input_features);
  const auto h = static_cast<std::size_t>(config_.hidden_size);
  const auto m = static_cast<std::size_t>(config_.encoding_size);
  ParamStore<T> p;
  for (int dir = 0; dir < config_.directions(); ++dir) {
    p.add(tensor(dir, "w_ih"), {3 * h, d});
    p.add(tensor(dir, "w_hh"), {3 * h, h});
    p.add(tensor(dir, "b_ih"), {3 * h});
    p.add(tensor(dir, "b_hh"), {3 * h});
  }
  p.add("proj.weight", {m, h * static_cast<std::size_t>(config_.directions())});
  p.add("proj.bias", {m});
  return p;
}

template <typename T>
void Encoder<T>::check_inputs(const Mat<T>& inputs, Eigen::Index batch) const {
  if (batch < 1) throw ContractError("encoder batch must be >= 1");
  if (inputs.rows() != config_.input_features || inputs.cols() != config_.window_size * batch)
    throw ContractError("encoder input is " + std::to_string(inputs.rows()) + "x" +
                        std::to_string(inputs.cols()) + ", expected " +
                        std::to_string(config_.input_features) + "x" +
                        std::to_string(config_.window_size * batch));
}

template <typename T>
Mat<T> Encoder<T>::forward(const ParamStore<T>& params, const Mat<T>& inputs, Eigen::Index batch,
                           EncoderTape<T>* tape) const {
  check_inputs(inputs, batch);
  const Eigen::Index hs = config_.hidden_size;
  const Eigen::Index steps = config_.window_size;
  const int ndir = config_.directions();

  Mat<T> finals(hs * ndir, batch);
  if (tape) {
    tape->inputs = inputs;
    tape->batch = batch;
    tape->dirs.assign(static_cast<std::size_t>(ndir), {});
  }

  Mat<T> h(hs, batch), gh(3 * hs, batch), r(hs, batch), z(hs, batch), n(hs, batch);
  for (int dir = 0; dir < ndir; ++dir) {
    const auto w_ih = params.matrix(tensor(dir, "w_ih"));
    const auto w_hh = params.matrix(tensor(dir, "w_hh"));
    const auto b_ih = params.vector(tensor(dir, "b_ih"));
    const auto b_hh = params.vector(tensor(dir, "b_hh"));

    Mat<T> gi = w_ih * inputs;
    gi.colwise() += b_ih;

    typename EncoderTape<T>::Direction* rec = nullptr;
    if (tape) {
      rec = &tape->dirs[static_cast<std::size_t>(dir)];
      for (Mat<T>* m : {&rec->h_prev, &rec->r, &rec->z, &rec->n, &rec->hn})
        m->resize(hs, steps * batch);
    }

    h.setZero();
    for (Eigen::Index k = 0; k < steps; ++k) {
      const Eigen::Index s = dir == 0 ? k : steps - 1 - k;
      const auto gi_s = gi.middleCols(s * batch, batch);
      gh.noalias() = w_hh * h;
      gh.colwise() += b_hh;
      r = gi_s.topRows(hs) + gh.topRows(hs);
      sigmoid_inplace<T>(r);
      z = gi_s.middleRows(hs, hs) + gh.middleRows(hs, hs);
      sigmoid_inplace<T>(z);
      n = (gi_s.bottomRows(hs).array() + r.array() * gh.bottomRows(hs).array()).tanh().matrix();
      if (rec) {
        rec->h_prev.middleCols(k * batch, batch) = h;
        rec->r.middleCols(k * batch, batch) = r;
        rec->z.middleCols(k * batch, batch) = z;
        rec->n.middleCols(k * batch, batch) = n;
        rec->hn.middleCols(k * batch, batch) = gh.bottomRows(hs);
      }
      h = ((T(1) - z.array()) * n.array() + z.array() * h.array()).matrix();
    }
    finals.middleRows(dir * hs, hs) = h;
  }

  Mat<T> out = params.matrix("proj.weight") * finals;
  out.colwise() += params.vector("proj.bias");
  if (tape) tape->final_states = finals;
  return out;
}

template <typename T>
void Encoder<T>::backward(const ParamStore<T>& params, const EncoderTape<T>& tape,
                          const Mat<T>& d_output, ParamStore<T>& grads) const {
  const Eigen::Index hs = config_.hidden_size;
  const Eigen::Index steps = config_.window_size;
  const Eigen::Index batch = tape.batch;
  if (d_output.rows() != config_.encoding_size || d_output.cols() != batch)
    throw ContractError("encoder output gradient has wrong shape");

  grads.matrix("proj.weight").noalias() += d_output * tape.final_states.transpose();
  grads.vector("proj.bias") += d_output.rowwise().sum();
  const Mat<T> d_finals = params.matrix("proj.weight").transpose() * d_output;

  Mat<T> dh(hs, batch), dgh_step(3 * hs, batch);
  for (int dir = 0; dir < config_.directions(); ++dir) {
    const auto& rec = tape.dirs[static_cast<std::size_t>(dir)];
    const auto w_hh = params.matrix(tensor(dir, "w_hh"));
    // dgi in input (step-major) order, dgh in processing order to match h_prev
    Mat<T> dgi(3 * hs, steps * batch), dgh(3 * hs, steps * batch);
    dh = d_finals.middleRows(dir * hs, hs);
    for (Eigen::Index k = steps - 1; k >= 0; --k) {
      const Eigen::Index s = dir == 0 ? k : steps - 1 - k;
      const auto r = rec.r.middleCols(k * batch, batch).array();
      const auto z = rec.z.middleCols(k * batch, batch).array();
      const auto n = rec.n.middleCols(k * batch, batch).array();
      const auto hn = rec.hn.middleCols(k * batch, batch).array();
      const auto hp = rec.h_prev.middleCols(k * batch, batch).array();

      const auto dn = dh.array() * (T(1) - z);
      const auto da_n = dn * (T(1) - n * n);
      const auto da_r = da_n * hn * r * (T(1) - r);
      const auto da_z = dh.array() * (hp - n) * z * (T(1) - z);

      dgh_step.topRows(hs) = da_r.matrix();
      dgh_step.middleRows(hs, hs) = da_z.matrix();
      dgh_step.bottomRows(hs) = (da_n * r).matrix();

      auto dgi_s = dgi.middleCols(s * batch, batch);
      dgi_s.topRows(hs) = dgh_step.topRows(hs);
      dgi_s.middleRows(hs, hs) = dgh_step.middleRows(hs, hs);
      dgi_s.bottomRows(hs) = da_n.matrix();
      dgh.middleCols(k * batch, batch) = dgh_step;

      dh = (dh.array() * z).matrix();
      dh.noalias() += w_hh.transpose() * dgh_step;
    }
    grads.matrix(tensor(dir, "w_ih")).noalias() += dgi * tape.inputs.transpose();
    grads.vector(tensor(dir, "b_ih")) += dgi.rowwise().sum();
    grads.matrix(tensor(dir, "w_hh")).noalias() += dgh * rec.h_prev.transpose();
    grads.vector(tensor(dir, "b_hh")) += dgh.rowwise().sum();
  }
}

template <typename T>
Mat<T> pack_windows(std::span<const Mat<T>> windows) {
  if (windows.empty()) throw ContractError("pack_windows: no windows");
  const Eigen::Index d = windows[0].rows();
  const Eigen::Index steps = windows[0].cols();
  const auto batch = static_cast<Eigen::Index>(windows.size());
  Mat<T> out(d, steps * batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto& w = windows[static_cast<std::size_t>(b)];
    if (w.rows() != d || w.cols() != steps) throw ContractError("pack_windows: mixed window shapes");
    for (Eigen::Index s = 0; s < steps; ++s) out.col(s * batch + b) = w.col(s);
  }
  return out;
}

template <typename T>
Vec<T> encoder_forward(const ParamStore<T>& params, const EncoderConfig& config,
                       const Mat<T>& window) {
  if (window.rows() != config.input_features || window.cols() != config.window_size)
    throw ContractError("window is " + std::to_string(window.rows()) + "x" +
                        std::to_string(window.cols()) + ", encoder expects " +
                        std::to_string(config.input_features) + "x" +
                        std::to_string(config.window_size));
  Encoder<T> enc(config);
  // a single window's step-major layout is the window itself
  return enc.forward(params, window, 1).col(0);
}

void initialize_encoder(ParamStore<float>& params, const EncoderConfig& config, Rng& rng) {
  const double rec_bound = 1.0 / std::sqrt(static_cast<double>(config.hidden_size));
  for (int dir = 0; dir < config.directions(); ++dir)
    for (const char* leaf : {"w_ih", "w_hh", "b_ih", "b_hh"})
      params.fill_uniform(tensor(dir, leaf), rec_bound, rng);
  const double proj_bound =
      1.0 / std::sqrt(static_cast<double>(config.hidden_size * config.directions()));
  params.fill_uniform("proj.weight", proj_bound, rng);
  params.fill_uniform("proj.bias", proj_bound, rng);
}

template class Encoder<float>;
template class Encoder<double>;
template Mat<float> pack_windows<float>(std::span<const Mat<float>>);
template Mat<double> pack_windows<double>(std::span<const Mat<double>>);
template Vec<float> encoder_forward<float>(const ParamStore<float>&, const EncoderConfig&,
                                           const Mat<float>&);
template Vec<double> encoder_forward<double>(const ParamStore<double>&, const EncoderConfig&,
                                             const Mat<double>&);

}  // namespace tnc::model

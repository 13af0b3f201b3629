#pragma once

#include <span>
#include <vector>

#include "tnc/params.hpp"
#include "tnc/rng.hpp"

namespace tnc::model {

struct EncoderConfig {
  int input_features = 3;
  int window_size = 50;
  int hidden_size = 64;
  int encoding_size = 10;
  bool bidirectional = true;

  int directions() const { return bidirectional ? 2 : 1; }
  void validate() const;
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

/// Activations recorded by a forward pass, consumed by backward().
template <typename T>
struct EncoderTape {
  struct Direction {
    // H x (steps * batch), columns ordered by processing step k
    Mat<T> h_prev, r, z, n, hn;
  };
  Mat<T> inputs;  // D x (steps * batch), step-major
  Mat<T> final_states;  // (directions * H) x batch
  std::vector<Direction> dirs;
  Eigen::Index batch = 0;
};

/// Bidirectional single-layer GRU over a window followed by a linear
/// projection of the concatenated final hidden states.
///
/// Gates use the update/reset formulation
///   r = sigm(W_ir x + b_ir + W_hr h + b_hr)
///   z = sigm(W_iz x + b_iz + W_hz h + b_hz)
///   n = tanh(W_in x + b_in + r * (W_hn h + b_hn))
///   h' = (1 - z) * n + z * h
/// with gate blocks stacked [r; z; n] in w_ih, w_hh, b_ih, b_hh.
///
/// Batched inputs are D x (window_size * batch) matrices where column
/// s * batch + b holds step s of window b (see pack_windows).
template <typename T>
class Encoder {
 public:
  explicit Encoder(EncoderConfig config);

  const EncoderConfig& config() const { return config_; }

  /// Zero-valued parameter layout for this configuration.
  ParamStore<T> make_params() const;

  /// Returns M x batch encodings. Records activations into `tape` if given.
  Mat<T> forward(const ParamStore<T>& params, const Mat<T>& inputs, Eigen::Index batch,
                 EncoderTape<T>* tape = nullptr) const;

  /// Accumulates parameter gradients of a scalar loss given dLoss/dOutput.
  void backward(const ParamStore<T>& params, const EncoderTape<T>& tape, const Mat<T>& d_output,
                ParamStore<T>& grads) const;

 private:
  void check_inputs(const Mat<T>& inputs, Eigen::Index batch) const;

  EncoderConfig config_;
};

/// Packs D x window_size windows into the batched step-major layout.
template <typename T>
Mat<T> pack_windows(std::span<const Mat<T>> windows);

/// Encoding of one D x window_size window.
template <typename T>
Vec<T> encoder_forward(const ParamStore<T>& params, const EncoderConfig& config,
                       const Mat<T>& window);

/// Uniform(+-1/sqrt(fan_in)) initialization: recurrent tensors use the
/// hidden size, the projection its input width.
void initialize_encoder(ParamStore<float>& params, const EncoderConfig& config, Rng& rng);

extern template class Encoder<float>;
extern template class Encoder<double>;

}  // namespace tnc::model

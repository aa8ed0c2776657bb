#ifndef MFCNN_LAYERS_HPP
#define MFCNN_LAYERS_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mfcnn/rng.hpp"
#include "mfcnn/signal.hpp"

namespace mfcnn {

/// Binary matrix: one row per channel, one column per sample position of the
/// tensor it annotates (ReLU activity, max-pool selection, stride retention,
/// dropout survival).
class IndicatorMask {
 public:
  IndicatorMask() = default;
  IndicatorMask(std::size_t rows, std::size_t cols, bool value = false)
      : rows_(rows), cols_(cols), bits_(rows * cols, value ? 1 : 0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool at(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c] != 0; }
  void set(std::size_t r, std::size_t c, bool v) { bits_[r * cols_ + c] = v ? 1 : 0; }
  std::vector<int> row(std::size_t r) const;
  std::size_t count() const noexcept;

  bool operator==(const IndicatorMask&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// K output channels, P_in input channels, M taps; weights stored [k][p][m].
class ConvLayer {
 public:
  ConvLayer() = default;
  ConvLayer(std::size_t out_channels, std::size_t in_channels, std::size_t taps,
            std::size_t stride = 1, Padding padding = Padding::Valid);

  std::size_t out_channels() const noexcept { return out_channels_; }
  std::size_t in_channels() const noexcept { return in_channels_; }
  std::size_t taps() const noexcept { return taps_; }
  std::size_t stride() const noexcept { return stride_; }
  Padding padding() const noexcept { return padding_; }

  double& weight(std::size_t k, std::size_t p, std::size_t m) {
    return weights_[(k * in_channels_ + p) * taps_ + m];
  }
  double weight(std::size_t k, std::size_t p, std::size_t m) const {
    return weights_[(k * in_channels_ + p) * taps_ + m];
  }
  Signal kernel(std::size_t k, std::size_t p) const;
  void set_kernel(std::size_t k, std::size_t p, const Signal& w);

  std::vector<double>& weights() noexcept { return weights_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::vector<double>& bias() noexcept { return bias_; }
  const std::vector<double>& bias() const noexcept { return bias_; }

  // Channel length after correlation and stride for input length n.
  std::size_t output_length(std::size_t n) const;
  // Fan-in P_in*M and fan-out K*M used by the initializers.
  std::size_t fan_in() const noexcept { return in_channels_ * taps_; }
  std::size_t fan_out() const noexcept { return out_channels_ * taps_; }
  // K*(P_in*M + 1).
  std::size_t parameter_count() const noexcept {
    return out_channels_ * (in_channels_ * taps_ + 1);
  }

 private:
  std::size_t out_channels_ = 0;
  std::size_t in_channels_ = 0;
  std::size_t taps_ = 0;
  std::size_t stride_ = 1;
  Padding padding_ = Padding::Valid;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

/// S outputs over N_in inputs, weights stored [k][n]. Bias off by default.
class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(std::size_t outputs, std::size_t inputs, bool has_bias = false);

  std::size_t outputs() const noexcept { return outputs_; }
  std::size_t inputs() const noexcept { return inputs_; }
  bool has_bias() const noexcept { return has_bias_; }

  double& weight(std::size_t k, std::size_t n) { return weights_[k * inputs_ + n]; }
  double weight(std::size_t k, std::size_t n) const { return weights_[k * inputs_ + n]; }

  std::vector<double>& weights() noexcept { return weights_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  // Empty when has_bias() is false.
  std::vector<double>& bias() noexcept { return bias_; }
  const std::vector<double>& bias() const noexcept { return bias_; }

  std::size_t weight_count() const noexcept { return outputs_ * inputs_; }
  std::size_t parameter_count() const noexcept {
    return weight_count() + (has_bias_ ? outputs_ : 0);
  }

 private:
  std::size_t outputs_ = 0;
  std::size_t inputs_ = 0;
  bool has_bias_ = false;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

struct ConvRecord {
  MultiChannelSignal input;      // unpadded layer input
  std::size_t full_length = 0;   // correlation length before stride
  IndicatorMask stride_mask;     // K x full_length, 1 at kept positions
};

struct ConvOutput {
  MultiChannelSignal y;
  ConvRecord record;
};

/// y_k = sum_p xcorr(x_p, w[k][p]) + b_k, then decimated by the stride.
ConvOutput conv_forward(const MultiChannelSignal& x, const ConvLayer& layer);

struct ActivationOutput {
  MultiChannelSignal o;
  IndicatorMask mask;
};

/// o = y where y > 0, slope*y elsewhere; mask bit is 1 iff y > 0.
ActivationOutput relu_forward(const MultiChannelSignal& y, double leaky_slope = 0.0);
Signal relu_forward(const Signal& y, double leaky_slope, std::vector<int>* mask);

struct StrideOutput {
  MultiChannelSignal out;
  IndicatorMask mask;
};

StrideOutput stride_decimate(const MultiChannelSignal& o, std::size_t stride);

struct PoolOutput {
  MultiChannelSignal pooled;
  IndicatorMask mask;
  // argmax[k][i]: position inside the channel selected for segment i.
  std::vector<std::vector<std::size_t>> argmax;
};

/// Non-overlapping segments of P samples; a trailing remainder forms a final
/// short segment. Ties pick the first maximum.
PoolOutput maxpool_forward(const MultiChannelSignal& o, std::size_t pool);
std::size_t pooled_length(std::size_t length, std::size_t pool);

/// Channel-major concatenation.
Signal flatten(const MultiChannelSignal& o);
MultiChannelSignal unflatten(const Signal& flat, std::size_t channels, std::size_t length);

Signal dense_forward(const Signal& x, const DenseLayer& layer);

/// Max-subtracted softmax.
Signal softmax(const Signal& y);

/// Independent Bernoulli(keep_prob) bits. DomainError unless keep_prob is in
/// (0, 1].
IndicatorMask dropout_mask(std::size_t rows, std::size_t cols, double keep_prob, Rng& rng);
// Inverted dropout: kept values are scaled by 1/keep_prob, dropped ones zeroed.
MultiChannelSignal apply_dropout(const MultiChannelSignal& o, const IndicatorMask& mask,
                                 double keep_prob);
Signal apply_dropout(const Signal& o, const IndicatorMask& mask, double keep_prob);

}  // namespace mfcnn

#endif  // MFCNN_LAYERS_HPP

#ifndef MFCNN_NETWORK_HPP
#define MFCNN_NETWORK_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mfcnn/init_loss.hpp"
#include "mfcnn/layers.hpp"
#include "mfcnn/rng.hpp"
#include "mfcnn/signal.hpp"

namespace mfcnn {

/// Convolution followed by (leaky) ReLU and an optional max-pool.
struct ConvBlock {
  ConvLayer conv;
  double leaky_slope = 0.0;
  std::size_t pool = 1;
};

/// Fully connected layer; `relu` must be false for the output layer.
struct DenseBlock {
  DenseLayer dense;
  bool relu = false;
  double leaky_slope = 0.0;
};

struct LayerShape {
  std::string kind;      // "input", "conv", "flatten", "dense", "softmax"/"output"
  std::size_t channels;  // 1 for vectors
  std::size_t length;
  std::size_t parameters;
};

/// Layer stack: conv blocks, flatten, dense blocks, output stage. The last
/// dense block is the output layer; a softmax follows it for cross-entropy.
class Network {
 public:
  // Validates the stack with a dry shape pass; ShapeError on mismatch.
  Network(std::size_t input_length, std::vector<ConvBlock> conv,
          std::vector<DenseBlock> dense, LossKind loss);

  std::size_t input_length() const noexcept { return input_length_; }
  std::size_t output_length() const;
  LossKind loss() const noexcept { return loss_; }

  const std::vector<ConvBlock>& conv_blocks() const noexcept { return conv_; }
  std::vector<ConvBlock>& conv_blocks() noexcept { return conv_; }
  const std::vector<DenseBlock>& dense_blocks() const noexcept { return dense_; }
  std::vector<DenseBlock>& dense_blocks() noexcept { return dense_; }

  std::vector<LayerShape> shapes() const;
  std::size_t parameter_count() const;
  std::size_t dense_weight_count() const;

  // Flat parameter views in a fixed order: per conv block weights then bias,
  // then per dense block weights then bias. paths()[i] names pointers()[i].
  std::vector<double*> parameter_pointers();
  std::vector<std::string> parameter_paths() const;

  // Draws every weight from `kind` with per-layer fan-in/fan-out; biases 0.
  void initialize(InitKind kind, Rng& rng);

 private:
  void validate() const;

  std::size_t input_length_;
  std::vector<ConvBlock> conv_;
  std::vector<DenseBlock> dense_;
  LossKind loss_;
};

struct ConvTapeEntry {
  ConvRecord conv;
  MultiChannelSignal y;   // pre-activation, after stride
  MultiChannelSignal o;   // post-activation
  IndicatorMask relu_mask;
  PoolOutput pool;
  std::optional<IndicatorMask> dropout;
  double keep_prob = 1.0;
  MultiChannelSignal output;  // block output fed to the next stage
};

struct DenseTapeEntry {
  Signal input;
  Signal y;
  Signal o;
  std::vector<int> relu_mask;  // empty for the output layer
  std::optional<IndicatorMask> dropout;
  double keep_prob = 1.0;
  Signal output;
};

struct ForwardTape {
  std::vector<ConvTapeEntry> conv;
  std::size_t flat_channels = 0;
  std::size_t flat_length = 0;
  std::vector<DenseTapeEntry> dense;
  Signal output;  // probabilities for cross-entropy, raw outputs for MSE
};

/// Training-time dropout. keep_prob == 1 disables masking without touching
/// the generator.
struct DropoutContext {
  double keep_prob = 1.0;
  Rng* rng = nullptr;
};

struct ForwardResult {
  Signal output;
  ForwardTape tape;
};

ForwardResult forward(const Network& net, const Signal& x,
                      const DropoutContext* dropout = nullptr);

// Convenience: output only, no dropout.
Signal predict(const Network& net, const Signal& x);

}  // namespace mfcnn

#endif  // MFCNN_NETWORK_HPP

#ifndef MFCNN_TRAIN_HPP
#define MFCNN_TRAIN_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mfcnn/network.hpp"
#include "mfcnn/synth_data.hpp"

namespace mfcnn {

struct ConvGradient {
  std::vector<double> weights;  // [k][p][m]
  std::vector<double> bias;
};

struct DenseGradient {
  std::vector<double> weights;  // [k][n]
  std::vector<double> bias;     // empty without bias
};

/// Gradients congruent with every weight and bias of a Network.
struct GradientSet {
  std::vector<ConvGradient> conv;
  std::vector<DenseGradient> dense;

  static GradientSet zeros_like(const Network& net);
  // Same order as Network::parameter_pointers().
  std::vector<double> flat() const;
};

/// How an iteration's updates interleave with delta propagation.
enum class StepSchedule {
  // All gradients from the pre-update weights, then one update.
  Standard,
  // Each layer is updated as soon as its gradient is known and the delta is
  // propagated through the updated weights (the order the hand-worked
  // two-layer example follows).
  Layerwise,
};

struct TrainConfig {
  double lr_weights = 0.1;
  double lr_bias = 0.05;
  std::size_t epochs = 10;
  std::size_t realizations_per_epoch = 200;
  std::uint64_t seed = 1;
  double keep_prob = 1.0;
  StepSchedule schedule = StepSchedule::Standard;

  void validate() const;  // ConfigError
};

// Intermediate deltas captured during backward.
struct ConvDeltaTrace {
  MultiChannelSignal incoming;     // dL/d(block output), pooled positions
  MultiChannelSignal repositioned; // dL/dy on the strided pre-activation
};

struct BackwardTrace {
  std::vector<ConvDeltaTrace> conv;
  std::vector<Signal> dense;  // dL/dy per dense block
};

/// Back-propagation through the tape recorded by forward() on `net`.
/// TapeMismatchError when the tape does not belong to this network.
GradientSet backward(const Network& net, const ForwardTape& tape, const Signal& target,
                     BackwardTrace* trace = nullptr);

/// w <- w - lr_weights*g, b <- b - lr_bias*g_b.
void sgd_step(Network& net, const GradientSet& grads, const TrainConfig& cfg);

struct StepResult {
  double loss = 0.0;
  bool clamped = false;
  Signal output;
  GradientSet grads;
  BackwardTrace trace;
};

/// One forward/backward/update cycle on a single sample.
StepResult train_step(Network& net, const Signal& x, const Signal& target,
                      const TrainConfig& cfg, const DropoutContext* dropout = nullptr);

struct IterationRecord {
  std::size_t iteration = 0;
  std::size_t epoch = 0;
  double loss = 0.0;
  Signal output;
  std::size_t target_index = 0;
};

struct TrainingLog {
  std::vector<IterationRecord> iterations;
  // First dense layer weights after each iteration's update.
  std::vector<std::vector<double>> dense_weight_trace;
  std::size_t clamped_losses = 0;

  std::vector<double> epoch_mean_loss() const;
};

/// Sequential SGD, batch size 1: the same ordered dataset is replayed every
/// epoch. Dataset size overrides cfg.realizations_per_epoch.
TrainingLog train(Network& net, const Dataset& data, const TrainConfig& cfg);

struct GradCheckEntry {
  std::string path;
  double analytic = 0.0;
  double numeric = 0.0;
  double error = 0.0;
  bool kink_adjacent = false;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;  // parameter path order
  double max_error = 0.0;
  std::string worst_path;
  std::size_t checked = 0;
  std::size_t excluded = 0;
};

// Analytic and numeric gradients agree when their difference is within
// relative 1e-6, or within 1e-10 absolute for tiny gradients; both are folded
// into error = |a-n| / max(|a|, |n|, kGradCheckScaleFloor).
inline constexpr double kGradCheckScaleFloor = 1e-4;
inline constexpr double kGradCheckTolerance = 1e-6;

/// Central differences (L(theta+h) - L(theta-h)) / 2h for every parameter,
/// with L re-evaluated in extended precision.
/// Parameters whose +-h perturbation flips a ReLU indicator or a max-pool
/// selection are reported as kink-adjacent and excluded from max_error.
GradCheckReport grad_check(const Network& net, const Signal& x, const Signal& target,
                           double h);

}  // namespace mfcnn

#endif  // MFCNN_TRAIN_HPP

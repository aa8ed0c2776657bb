#ifndef MFCNN_INIT_LOSS_HPP
#define MFCNN_INIT_LOSS_HPP

#include <cstddef>
#include <string>
#include <string_view>

#include "mfcnn/rng.hpp"
#include "mfcnn/signal.hpp"

namespace mfcnn {

enum class InitKind { HeNormal, HeUniform, XavierNormal, XavierUniform };

// Config names: he_normal, he_uniform, xavier_normal, xavier_uniform.
std::string_view init_kind_name(InitKind kind);
InitKind parse_init_kind(std::string_view name);

struct InitScheme {
  InitKind kind = InitKind::HeNormal;
  std::size_t fan_in = 1;
  std::size_t fan_out = 1;

  /// Variance of one draw: 2/N_in for He, 2/(N_in+N_out) for Xavier.
  double variance() const;
  /// Half-width of the uniform variants, sqrt(3*variance()).
  double uniform_bound() const;
};

// He schemes double the Xavier-style 1/N_in variance to offset ReLU zeroing
// about half of the outputs, which keeps the expected output energy level.
Signal init_draw(const InitScheme& scheme, std::size_t count, Rng& rng);

enum class LossKind { MeanSquaredError, SoftmaxCrossEntropy };

std::string_view loss_kind_name(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

// Probabilities below this are clamped before taking the logarithm.
inline constexpr double kLogClamp = 1e-300;

/// MSE: 0.5*sum (y-t)^2. Cross-entropy: -sum t ln P, with `output` already a
/// probability vector. `clamped` (optional) reports whether any ln argument
/// was clamped.
double loss_value(LossKind kind, const Signal& output, const Signal& target,
                  bool* clamped = nullptr);

/// dL/dy at the output pre-activation: output - target for both kinds (for
/// cross-entropy this is the derivative through the softmax).
Signal output_delta(LossKind kind, const Signal& output, const Signal& target);

}  // namespace mfcnn

#endif  // MFCNN_INIT_LOSS_HPP

#include "mfcnn/init_loss.hpp"

#include <cmath>
#include <string>

#include "mfcnn/errors.hpp"

namespace mfcnn {

std::string_view init_kind_name(InitKind kind) {
  switch (kind) {
    case InitKind::HeNormal: return "he_normal";
    case InitKind::HeUniform: return "he_uniform";
    case InitKind::XavierNormal: return "xavier_normal";
    case InitKind::XavierUniform: return "xavier_uniform";
  }
  return "he_normal";
}

InitKind parse_init_kind(std::string_view name) {
  if (name == "he_normal") return InitKind::HeNormal;
  if (name == "he_uniform") return InitKind::HeUniform;
  if (name == "xavier_normal") return InitKind::XavierNormal;
  if (name == "xavier_uniform") return InitKind::XavierUniform;
  throw ConfigError("unknown init scheme '" + std::string(name) + "'");
}

double InitScheme::variance() const {
  if (fan_in < 1 || fan_out < 1) throw DomainError("fan_in and fan_out must be at least 1");
  switch (kind) {
    case InitKind::HeNormal:
    case InitKind::HeUniform:
      return 2.0 / static_cast<double>(fan_in);
    case InitKind::XavierNormal:
    case InitKind::XavierUniform:
      return 2.0 / static_cast<double>(fan_in + fan_out);
  }
  return 0.0;
}

double InitScheme::uniform_bound() const { return std::sqrt(3.0 * variance()); }

Signal init_draw(const InitScheme& scheme, std::size_t count, Rng& rng) {
  if (count < 1) throw DomainError("init_draw needs count >= 1");
  const double var = scheme.variance();
  Signal out = Signal::zeros(count);
  const bool uniform =
      scheme.kind == InitKind::HeUniform || scheme.kind == InitKind::XavierUniform;
  if (uniform) {
    // Computed as sqrt(6/n) directly so the He/Xavier bounds match the
    // closed forms bit for bit.
    const double n = scheme.kind == InitKind::HeUniform
                         ? static_cast<double>(scheme.fan_in)
                         : static_cast<double>(scheme.fan_in + scheme.fan_out);
    const double bound = std::sqrt(6.0 / n);
    for (double& v : out) v = rng.uniform(-bound, bound);
  } else {
    const double sd = std::sqrt(var);
    for (double& v : out) v = sd * rng.normal();
  }
  return out;
}

std::string_view loss_kind_name(LossKind kind) {
  return kind == LossKind::MeanSquaredError ? "mse" : "softmax_cross_entropy";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "mse") return LossKind::MeanSquaredError;
  if (name == "softmax_cross_entropy" || name == "cross_entropy") {
    return LossKind::SoftmaxCrossEntropy;
  }
  throw ConfigError("unknown loss '" + std::string(name) + "'");
}

namespace {

void check_shapes(const Signal& output, const Signal& target) {
  if (output.size() != target.size() || output.empty()) {
    throw ShapeError("output has " + std::to_string(output.size()) + " entries, target " +
                     std::to_string(target.size()));
  }
}

void check_one_hot(const Signal& target) {
  std::size_t ones = 0;
  for (double t : target) {
    if (t == 1.0) {
      ++ones;
    } else if (t != 0.0) {
      throw DomainError("cross-entropy target must be one-hot");
    }
  }
  if (ones != 1) throw DomainError("cross-entropy target must be one-hot");
}

}  // namespace

double loss_value(LossKind kind, const Signal& output, const Signal& target, bool* clamped) {
  check_shapes(output, target);
  if (clamped) *clamped = false;
  double loss = 0.0;
  if (kind == LossKind::MeanSquaredError) {
    for (std::size_t k = 0; k < output.size(); ++k) {
      const double d = output[k] - target[k];
      loss += d * d;
    }
    return 0.5 * loss;
  }
  check_one_hot(target);
  for (std::size_t k = 0; k < output.size(); ++k) {
    if (target[k] == 0.0) continue;
    double p = output[k];
    if (p < kLogClamp) {
      p = kLogClamp;
      if (clamped) *clamped = true;
    }
    loss -= target[k] * std::log(p);
  }
  return loss;
}

Signal output_delta(LossKind kind, const Signal& output, const Signal& target) {
  check_shapes(output, target);
  if (kind == LossKind::SoftmaxCrossEntropy) check_one_hot(target);
  Signal d = output;
  for (std::size_t k = 0; k < d.size(); ++k) d[k] -= target[k];
  return d;
}

}  // namespace mfcnn

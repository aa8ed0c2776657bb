#ifndef MFCNN_RNG_HPP
#define MFCNN_RNG_HPP

#include <cstdint>
#include <random>

namespace mfcnn {

/// Deterministic generator: std::mt19937_64 for the raw 64-bit stream (its
/// output sequence is fixed by the standard) and hand-written transforms for
/// every distribution, so a seed reproduces identical draws on any conforming
/// toolchain. The std::*_distribution templates are deliberately not used;
/// their algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller (both outputs used).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  /// Uniform integer in [0, n), n >= 1, by rejection.
  std::uint64_t index(std::uint64_t n);
  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// splitmix64 finalizer; used to derive independent sub-stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace mfcnn

#endif  // MFCNN_RNG_HPP

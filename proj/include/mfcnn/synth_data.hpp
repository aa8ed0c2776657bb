#ifndef MFCNN_SYNTH_DATA_HPP
#define MFCNN_SYNTH_DATA_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mfcnn/rng.hpp"
#include "mfcnn/signal.hpp"

namespace mfcnn {

struct FeatureSpec {
  Signal base;
  Signal label;
};

// Index 0: triangular [-0.5, 1, -0.5], target [0, 1].
// Index 1: rectangular [1, 1, 1], target [1, 0].
const std::vector<FeatureSpec>& two_features();

struct GenConfig {
  std::size_t length = 8;
  double feature_noise_high = 0.3;  // nu(n) ~ U(0, high) per feature sample
  double bg_sigma = 0.05;           // additive Gaussian noise
  bool normalize = true;            // unit energy per signal
  std::uint64_t seed = 1;

  void validate() const;  // ConfigError
};

struct SampleMeta {
  std::size_t feature_index = 0;
  std::size_t offset = 0;
};

struct Sample {
  Signal x;
  Signal target;
  SampleMeta meta;
};

using Dataset = std::vector<Sample>;

/// Random feature (uniform), random offset (uniform over every fit), feature
/// perturbation, background noise, then normalization.
Sample generate_sample(const GenConfig& cfg, Rng& rng);
/// Same construction with the feature and offset fixed by the caller.
Sample generate_sample_at(const GenConfig& cfg, std::size_t feature_index,
                          std::size_t offset, Rng& rng);

Dataset generate_epoch(const GenConfig& cfg, std::size_t count, Rng& rng);

/// CSV: sample_id,label,offset,x0..x{N-1}; label is the target class index.
void write_dataset_csv(std::ostream& out, const Dataset& data);

}  // namespace mfcnn

#endif  // MFCNN_SYNTH_DATA_HPP

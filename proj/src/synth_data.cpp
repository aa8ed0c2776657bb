#include "mfcnn/synth_data.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "mfcnn/errors.hpp"
#include "mfcnn/pipeline.hpp"

namespace mfcnn {

const std::vector<FeatureSpec>& two_features() {
  static const std::vector<FeatureSpec> features = {
      {Signal{-0.5, 1.0, -0.5}, Signal{0.0, 1.0}},
      {Signal{1.0, 1.0, 1.0}, Signal{1.0, 0.0}},
  };
  return features;
}

void GenConfig::validate() const {
  std::size_t longest = 0;
  for (const auto& f : two_features()) longest = std::max(longest, f.base.size());
  if (length < longest) {
    throw ConfigError("data.N must be at least " + std::to_string(longest));
  }
  if (!(feature_noise_high >= 0.0) || !std::isfinite(feature_noise_high)) {
    throw ConfigError("data.feature_noise_high must be non-negative");
  }
  if (!(bg_sigma >= 0.0) || !std::isfinite(bg_sigma)) {
    throw ConfigError("data.bg_sigma must be non-negative");
  }
}

Sample generate_sample_at(const GenConfig& cfg, std::size_t feature_index,
                          std::size_t offset, Rng& rng) {
  cfg.validate();
  const auto& features = two_features();
  if (feature_index >= features.size()) throw ConfigError("feature index out of range");
  const FeatureSpec& spec = features[feature_index];
  if (offset + spec.base.size() > cfg.length) throw ConfigError("feature does not fit at offset");

  Signal feature = spec.base;
  for (double& v : feature) v += rng.uniform(0.0, cfg.feature_noise_high);

  Signal x = Signal::zeros(cfg.length);
  for (std::size_t m = 0; m < feature.size(); ++m) x[offset + m] = feature[m];
  for (double& v : x) v += cfg.bg_sigma * rng.normal();
  if (cfg.normalize) x = unit_normalize(x);

  return {std::move(x), spec.label, {feature_index, offset}};
}

Sample generate_sample(const GenConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto& features = two_features();
  const auto feature_index = static_cast<std::size_t>(rng.index(features.size()));
  const std::size_t slots = cfg.length - features[feature_index].base.size() + 1;
  const auto offset = static_cast<std::size_t>(rng.index(slots));
  return generate_sample_at(cfg, feature_index, offset, rng);
}

Dataset generate_epoch(const GenConfig& cfg, std::size_t count, Rng& rng) {
  if (count < 1) throw ConfigError("dataset size must be at least 1");
  Dataset out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(generate_sample(cfg, rng));
  return out;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  const std::size_t n = data.empty() ? 0 : data.front().x.size();
  out << "sample_id,label,offset";
  for (std::size_t i = 0; i < n; ++i) out << ",x" << i;
  out << '\n';
  for (std::size_t s = 0; s < data.size(); ++s) {
    const auto& t = data[s].target;
    const auto label = std::max_element(t.begin(), t.end()) - t.begin();
    out << s << ',' << label << ',' << data[s].meta.offset;
    for (double v : data[s].x) out << ',' << format_real(v);
    out << '\n';
  }
}

}  // namespace mfcnn

#ifndef MFCNN_MATCHED_FILTER_HPP
#define MFCNN_MATCHED_FILTER_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "mfcnn/signal.hpp"

namespace mfcnn {

/// A bank of K feature templates, optionally with one decision threshold
/// per template.
class TemplateBank {
 public:
  explicit TemplateBank(std::vector<Signal> templates,
                        std::optional<std::vector<double>> thresholds = std::nullopt);

  std::size_t size() const noexcept { return templates_.size(); }
  const Signal& operator[](std::size_t k) const { return templates_[k]; }
  const std::vector<Signal>& templates() const noexcept { return templates_; }
  const std::optional<std::vector<double>>& thresholds() const noexcept {
    return thresholds_;
  }
  std::size_t max_template_length() const noexcept;

  // Copy of this bank with every template scaled to unit energy.
  TemplateBank normalized() const;

 private:
  std::vector<Signal> templates_;
  std::optional<std::vector<double>> thresholds_;
};

struct TemplateResponse {
  Signal response;
  double peak_value = 0.0;
  std::size_t peak_index = 0;
};

struct DetectionReport {
  std::vector<TemplateResponse> per_template;
  std::size_t winner = 0;
};

// Correlates x with every template (equivalently, convolves with the reversed
// template). Peaks and the winner resolve ties to the lowest index.
DetectionReport bank_apply(const Signal& x, const TemplateBank& bank);

std::size_t detect_feature(const Signal& x, const TemplateBank& bank);

// Whether template k's peak reaches its threshold. DomainError when the bank
// has no thresholds.
bool exceeds_threshold(const DetectionReport& report, const TemplateBank& bank,
                       std::size_t k);

}  // namespace mfcnn

#endif  // MFCNN_MATCHED_FILTER_HPP

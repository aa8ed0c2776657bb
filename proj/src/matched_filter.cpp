#include "mfcnn/matched_filter.hpp"

#include <string>

#include "mfcnn/errors.hpp"

namespace mfcnn {

TemplateBank::TemplateBank(std::vector<Signal> templates,
                           std::optional<std::vector<double>> thresholds)
    : templates_(std::move(templates)), thresholds_(std::move(thresholds)) {
  if (templates_.empty()) throw ShapeError("template bank is empty");
  for (std::size_t k = 0; k < templates_.size(); ++k) {
    if (templates_[k].empty()) throw LengthError("template " + std::to_string(k) + " is empty");
  }
  if (thresholds_ && thresholds_->size() != templates_.size()) {
    throw ShapeError("expected one threshold per template");
  }
}

std::size_t TemplateBank::max_template_length() const noexcept {
  std::size_t m = 0;
  for (const auto& t : templates_) m = std::max(m, t.size());
  return m;
}

TemplateBank TemplateBank::normalized() const {
  std::vector<Signal> out;
  out.reserve(templates_.size());
  for (const auto& t : templates_) out.push_back(unit_normalize(t));
  return TemplateBank(std::move(out), thresholds_);
}

DetectionReport bank_apply(const Signal& x, const TemplateBank& bank) {
  if (bank.max_template_length() > x.size()) {
    throw LengthError("template longer than the signal");
  }
  DetectionReport report;
  report.per_template.reserve(bank.size());
  for (std::size_t k = 0; k < bank.size(); ++k) {
    TemplateResponse r;
    r.response = xcorr_valid(x, bank[k]);
    r.peak_value = r.response[0];
    for (std::size_t n = 1; n < r.response.size(); ++n) {
      if (r.response[n] > r.peak_value) {
        r.peak_value = r.response[n];
        r.peak_index = n;
      }
    }
    if (k > 0 && r.peak_value > report.per_template[report.winner].peak_value) {
      report.winner = k;
    }
    report.per_template.push_back(std::move(r));
  }
  return report;
}

std::size_t detect_feature(const Signal& x, const TemplateBank& bank) {
  return bank_apply(x, bank).winner;
}

bool exceeds_threshold(const DetectionReport& report, const TemplateBank& bank,
                       std::size_t k) {
  if (!bank.thresholds()) throw DomainError("template bank has no thresholds");
  if (k >= report.per_template.size()) throw ShapeError("template index out of range");
  return report.per_template[k].peak_value >= (*bank.thresholds())[k];
}

}  // namespace mfcnn

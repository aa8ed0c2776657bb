#ifndef MFCNN_MATCHED_IO_HPP
#define MFCNN_MATCHED_IO_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mfcnn/matched_filter.hpp"
#include "mfcnn/synth_data.hpp"

namespace mfcnn {

// Every numeric cell in reading order; a non-numeric first line is a header.
Signal parse_signal_csv(const std::string& text);

struct NamedBank {
  std::vector<std::string> names;
  TemplateBank bank;
};

// One template per row: name,w0,w1,... An optional header row starts with
// "name". Rows without a leading name are called t0, t1, ...
NamedBank parse_templates_csv(const std::string& text);

// One column per template; shorter responses leave trailing cells empty.
std::string responses_csv(const NamedBank& named, const DetectionReport& report);

struct MatchedSimulation {
  std::size_t trials = 0;
  std::size_t correct = 0;
};

// Noisy two-feature signals scored against the clean feature bank.
MatchedSimulation run_matched_simulation(const GenConfig& data, std::size_t trials,
                                         std::uint64_t seed, bool equal_energy);

}  // namespace mfcnn

#endif  // MFCNN_MATCHED_IO_HPP

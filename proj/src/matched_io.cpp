#include "mfcnn/matched_io.hpp"

#include <cstdlib>
#include <sstream>

#include "mfcnn/errors.hpp"
#include "mfcnn/pipeline.hpp"

namespace mfcnn {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_number(const std::string& cell, double& value) {
  if (cell.empty()) return false;
  char* end = nullptr;
  value = std::strtod(cell.c_str(), &end);
  return end == cell.c_str() + cell.size();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    line = trim(line);
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

Signal parse_signal_csv(const std::string& text) {
  std::vector<double> values;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto cells = split_cells(lines[i]);
    for (const auto& cell : cells) {
      double v = 0.0;
      if (parse_number(cell, v)) {
        values.push_back(v);
      } else if (i != 0 && !cell.empty()) {
        throw ConfigError("signal csv line " + std::to_string(i + 1) + ": '" + cell +
                          "' is not a number");
      } else if (i == 0 && !values.empty()) {
        throw ConfigError("signal csv line 1: '" + cell + "' is not a number");
      }
    }
  }
  if (values.empty()) throw ConfigError("signal csv holds no samples");
  return Signal(std::move(values));
}

NamedBank parse_templates_csv(const std::string& text) {
  std::vector<std::string> names;
  std::vector<Signal> templates;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto cells = split_cells(lines[i]);
    if (cells.empty()) continue;
    if (i == 0 && cells.front() == "name") continue;
    std::string name;
    double first = 0.0;
    std::size_t start = 0;
    if (!parse_number(cells.front(), first)) {
      name = cells.front();
      start = 1;
    } else {
      name = "t" + std::to_string(templates.size());
    }
    std::vector<double> taps;
    for (std::size_t c = start; c < cells.size(); ++c) {
      if (cells[c].empty()) continue;
      double v = 0.0;
      if (!parse_number(cells[c], v)) {
        throw ConfigError("templates csv line " + std::to_string(i + 1) + ": '" + cells[c] +
                          "' is not a number");
      }
      taps.push_back(v);
    }
    if (taps.empty()) {
      throw ConfigError("templates csv line " + std::to_string(i + 1) + ": template has no taps");
    }
    names.push_back(name);
    templates.emplace_back(std::move(taps));
  }
  if (templates.empty()) throw ConfigError("templates csv holds no templates");
  return {std::move(names), TemplateBank(std::move(templates))};
}

std::string responses_csv(const NamedBank& named, const DetectionReport& report) {
  std::ostringstream out;
  std::size_t rows = 0;
  for (std::size_t k = 0; k < named.names.size(); ++k) {
    out << (k ? "," : "") << named.names[k];
    rows = std::max(rows, report.per_template[k].response.size());
  }
  out << '\n';
  for (std::size_t n = 0; n < rows; ++n) {
    for (std::size_t k = 0; k < report.per_template.size(); ++k) {
      if (k) out << ',';
      const auto& r = report.per_template[k].response;
      if (n < r.size()) out << format_real(r[n]);
    }
    out << '\n';
  }
  return out.str();
}

MatchedSimulation run_matched_simulation(const GenConfig& data, std::size_t trials,
                                         std::uint64_t seed, bool equal_energy) {
  std::vector<Signal> clean;
  for (const auto& f : two_features()) clean.push_back(f.base);
  TemplateBank bank(std::move(clean));
  if (equal_energy) bank = bank.normalized();

  Rng rng(seed);
  MatchedSimulation sim;
  sim.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    const Sample s = generate_sample(data, rng);
    if (detect_feature(s.x, bank) == s.meta.feature_index) ++sim.correct;
  }
  return sim;
}

}  // namespace mfcnn

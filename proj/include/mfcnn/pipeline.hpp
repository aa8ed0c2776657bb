#ifndef MFCNN_PIPELINE_HPP
#define MFCNN_PIPELINE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mfcnn/init_loss.hpp"
#include "mfcnn/network.hpp"
#include "mfcnn/synth_data.hpp"
#include "mfcnn/train.hpp"

namespace mfcnn {

struct ConvSpec {
  std::size_t channels = 1;
  std::size_t taps = 3;
  std::size_t stride = 1;
  Padding padding = Padding::Valid;
  std::size_t pool = 1;
  double leaky_slope = 0.0;
};

struct DenseSpec {
  std::size_t outputs = 2;
  bool relu = false;
  bool bias = false;
  double leaky_slope = 0.0;
};

struct ArchSpec {
  std::size_t input_length = 8;
  std::vector<ConvSpec> conv;
  std::vector<DenseSpec> dense;
  LossKind loss = LossKind::SoftmaxCrossEntropy;
  InitKind init = InitKind::HeNormal;
};

struct PipelineConfig {
  std::string name;
  ArchSpec arch;
  TrainConfig train;
  GenConfig data;
  // Training-set seed; derived from train.seed when absent.
  std::optional<std::uint64_t> data_seed;
  std::size_t test_count = 100;

  std::uint64_t init_seed() const;
  std::uint64_t dropout_seed() const;
  std::uint64_t train_data_seed() const;
  std::uint64_t test_data_seed() const;
};

/// Presets reproducing the three two-feature experiments:
///   paperA: K=4, M=3, no pooling, dense 2 (48 FC weights)
///   paperB: K=3, M=3, P=3, dense 2 (12 FC weights)
///   paperC: K=5, M=3, P=3, dense 4 (ReLU) then 2 (48 FC weights)
PipelineConfig preset(const std::string& name);
std::vector<std::string> preset_names();

// ConfigError naming the offending field.
PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const PipelineConfig& cfg);
void validate_config(const PipelineConfig& cfg);

/// Builds the network (shape-checked) and initializes it from init_seed().
Network build_network(const PipelineConfig& cfg);
Network build_network(const ArchSpec& arch);  // zero weights

/// Model file: architecture echo plus per-layer arrays, 17 significant digits.
std::string model_to_json(const Network& net, const PipelineConfig& cfg);
struct LoadedModel {
  Network net;
  PipelineConfig config;
};
LoadedModel model_from_json(const std::string& json_text);
LoadedModel load_model(const std::filesystem::path& path);

// "%.17g" in the C locale.
std::string format_real(double v);

struct EvalResult {
  double accuracy = 0.0;
  std::size_t count = 0;
  std::size_t correct = 0;
  std::size_t ties = 0;
  std::vector<Signal> outputs;
  std::vector<std::size_t> target_index;
};

// Accuracy is argmax(P) == argmax(t); an exact tie counts as incorrect.
EvalResult evaluate(const Network& net, const Dataset& data);

struct RunReport {
  std::string config_name;
  double final_train_loss = 0.0;
  double test_accuracy = 0.0;
  std::size_t test_count = 0;
  std::size_t test_ties = 0;
  std::size_t parameter_count = 0;
  std::size_t dense_weight_count = 0;
  std::size_t clamped_losses = 0;
  std::vector<LayerShape> shapes;
  std::vector<std::string> files;
  std::vector<double> epoch_mean_loss;
  std::vector<double> epoch_mean_p_target;

  std::string to_json() const;
};

struct TrainArtifacts {
  RunReport report;
  Network net;
  TrainingLog log;
};

/// Trains, evaluates on the held-out set and, when out_dir is given, writes
/// model.json, probs.csv, weights.csv, loss.csv, test_probs.csv, summary.json
/// (and plot.gp with `gnuplot`).
TrainArtifacts run_train(const PipelineConfig& cfg,
                         const std::optional<std::filesystem::path>& out_dir,
                         bool gnuplot = false);

/// Scores `count` fresh samples drawn from the config's test seed.
RunReport run_eval(const Network& net, const PipelineConfig& cfg, std::size_t count);

struct GradCheckRun {
  std::size_t trials = 0;
  double h = 0.0;
  double max_error = 0.0;
  std::string worst_path;
  std::size_t worst_trial = 0;
  std::size_t checked = 0;
  std::size_t excluded = 0;
  bool passed = false;
};

/// grad_check on `trials` random (network, sample) draws under the config.
GradCheckRun run_gradcheck(const PipelineConfig& cfg, std::size_t trials, double h);

struct ParamBudget {
  std::uint64_t direct = 0;    // M2*K*K2
  std::uint64_t factored = 0;  // (M2+K)*K2
  double ratio = 0.0;          // factored / direct
  bool beneficial = false;
};

// DomainError on non-positive inputs.
ParamBudget param_budget(std::uint64_t k, std::uint64_t k2, std::uint64_t m2);

}  // namespace mfcnn

#endif  // MFCNN_PIPELINE_HPP

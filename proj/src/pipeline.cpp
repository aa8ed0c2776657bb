#include "mfcnn/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "mfcnn/errors.hpp"

namespace mfcnn {

using ordered_json = nlohmann::ordered_json;

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t PipelineConfig::init_seed() const { return mix_seed(train.seed, 0); }
std::uint64_t PipelineConfig::dropout_seed() const { return mix_seed(train.seed, 3); }
std::uint64_t PipelineConfig::train_data_seed() const {
  return data_seed ? *data_seed : mix_seed(train.seed, 1);
}
std::uint64_t PipelineConfig::test_data_seed() const { return mix_seed(train_data_seed(), 2); }

PipelineConfig preset(const std::string& name) {
  PipelineConfig cfg;
  cfg.name = name;
  cfg.arch.input_length = 8;
  cfg.data.length = 8;
  if (name == "paperA") {
    cfg.arch.conv = {{4, 3, 1, Padding::Valid, 1, 0.0}};
    cfg.arch.dense = {{2, false, false, 0.0}};
  } else if (name == "paperB") {
    cfg.arch.conv = {{3, 3, 1, Padding::Valid, 3, 0.0}};
    cfg.arch.dense = {{2, false, false, 0.0}};
  } else if (name == "paperC") {
    cfg.arch.conv = {{5, 3, 1, Padding::Valid, 3, 0.0}};
    cfg.arch.dense = {{4, true, false, 0.0}, {2, false, false, 0.0}};
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected paperA, paperB or paperC)");
  }
  return cfg;
}

std::vector<std::string> preset_names() { return {"paperA", "paperB", "paperC"}; }

namespace {

// Typed field readers; every error names the dotted path of the field.
class Reader {
 public:
  Reader(const nlohmann::json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
        throw ConfigError(field(it.key()) + ": unknown field");
      }
    }
  }

  bool has(const char* key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }
  const nlohmann::json& at(const char* key) const { return obj_.at(key); }
  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  template <typename U>
    requires std::is_unsigned_v<U> && (!std::is_same_v<U, bool>)
  void get(const char* key, U& out, std::uint64_t min = 0) const {
    if (!has(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(field(key) + ": expected a non-negative integer");
    }
    const auto n = v.get<std::uint64_t>();
    if (n < min) throw ConfigError(field(key) + ": must be at least " + std::to_string(min));
    out = static_cast<U>(n);
  }
  void get(const char* key, double& out) const {
    if (!has(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_number()) throw ConfigError(field(key) + ": expected a number");
    out = v.get<double>();
  }
  void get(const char* key, bool& out) const {
    if (!has(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_boolean()) throw ConfigError(field(key) + ": expected true or false");
    out = v.get<bool>();
  }
  void get(const char* key, std::string& out) const {
    if (!has(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_string()) throw ConfigError(field(key) + ": expected a string");
    out = v.get<std::string>();
  }

 private:
  const nlohmann::json& obj_;
  std::string path_;
};

Padding parse_padding(const std::string& s, const std::string& where) {
  if (s == "valid") return Padding::Valid;
  if (s == "same") return Padding::Same;
  throw ConfigError(where + ": expected \"valid\" or \"same\"");
}

const char* padding_name(Padding p) { return p == Padding::Same ? "same" : "valid"; }

StepSchedule parse_schedule(const std::string& s, const std::string& where) {
  if (s == "standard") return StepSchedule::Standard;
  if (s == "layerwise") return StepSchedule::Layerwise;
  throw ConfigError(where + ": expected \"standard\" or \"layerwise\"");
}

void read_arch(const nlohmann::json& j, ArchSpec& arch, bool& has_input_length) {
  Reader r(j, "arch");
  r.allow({"input_length", "conv", "dense", "loss", "init"});
  has_input_length = r.has("input_length");
  r.get("input_length", arch.input_length, 1);
  if (r.has("conv")) {
    const auto& list = r.at("conv");
    if (!list.is_array()) throw ConfigError("arch.conv: expected an array");
    arch.conv.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "arch.conv[" + std::to_string(i) + "]";
      Reader c(list[i], path);
      c.allow({"channels", "taps", "stride", "padding", "pool", "leaky_slope"});
      ConvSpec spec;
      c.get("channels", spec.channels, 1);
      c.get("taps", spec.taps, 1);
      c.get("stride", spec.stride, 1);
      c.get("pool", spec.pool, 1);
      c.get("leaky_slope", spec.leaky_slope);
      if (spec.leaky_slope < 0.0) throw ConfigError(path + ".leaky_slope: must be non-negative");
      std::string pad = "valid";
      c.get("padding", pad);
      spec.padding = parse_padding(pad, path + ".padding");
      arch.conv.push_back(spec);
    }
  }
  if (r.has("dense")) {
    const auto& list = r.at("dense");
    if (!list.is_array() || list.empty()) {
      throw ConfigError("arch.dense: expected a non-empty array");
    }
    arch.dense.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "arch.dense[" + std::to_string(i) + "]";
      Reader d(list[i], path);
      d.allow({"outputs", "relu", "bias", "leaky_slope"});
      DenseSpec spec;
      d.get("outputs", spec.outputs, 1);
      d.get("relu", spec.relu);
      d.get("bias", spec.bias);
      d.get("leaky_slope", spec.leaky_slope);
      if (spec.leaky_slope < 0.0) throw ConfigError(path + ".leaky_slope: must be non-negative");
      arch.dense.push_back(spec);
    }
  }
  std::string name = std::string(loss_kind_name(arch.loss));
  r.get("loss", name);
  try {
    arch.loss = parse_loss_kind(name);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("arch.loss: ") + e.what());
  }
  name = std::string(init_kind_name(arch.init));
  r.get("init", name);
  try {
    arch.init = parse_init_kind(name);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("arch.init: ") + e.what());
  }
}

void read_train(const nlohmann::json& j, TrainConfig& t) {
  Reader r(j, "train");
  r.allow({"lr_weights", "lr_bias", "epochs", "realizations_per_epoch", "seed", "keep_prob",
           "schedule"});
  r.get("lr_weights", t.lr_weights);
  r.get("lr_bias", t.lr_bias);
  r.get("epochs", t.epochs, 1);
  r.get("realizations_per_epoch", t.realizations_per_epoch, 1);
  r.get("seed", t.seed);
  r.get("keep_prob", t.keep_prob);
  std::string schedule = t.schedule == StepSchedule::Layerwise ? "layerwise" : "standard";
  r.get("schedule", schedule);
  t.schedule = parse_schedule(schedule, "train.schedule");
}

void read_data(const nlohmann::json& j, PipelineConfig& cfg) {
  Reader r(j, "data");
  r.allow({"N", "feature_noise_high", "bg_sigma", "normalize", "seed", "test_count"});
  r.get("N", cfg.data.length, 1);
  r.get("feature_noise_high", cfg.data.feature_noise_high);
  r.get("bg_sigma", cfg.data.bg_sigma);
  r.get("normalize", cfg.data.normalize);
  if (r.has("seed")) {
    std::uint64_t s = 0;
    r.get("seed", s);
    cfg.data_seed = s;
  }
  r.get("test_count", cfg.test_count);
}

}  // namespace

void validate_config(const PipelineConfig& cfg) {
  if (cfg.arch.dense.empty()) throw ConfigError("arch.dense: at least one layer required");
  if (cfg.arch.dense.back().relu) throw ConfigError("arch.dense: the output layer cannot use relu");
  if (cfg.arch.input_length != cfg.data.length) {
    throw ConfigError("arch.input_length: " + std::to_string(cfg.arch.input_length) +
                      " does not match data.N " + std::to_string(cfg.data.length));
  }
  try {
    cfg.train.validate();
    cfg.data.validate();
    (void)build_network(cfg.arch);
  } catch (const ShapeError& e) {
    throw ConfigError(std::string("arch: ") + e.what());
  } catch (const LengthError& e) {
    throw ConfigError(std::string("arch: ") + e.what());
  }
}

PipelineConfig parse_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Reader top(j, "");
  top.allow({"name", "preset", "arch", "train", "data"});
  PipelineConfig cfg;
  if (top.has("preset")) {
    std::string p;
    top.get("preset", p);
    cfg = preset(p);
  } else {
    cfg = preset("paperA");
    cfg.name = "custom";
  }
  top.get("name", cfg.name);
  bool has_input_length = false;
  if (top.has("arch")) read_arch(top.at("arch"), cfg.arch, has_input_length);
  if (top.has("train")) read_train(top.at("train"), cfg.train);
  if (top.has("data")) read_data(top.at("data"), cfg);
  const bool has_n = top.has("data") && top.at("data").contains("N");
  if (has_n && !has_input_length) cfg.arch.input_length = cfg.data.length;
  if (has_input_length && !has_n) cfg.data.length = cfg.arch.input_length;
  validate_config(cfg);
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

ordered_json config_json(const PipelineConfig& cfg) {
  ordered_json conv = ordered_json::array();
  for (const auto& c : cfg.arch.conv) {
    conv.push_back({{"channels", c.channels},
                    {"taps", c.taps},
                    {"stride", c.stride},
                    {"padding", padding_name(c.padding)},
                    {"pool", c.pool},
                    {"leaky_slope", c.leaky_slope}});
  }
  ordered_json dense = ordered_json::array();
  for (const auto& d : cfg.arch.dense) {
    dense.push_back({{"outputs", d.outputs},
                     {"relu", d.relu},
                     {"bias", d.bias},
                     {"leaky_slope", d.leaky_slope}});
  }
  ordered_json data = {{"N", cfg.data.length},
                       {"feature_noise_high", cfg.data.feature_noise_high},
                       {"bg_sigma", cfg.data.bg_sigma},
                       {"normalize", cfg.data.normalize},
                       {"seed", nullptr},
                       {"test_count", cfg.test_count}};
  if (cfg.data_seed) data["seed"] = *cfg.data_seed;
  return {{"name", cfg.name},
          {"arch",
           {{"input_length", cfg.arch.input_length},
            {"conv", conv},
            {"dense", dense},
            {"loss", std::string(loss_kind_name(cfg.arch.loss))},
            {"init", std::string(init_kind_name(cfg.arch.init))}}},
          {"train",
           {{"lr_weights", cfg.train.lr_weights},
            {"lr_bias", cfg.train.lr_bias},
            {"epochs", cfg.train.epochs},
            {"realizations_per_epoch", cfg.train.realizations_per_epoch},
            {"seed", cfg.train.seed},
            {"keep_prob", cfg.train.keep_prob},
            {"schedule", cfg.train.schedule == StepSchedule::Layerwise ? "layerwise" : "standard"}}},
          {"data", data}};
}

}  // namespace

std::string config_to_json(const PipelineConfig& cfg) { return config_json(cfg).dump(2); }

Network build_network(const ArchSpec& arch) {
  std::vector<ConvBlock> conv;
  std::size_t channels = 1;
  for (const auto& c : arch.conv) {
    conv.push_back({ConvLayer(c.channels, channels, c.taps, c.stride, c.padding), c.leaky_slope,
                    c.pool});
    channels = c.channels;
  }
  // Dense input width follows from the conv stack.
  std::size_t length = arch.input_length;
  for (const auto& b : conv) {
    length = pooled_length(b.conv.output_length(length), b.pool);
  }
  std::size_t width = channels * length;
  std::vector<DenseBlock> dense;
  for (const auto& d : arch.dense) {
    dense.push_back({DenseLayer(d.outputs, width, d.bias), d.relu, d.leaky_slope});
    width = d.outputs;
  }
  return Network(arch.input_length, std::move(conv), std::move(dense), arch.loss);
}

Network build_network(const PipelineConfig& cfg) {
  Network net = build_network(cfg.arch);
  Rng rng(cfg.init_seed());
  net.initialize(cfg.arch.init, rng);
  return net;
}

namespace {

void write_array(std::ostream& out, const double* v, std::size_t n) {
  out << '[';
  for (std::size_t i = 0; i < n; ++i) out << (i ? ", " : "") << format_real(v[i]);
  out << ']';
}

std::string indent_block(const std::string& text, const std::string& pad) {
  std::string out;
  for (char c : text) {
    out.push_back(c);
    if (c == '\n') out += pad;
  }
  return out;
}

}  // namespace

std::string model_to_json(const Network& net, const PipelineConfig& cfg) {
  std::ostringstream out;
  out << "{\n  \"format\": \"mfcnn-model\",\n  \"version\": 1,\n";
  out << "  \"config\": " << indent_block(config_to_json(cfg), "  ") << ",\n";
  out << "  \"layers\": [\n";
  bool first = true;
  for (const auto& b : net.conv_blocks()) {
    const auto& c = b.conv;
    out << (first ? "" : ",\n") << "    {\n      \"kind\": \"conv\",\n      \"weights\": [";
    first = false;
    for (std::size_t k = 0; k < c.out_channels(); ++k) {
      out << (k ? ", " : "") << '[';
      for (std::size_t p = 0; p < c.in_channels(); ++p) {
        out << (p ? ", " : "");
        write_array(out, &c.weights()[(k * c.in_channels() + p) * c.taps()], c.taps());
      }
      out << ']';
    }
    out << "],\n      \"bias\": ";
    write_array(out, c.bias().data(), c.bias().size());
    out << "\n    }";
  }
  for (const auto& b : net.dense_blocks()) {
    const auto& d = b.dense;
    out << (first ? "" : ",\n") << "    {\n      \"kind\": \"dense\",\n      \"weights\": [";
    first = false;
    for (std::size_t k = 0; k < d.outputs(); ++k) {
      out << (k ? ",\n        " : "\n        ");
      write_array(out, &d.weights()[k * d.inputs()], d.inputs());
    }
    out << "],\n      \"bias\": ";
    write_array(out, d.bias().data(), d.bias().size());
    out << "\n    }";
  }
  out << "\n  ]\n}\n";
  return out.str();
}

namespace {

std::vector<double> number_array(const nlohmann::json& j, std::size_t expected,
                                 const std::string& where) {
  if (!j.is_array() || j.size() != expected) {
    throw ConfigError(where + ": expected an array of " + std::to_string(expected) + " numbers");
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(where + ": expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

LoadedModel model_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("model is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "mfcnn-model") {
    throw ConfigError("model: missing \"format\": \"mfcnn-model\"");
  }
  if (!j.contains("config") || !j.contains("layers") || !j["layers"].is_array()) {
    throw ConfigError("model: missing config or layers");
  }
  PipelineConfig cfg = parse_config(j["config"].dump());
  Network net = build_network(cfg.arch);
  const auto& layers = j["layers"];
  const std::size_t expected = net.conv_blocks().size() + net.dense_blocks().size();
  if (layers.size() != expected) {
    throw ConfigError("model.layers: expected " + std::to_string(expected) + " layers");
  }
  std::size_t li = 0;
  for (std::size_t i = 0; i < net.conv_blocks().size(); ++i, ++li) {
    const std::string where = "model.layers[" + std::to_string(li) + "]";
    const auto& l = layers[li];
    auto& c = net.conv_blocks()[i].conv;
    if (l.value("kind", "") != "conv") throw ConfigError(where + ".kind: expected conv");
    const auto& w = l.at("weights");
    if (!w.is_array() || w.size() != c.out_channels()) throw ConfigError(where + ".weights: shape");
    for (std::size_t k = 0; k < c.out_channels(); ++k) {
      if (!w[k].is_array() || w[k].size() != c.in_channels()) {
        throw ConfigError(where + ".weights[" + std::to_string(k) + "]: shape");
      }
      for (std::size_t p = 0; p < c.in_channels(); ++p) {
        const auto taps = number_array(w[k][p], c.taps(), where + ".weights");
        c.set_kernel(k, p, Signal(taps));
      }
    }
    c.bias() = number_array(l.at("bias"), c.out_channels(), where + ".bias");
  }
  for (std::size_t i = 0; i < net.dense_blocks().size(); ++i, ++li) {
    const std::string where = "model.layers[" + std::to_string(li) + "]";
    const auto& l = layers[li];
    auto& d = net.dense_blocks()[i].dense;
    if (l.value("kind", "") != "dense") throw ConfigError(where + ".kind: expected dense");
    const auto& w = l.at("weights");
    if (!w.is_array() || w.size() != d.outputs()) throw ConfigError(where + ".weights: shape");
    for (std::size_t k = 0; k < d.outputs(); ++k) {
      const auto row = number_array(w[k], d.inputs(), where + ".weights");
      std::copy(row.begin(), row.end(), d.weights().begin() + static_cast<std::ptrdiff_t>(k * d.inputs()));
    }
    d.bias() = number_array(l.at("bias"), d.bias().size(), where + ".bias");
  }
  return {std::move(net), std::move(cfg)};
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read model file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

EvalResult evaluate(const Network& net, const Dataset& data) {
  EvalResult r;
  r.count = data.size();
  for (const auto& s : data) {
    Signal p = predict(net, s.x);
    const auto target = static_cast<std::size_t>(
        std::max_element(s.target.begin(), s.target.end()) - s.target.begin());
    const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    const bool tie = std::count(p.begin(), p.end(), p[best]) > 1;
    if (tie) {
      ++r.ties;
    } else if (best == target) {
      ++r.correct;
    }
    r.outputs.push_back(std::move(p));
    r.target_index.push_back(target);
  }
  r.accuracy = r.count ? static_cast<double>(r.correct) / static_cast<double>(r.count) : 0.0;
  return r;
}

std::string RunReport::to_json() const {
  ordered_json shapes_json = ordered_json::array();
  for (const auto& s : shapes) {
    shapes_json.push_back(
        {{"kind", s.kind}, {"channels", s.channels}, {"length", s.length}, {"parameters", s.parameters}});
  }
  ordered_json j = {{"config", config_name},
                    {"final_train_loss", final_train_loss},
                    {"test_accuracy", test_accuracy},
                    {"test_count", test_count},
                    {"test_ties", test_ties},
                    {"parameter_count", parameter_count},
                    {"dense_weight_count", dense_weight_count},
                    {"clamped_losses", clamped_losses},
                    {"epoch_mean_loss", epoch_mean_loss},
                    {"epoch_mean_p_target", epoch_mean_p_target},
                    {"shapes", shapes_json},
                    {"files", files}};
  return j.dump(2) + "\n";
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

double p_other(const Signal& p, std::size_t target) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (k != target) s += p[k];
  }
  return s;
}

void fill_network_report(RunReport& r, const Network& net, const PipelineConfig& cfg) {
  r.config_name = cfg.name;
  r.parameter_count = net.parameter_count();
  r.dense_weight_count = net.dense_weight_count();
  r.shapes = net.shapes();
}

}  // namespace

TrainArtifacts run_train(const PipelineConfig& cfg,
                         const std::optional<std::filesystem::path>& out_dir, bool gnuplot) {
  validate_config(cfg);
  if (cfg.test_count == 0) throw ConfigError("data.test_count: empty test set");
  Network net = build_network(cfg);
  Rng data_rng(cfg.train_data_seed());
  const Dataset train_set = generate_epoch(cfg.data, cfg.train.realizations_per_epoch, data_rng);
  TrainConfig tc = cfg.train;
  TrainingLog log = train(net, train_set, tc);

  Rng test_rng(cfg.test_data_seed());
  const Dataset test_set = generate_epoch(cfg.data, cfg.test_count, test_rng);
  const EvalResult eval = evaluate(net, test_set);

  RunReport report;
  fill_network_report(report, net, cfg);
  report.epoch_mean_loss = log.epoch_mean_loss();
  report.final_train_loss = report.epoch_mean_loss.back();
  report.test_accuracy = eval.accuracy;
  report.test_count = eval.count;
  report.test_ties = eval.ties;
  report.clamped_losses = log.clamped_losses;
  {
    std::vector<double> sums(cfg.train.epochs, 0.0);
    std::vector<std::size_t> counts(cfg.train.epochs, 0);
    for (const auto& it : log.iterations) {
      sums[it.epoch] += it.output[it.target_index];
      ++counts[it.epoch];
    }
    for (std::size_t e = 0; e < sums.size(); ++e) {
      report.epoch_mean_p_target.push_back(sums[e] / static_cast<double>(counts[e]));
    }
  }

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    report.files = {"model.json", "probs.csv", "weights.csv", "loss.csv", "test_probs.csv",
                    "summary.json"};
    if (gnuplot) report.files.push_back("plot.gp");

    write_file(*out_dir / "model.json", model_to_json(net, cfg));

    std::ostringstream probs;
    probs << "iteration,P_target,P_other\n";
    for (const auto& it : log.iterations) {
      probs << it.iteration << ',' << format_real(it.output[it.target_index]) << ','
            << format_real(p_other(it.output, it.target_index)) << '\n';
    }
    write_file(*out_dir / "probs.csv", probs.str());

    std::ostringstream weights;
    const auto& first = net.dense_blocks().front().dense;
    weights << "iteration";
    for (std::size_t k = 0; k < first.outputs(); ++k)
      for (std::size_t n = 0; n < first.inputs(); ++n) weights << ",w_" << k << '_' << n;
    weights << '\n';
    for (std::size_t i = 0; i < log.dense_weight_trace.size(); ++i) {
      weights << i;
      for (double w : log.dense_weight_trace[i]) weights << ',' << format_real(w);
      weights << '\n';
    }
    write_file(*out_dir / "weights.csv", weights.str());

    std::ostringstream loss;
    loss << "iteration,epoch,loss\n";
    for (const auto& it : log.iterations) {
      loss << it.iteration << ',' << it.epoch << ',' << format_real(it.loss) << '\n';
    }
    write_file(*out_dir / "loss.csv", loss.str());

    std::ostringstream tp;
    tp << "sample,target,P_target,P_other,correct\n";
    for (std::size_t s = 0; s < eval.outputs.size(); ++s) {
      const auto& p = eval.outputs[s];
      const std::size_t t = eval.target_index[s];
      const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
      const bool tie = std::count(p.begin(), p.end(), p[best]) > 1;
      tp << s << ',' << t << ',' << format_real(p[t]) << ',' << format_real(p_other(p, t)) << ','
         << (!tie && best == t ? 1 : 0) << '\n';
    }
    write_file(*out_dir / "test_probs.csv", tp.str());

    if (gnuplot) {
      std::ostringstream gp;
      gp << "set datafile separator ','\n"
         << "set key autotitle columnhead\n"
         << "set terminal pngcairo size 900,1200\n"
         << "set output 'training.png'\n"
         << "set multiplot layout 3,1\n"
         << "set title 'Output probabilities during training'\n"
         << "plot 'probs.csv' using 1:2 with points pt 1 lc rgb 'black' title 'P target', \\\n"
         << "     '' using 1:3 with points pt 7 ps 0.3 lc rgb 'dark-green' title 'P other'\n"
         << "set title 'First dense layer weights'\n"
         << "plot for [c=2:" << first.weight_count() + 1
         << "] 'weights.csv' using 1:c with lines notitle\n"
         << "set title 'Test outputs'\n"
         << "plot 'test_probs.csv' using 1:3 with points pt 1 lc rgb 'black' title 'P target', \\\n"
         << "     '' using 1:4 with points pt 7 ps 0.3 lc rgb 'dark-green' title 'P other'\n"
         << "unset multiplot\n";
      write_file(*out_dir / "plot.gp", gp.str());
    }
    write_file(*out_dir / "summary.json", report.to_json());
  }
  return {std::move(report), std::move(net), std::move(log)};
}

RunReport run_eval(const Network& net, const PipelineConfig& cfg, std::size_t count) {
  if (count == 0) throw ConfigError("empty test set");
  if (net.input_length() != cfg.data.length) {
    throw ConfigError("data.N does not match the model input length");
  }
  Rng rng(cfg.test_data_seed());
  const Dataset test_set = generate_epoch(cfg.data, count, rng);
  const EvalResult eval = evaluate(net, test_set);
  RunReport report;
  fill_network_report(report, net, cfg);
  report.test_accuracy = eval.accuracy;
  report.test_count = eval.count;
  report.test_ties = eval.ties;
  return report;
}

GradCheckRun run_gradcheck(const PipelineConfig& cfg, std::size_t trials, double h) {
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (!(h > 0.0)) throw ConfigError("h must be positive");
  GradCheckRun run;
  run.trials = trials;
  run.h = h;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(mix_seed(cfg.train.seed, 100 + t));
    Network net = build_network(cfg.arch);
    net.initialize(cfg.arch.init, rng);
    // Non-zero biases so the bias paths are exercised away from zero.
    for (auto& b : net.conv_blocks())
      for (double& v : b.conv.bias()) v = rng.uniform(-0.1, 0.1);
    for (auto& b : net.dense_blocks())
      for (double& v : b.dense.bias()) v = rng.uniform(-0.1, 0.1);
    const Sample s = generate_sample(cfg.data, rng);
    const GradCheckReport rep = grad_check(net, s.x, s.target, h);
    run.checked += rep.checked;
    run.excluded += rep.excluded;
    if (rep.checked && (run.worst_path.empty() || rep.max_error > run.max_error)) {
      run.max_error = rep.max_error;
      run.worst_path = rep.worst_path;
      run.worst_trial = t;
    }
  }
  run.passed = run.max_error <= kGradCheckTolerance;
  return run;
}

ParamBudget param_budget(std::uint64_t k, std::uint64_t k2, std::uint64_t m2) {
  if (k == 0 || k2 == 0 || m2 == 0) throw DomainError("K, K2 and M2 must be positive");
  ParamBudget b;
  b.direct = m2 * k * k2;
  b.factored = (m2 + k) * k2;
  b.ratio = static_cast<double>(b.factored) / static_cast<double>(b.direct);
  b.beneficial = b.factored < b.direct;
  return b;
}

}  // namespace mfcnn

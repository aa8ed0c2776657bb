#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mfcnn/mfcnn.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheck = 1;
constexpr int kExitUsage = 2;

struct Overrides {
  std::string config_path;
  std::string preset = "paperA";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::optional<double> lr_bias;
  std::optional<double> keep_prob;
  std::string out_dir;
};

class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

int exit_code_for(mfcnn_status s) {
  return s == MFCNN_ERR_INTERNAL ? kExitCheck : kExitUsage;
}

void check(mfcnn_status s, const std::string& what) {
  if (s == MFCNN_OK) return;
  std::string msg = what + ": " + mfcnn_status_name(s);
  const std::string detail = mfcnn_last_error();
  if (!detail.empty()) msg += ": " + detail;
  throw CliError(exit_code_for(s), msg);
}

// Owns a string returned by the library.
std::string take(char* s) {
  std::string out = s ? s : "";
  mfcnn_string_free(s);
  return out;
}

struct ConfigHandle {
  mfcnn_config* p = nullptr;
  ConfigHandle() = default;
  ConfigHandle(const ConfigHandle&) = delete;
  ConfigHandle& operator=(const ConfigHandle&) = delete;
  ~ConfigHandle() { mfcnn_config_free(p); }
};

struct NetworkHandle {
  mfcnn_network* p = nullptr;
  NetworkHandle() = default;
  NetworkHandle(const NetworkHandle&) = delete;
  NetworkHandle& operator=(const NetworkHandle&) = delete;
  ~NetworkHandle() { mfcnn_network_free(p); }
};

void add_config_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "Pipeline config JSON");
  cmd->add_option("--preset", o.preset, "Built-in preset (paperA, paperB, paperC)");
  cmd->add_option("--seed", o.seed, "Training seed");
  cmd->add_option("--epochs", o.epochs, "Number of epochs");
  cmd->add_option("--lr", o.lr, "Weight learning rate");
  cmd->add_option("--lr-bias", o.lr_bias, "Bias learning rate");
  cmd->add_option("--keep-prob", o.keep_prob, "Dropout keep probability");
}

void apply(ConfigHandle& cfg, const char* key, const std::string& value) {
  check(mfcnn_config_set(cfg.p, key, value.c_str()), std::string("--") + key);
}

std::string real_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void load_config(const Overrides& o, ConfigHandle& cfg) {
  if (!o.config_path.empty()) {
    check(mfcnn_config_load(o.config_path.c_str(), &cfg.p), o.config_path);
  } else {
    check(mfcnn_config_preset(o.preset.c_str(), &cfg.p), "preset " + o.preset);
  }
  if (o.seed) apply(cfg, "seed", std::to_string(*o.seed));
  if (o.epochs) apply(cfg, "epochs", std::to_string(*o.epochs));
  if (o.lr) apply(cfg, "lr", real_text(*o.lr));
  if (o.lr_bias) apply(cfg, "lr_bias", real_text(*o.lr_bias));
  if (o.keep_prob) apply(cfg, "keep_prob", real_text(*o.keep_prob));
}

int cmd_train(const Overrides& o, bool gnuplot) {
  ConfigHandle cfg;
  load_config(o, cfg);
  char* report = nullptr;
  check(mfcnn_run_train(cfg.p, o.out_dir.empty() ? nullptr : o.out_dir.c_str(), gnuplot ? 1 : 0,
                        &report),
        "train");
  std::cout << take(report);
  return kExitOk;
}

int cmd_eval(const Overrides& o, const std::string& model, std::size_t count) {
  NetworkHandle net;
  check(mfcnn_network_load(model.c_str(), &net.p), model);
  ConfigHandle cfg;
  if (!o.config_path.empty()) {
    load_config(o, cfg);
  } else {
    check(mfcnn_network_config(net.p, &cfg.p), "model config");
    if (o.seed) apply(cfg, "seed", std::to_string(*o.seed));
  }
  char* report = nullptr;
  check(mfcnn_run_eval(net.p, cfg.p, count, &report), "eval");
  std::cout << take(report);
  return kExitOk;
}

int cmd_gradcheck(const Overrides& o, std::size_t trials, double h) {
  ConfigHandle cfg;
  load_config(o, cfg);
  char* report = nullptr;
  check(mfcnn_run_gradcheck(cfg.p, trials, h, &report), "gradcheck");
  const std::string text = take(report);
  std::cout << text;
  const auto j = nlohmann::json::parse(text);
  if (!j.at("passed").get<bool>()) {
    std::cerr << "gradient check failed: max relative error "
              << real_text(j.at("max_relative_error").get<double>()) << " at "
              << j.at("worst_parameter").get<std::string>() << " (trial "
              << j.at("worst_trial").get<std::size_t>() << ")\n";
    return kExitCheck;
  }
  return kExitOk;
}

int cmd_matched(const Overrides& o, const std::string& signal, const std::string& templates,
                std::size_t simulate, std::uint64_t sim_seed, bool equal_energy) {
  char* report = nullptr;
  if (simulate > 0) {
    ConfigHandle cfg;
    load_config(o, cfg);
    check(mfcnn_run_matched_simulation(cfg.p, simulate, sim_seed, equal_energy ? 1 : 0, &report),
          "matched simulation");
  } else {
    if (signal.empty() || templates.empty()) {
      throw CliError(kExitUsage, "matched: SIGNAL and TEMPLATES are required without --simulate");
    }
    check(mfcnn_run_matched(signal.c_str(), templates.c_str(),
                            o.out_dir.empty() ? nullptr : o.out_dir.c_str(), equal_energy ? 1 : 0,
                            &report),
          "matched");
  }
  std::cout << take(report);
  return kExitOk;
}

int cmd_shapes(const std::string& arch) {
  char* report = nullptr;
  check(mfcnn_run_shapes(arch.c_str(), &report), arch);
  const std::string text = take(report);
  const auto j = nlohmann::json::parse(text);
  std::printf("%-8s %-5s %8s %9s %12s  %s\n", "layer", "op", "size", "channels", "params", "note");
  for (const auto& row : j.at("rows")) {
    std::string note;
    if (row.at("mismatch").get<bool>()) {
      note = "MISMATCH: expected " + std::to_string(row.at("expect").get<long long>());
    }
    std::printf("%-8s %-5s %8lld %9lld %12llu  %s\n", row.at("name").get<std::string>().c_str(),
                row.at("op").get<std::string>().c_str(), row.at("size").get<long long>(),
                row.at("channels").get<long long>(),
                row.at("parameters").get<unsigned long long>(), note.c_str());
  }
  std::printf("total parameters: %llu\n", j.at("total_parameters").get<unsigned long long>());
  if (j.at("mismatches").get<std::size_t>() > 0) {
    std::printf("%zu layer(s) disagree with the expected size\n",
                j.at("mismatches").get<std::size_t>());
  }
  return kExitOk;
}

int cmd_param_budget(long long k, long long k2, long long m2) {
  if (k <= 0 || k2 <= 0 || m2 <= 0) {
    throw CliError(kExitUsage, "param-budget: K, K2 and M2 must be positive");
  }
  std::uint64_t direct = 0;
  std::uint64_t factored = 0;
  double ratio = 0.0;
  int beneficial = 0;
  check(mfcnn_param_budget(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(k2),
                           static_cast<std::uint64_t>(m2), &direct, &factored, &ratio,
                           &beneficial),
        "param-budget");
  std::printf("direct   M2*K*K2   = %llu\n", static_cast<unsigned long long>(direct));
  std::printf("factored (M2+K)*K2 = %llu\n", static_cast<unsigned long long>(factored));
  std::printf("ratio              = %.6g\n", ratio);
  if (!beneficial) std::printf("factorization not beneficial\n");
  return kExitOk;
}

int cmd_dump(const Overrides& o, std::size_t count, const std::string& path) {
  ConfigHandle cfg;
  load_config(o, cfg);
  check(mfcnn_dump_dataset(cfg.p, count, path.c_str()), "dump");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1-D convolutional network toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mfcnn_version()));

  Overrides o;

  auto* train = app.add_subcommand("train", "Train a network and write result files");
  add_config_options(train, o);
  train->add_option("--out-dir", o.out_dir, "Directory for model, CSVs and summary");
  bool gnuplot = false;
  train->add_flag("--gnuplot", gnuplot, "Also write plot.gp");

  auto* eval = app.add_subcommand("eval", "Score a saved model on fresh samples");
  add_config_options(eval, o);
  std::string model;
  std::size_t count = 100;
  eval->add_option("model", model, "Model JSON")->required();
  eval->add_option("--count", count, "Number of test samples");

  auto* grad = app.add_subcommand("gradcheck", "Compare analytic and numeric gradients");
  add_config_options(grad, o);
  std::size_t trials = 20;
  double h = 1e-6;
  grad->add_option("--trials", trials, "Random network/sample draws")->check(CLI::PositiveNumber);
  grad->add_option("--step", h, "Central-difference step")->check(CLI::PositiveNumber);

  auto* matched = app.add_subcommand("matched", "Run a matched-filter bank");
  add_config_options(matched, o);
  std::string signal;
  std::string templates;
  std::size_t simulate = 0;
  std::uint64_t sim_seed = 7;
  bool equal_energy = false;
  matched->add_option("signal", signal, "Signal CSV");
  matched->add_option("templates", templates, "Templates CSV (name,w0,w1,...)");
  matched->add_option("--out-dir", o.out_dir, "Directory for responses.csv");
  matched->add_option("--simulate", simulate, "Score N noisy two-feature signals instead");
  matched->add_option("--sim-seed", sim_seed, "Seed for --simulate");
  matched->add_flag("--equal-energy", equal_energy, "Scale templates to unit energy");

  auto* shapes = app.add_subcommand("shapes", "Layer output sizes and parameter counts");
  std::string arch;
  shapes->add_option("arch", arch, "Shape description JSON")->required();

  auto* budget = app.add_subcommand("param-budget", "Compare direct and 1x1-factored costs");
  long long k = 0;
  long long k2 = 0;
  long long m2 = 0;
  budget->add_option("K", k, "Input channels")->required();
  budget->add_option("K2", k2, "Output channels")->required();
  budget->add_option("M2", m2, "Kernel taps")->required();

  auto* dump = app.add_subcommand("dump", "Write the training set as CSV");
  add_config_options(dump, o);
  std::size_t dump_count = 200;
  std::string dump_path;
  dump->add_option("output", dump_path, "CSV path")->required();
  dump->add_option("--count", dump_count, "Number of samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train) return cmd_train(o, gnuplot);
    if (*eval) return cmd_eval(o, model, count);
    if (*grad) return cmd_gradcheck(o, trials, h);
    if (*matched) return cmd_matched(o, signal, templates, simulate, sim_seed, equal_energy);
    if (*shapes) return cmd_shapes(arch);
    if (*budget) return cmd_param_budget(k, k2, m2);
    if (*dump) return cmd_dump(o, dump_count, dump_path);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheck;
  }
  return kExitUsage;
}

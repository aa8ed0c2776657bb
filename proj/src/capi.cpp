#include "mfcnn/mfcnn.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "mfcnn/errors.hpp"
#include "mfcnn/matched_filter.hpp"
#include "mfcnn/matched_io.hpp"
#include "mfcnn/pipeline.hpp"
#include "mfcnn/shapes.hpp"

struct mfcnn_config {
  mfcnn::PipelineConfig value;
};

struct mfcnn_network {
  mfcnn::Network net;
  mfcnn::PipelineConfig config;
};

namespace {

thread_local std::string g_last_error;

mfcnn_status status_of(mfcnn::ErrorCode code) {
  switch (code) {
    case mfcnn::ErrorCode::Length: return MFCNN_ERR_LENGTH;
    case mfcnn::ErrorCode::Shape: return MFCNN_ERR_SHAPE;
    case mfcnn::ErrorCode::Domain: return MFCNN_ERR_DOMAIN;
    case mfcnn::ErrorCode::ZeroEnergy: return MFCNN_ERR_ZERO_ENERGY;
    case mfcnn::ErrorCode::Config: return MFCNN_ERR_CONFIG;
    case mfcnn::ErrorCode::TapeMismatch: return MFCNN_ERR_TAPE_MISMATCH;
    case mfcnn::ErrorCode::Io: return MFCNN_ERR_IO;
  }
  return MFCNN_ERR_INTERNAL;
}

mfcnn_status fail(mfcnn_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <typename F>
mfcnn_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const mfcnn::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MFCNN_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MFCNN_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MFCNN_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

mfcnn::Signal to_signal(const double* x, std::size_t n) {
  return mfcnn::Signal(std::vector<double>(x, x + n));
}

mfcnn_status copy_out(const mfcnn::Signal& y, double* out, std::size_t capacity,
                      std::size_t* out_len) {
  if (out_len) *out_len = y.size();
  if (!out) return MFCNN_OK;
  if (capacity < y.size()) {
    return fail(MFCNN_ERR_BUFFER_TOO_SMALL,
                "output needs " + std::to_string(y.size()) + " elements");
  }
  std::copy(y.begin(), y.end(), out);
  return MFCNN_OK;
}

std::string read_text(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mfcnn::IoError(std::string("cannot read ") + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

#define MFCNN_REQUIRE(cond, what) \
  if (!(cond)) return fail(MFCNN_ERR_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* mfcnn_version(void) { return "1.0.0"; }

const char* mfcnn_status_name(mfcnn_status status) {
  switch (status) {
    case MFCNN_OK: return "ok";
    case MFCNN_ERR_LENGTH: return "length error";
    case MFCNN_ERR_SHAPE: return "shape error";
    case MFCNN_ERR_DOMAIN: return "domain error";
    case MFCNN_ERR_ZERO_ENERGY: return "zero energy";
    case MFCNN_ERR_CONFIG: return "config error";
    case MFCNN_ERR_TAPE_MISMATCH: return "tape mismatch";
    case MFCNN_ERR_IO: return "i/o error";
    case MFCNN_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MFCNN_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case MFCNN_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* mfcnn_last_error(void) { return g_last_error.c_str(); }

void mfcnn_string_free(char* s) { std::free(s); }

mfcnn_status mfcnn_xcorr_valid(const double* x, size_t n, const double* w, size_t m,
                               double* out, size_t out_capacity, size_t* out_len) {
  MFCNN_REQUIRE((x || n == 0) && (w || m == 0), "null input");
  return guarded([&] {
    return copy_out(mfcnn::xcorr_valid(to_signal(x, n), to_signal(w, m)), out, out_capacity,
                    out_len);
  });
}

mfcnn_status mfcnn_xcorr_same(const double* x, size_t n, const double* w, size_t m,
                              double* out, size_t out_capacity, size_t* out_len) {
  MFCNN_REQUIRE((x || n == 0) && (w || m == 0), "null input");
  return guarded([&] {
    return copy_out(mfcnn::xcorr_same(to_signal(x, n), to_signal(w, m)), out, out_capacity,
                    out_len);
  });
}

mfcnn_status mfcnn_conv_full(const double* a, size_t n, const double* b, size_t m,
                             double* out, size_t out_capacity, size_t* out_len) {
  MFCNN_REQUIRE((a || n == 0) && (b || m == 0), "null input");
  return guarded([&] {
    return copy_out(mfcnn::conv_full(to_signal(a, n), to_signal(b, m)), out, out_capacity,
                    out_len);
  });
}

mfcnn_status mfcnn_softmax(const double* y, size_t n, double* out) {
  MFCNN_REQUIRE(y && out, "null argument");
  return guarded([&] { return copy_out(mfcnn::softmax(to_signal(y, n)), out, n, nullptr); });
}

mfcnn_status mfcnn_energy(const double* x, size_t n, double* out) {
  MFCNN_REQUIRE((x || n == 0) && out, "null argument");
  return guarded([&] {
    *out = mfcnn::energy(to_signal(x, n));
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_detect_feature(const double* x, size_t n, const double* templates,
                                  const size_t* template_lengths, size_t template_count,
                                  size_t* winner, double* peak_values, size_t* peak_indices) {
  MFCNN_REQUIRE(x && templates && template_lengths && winner, "null argument");
  return guarded([&] {
    std::vector<mfcnn::Signal> bank;
    const double* cursor = templates;
    for (size_t k = 0; k < template_count; ++k) {
      bank.push_back(to_signal(cursor, template_lengths[k]));
      cursor += template_lengths[k];
    }
    const auto report = mfcnn::bank_apply(to_signal(x, n), mfcnn::TemplateBank(std::move(bank)));
    *winner = report.winner;
    for (size_t k = 0; k < template_count; ++k) {
      if (peak_values) peak_values[k] = report.per_template[k].peak_value;
      if (peak_indices) peak_indices[k] = report.per_template[k].peak_index;
    }
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_config_preset(const char* name, mfcnn_config** out) {
  MFCNN_REQUIRE(name && out, "null argument");
  return guarded([&] {
    *out = new mfcnn_config{mfcnn::preset(name)};
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_config_parse(const char* json_text, mfcnn_config** out) {
  MFCNN_REQUIRE(json_text && out, "null argument");
  return guarded([&] {
    *out = new mfcnn_config{mfcnn::parse_config(json_text)};
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_config_load(const char* path, mfcnn_config** out) {
  MFCNN_REQUIRE(path && out, "null argument");
  return guarded([&] {
    *out = new mfcnn_config{mfcnn::load_config(path)};
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_config_set(mfcnn_config* cfg, const char* key, const char* value) {
  MFCNN_REQUIRE(cfg && key && value, "null argument");
  return guarded([&] {
    const std::string k = key;
    const std::string v = value;
    auto& c = cfg->value;
    auto as_real = [&] {
      std::size_t used = 0;
      double d = 0.0;
      try {
        d = std::stod(v, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != v.size() || v.empty()) throw mfcnn::ConfigError(k + ": expected a number");
      return d;
    };
    auto as_uint = [&] {
      if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
        throw mfcnn::ConfigError(k + ": expected a non-negative integer");
      }
      try {
        return static_cast<std::uint64_t>(std::stoull(v));
      } catch (const std::exception&) {
        throw mfcnn::ConfigError(k + ": integer out of range");
      }
    };
    mfcnn::PipelineConfig next = c;
    if (k == "seed") {
      next.train.seed = as_uint();
    } else if (k == "epochs") {
      next.train.epochs = as_uint();
    } else if (k == "lr") {
      next.train.lr_weights = as_real();
    } else if (k == "lr_bias") {
      next.train.lr_bias = as_real();
    } else if (k == "keep_prob") {
      next.train.keep_prob = as_real();
    } else if (k == "realizations") {
      next.train.realizations_per_epoch = as_uint();
    } else if (k == "test_count") {
      next.test_count = as_uint();
    } else if (k == "schedule") {
      if (v == "standard") {
        next.train.schedule = mfcnn::StepSchedule::Standard;
      } else if (v == "layerwise") {
        next.train.schedule = mfcnn::StepSchedule::Layerwise;
      } else {
        throw mfcnn::ConfigError("schedule: expected standard or layerwise");
      }
    } else {
      throw mfcnn::ConfigError("unknown override '" + k + "'");
    }
    mfcnn::validate_config(next);
    c = std::move(next);
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_config_to_json(const mfcnn_config* cfg, char** out_json) {
  MFCNN_REQUIRE(cfg && out_json, "null argument");
  return guarded([&] {
    *out_json = dup_string(mfcnn::config_to_json(cfg->value));
    return MFCNN_OK;
  });
}

void mfcnn_config_free(mfcnn_config* cfg) { delete cfg; }

mfcnn_status mfcnn_network_create(const mfcnn_config* cfg, mfcnn_network** out) {
  MFCNN_REQUIRE(cfg && out, "null argument");
  return guarded([&] {
    *out = new mfcnn_network{mfcnn::build_network(cfg->value), cfg->value};
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_network_load(const char* model_path, mfcnn_network** out) {
  MFCNN_REQUIRE(model_path && out, "null argument");
  return guarded([&] {
    auto loaded = mfcnn::load_model(model_path);
    *out = new mfcnn_network{std::move(loaded.net), std::move(loaded.config)};
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_network_save(const mfcnn_network* net, const char* model_path) {
  MFCNN_REQUIRE(net && model_path, "null argument");
  return guarded([&] {
    std::ofstream out(model_path, std::ios::binary);
    if (!out) throw mfcnn::IoError(std::string("cannot write ") + model_path);
    out << mfcnn::model_to_json(net->net, net->config);
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_network_config(const mfcnn_network* net, mfcnn_config** out) {
  MFCNN_REQUIRE(net && out, "null argument");
  return guarded([&] {
    *out = new mfcnn_config{net->config};
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_network_info(const mfcnn_network* net, size_t* input_length,
                                size_t* output_length, size_t* parameter_count,
                                size_t* dense_weight_count) {
  MFCNN_REQUIRE(net, "null network");
  return guarded([&] {
    if (input_length) *input_length = net->net.input_length();
    if (output_length) *output_length = net->net.output_length();
    if (parameter_count) *parameter_count = net->net.parameter_count();
    if (dense_weight_count) *dense_weight_count = net->net.dense_weight_count();
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_network_zero(mfcnn_network* net) {
  MFCNN_REQUIRE(net, "null network");
  return guarded([&] {
    for (double* p : net->net.parameter_pointers()) *p = 0.0;
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_network_forward(const mfcnn_network* net, const double* x, size_t n,
                                   double* out, size_t out_capacity) {
  MFCNN_REQUIRE(net && x && out, "null argument");
  return guarded([&] {
    return copy_out(mfcnn::predict(net->net, to_signal(x, n)), out, out_capacity, nullptr);
  });
}

void mfcnn_network_free(mfcnn_network* net) { delete net; }

mfcnn_status mfcnn_run_train(const mfcnn_config* cfg, const char* out_dir, int write_gnuplot,
                             char** report_json) {
  MFCNN_REQUIRE(cfg && report_json, "null argument");
  return guarded([&] {
    std::optional<std::filesystem::path> dir;
    if (out_dir && *out_dir) dir = out_dir;
    const auto run = mfcnn::run_train(cfg->value, dir, write_gnuplot != 0);
    *report_json = dup_string(run.report.to_json());
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_run_eval(const mfcnn_network* net, const mfcnn_config* cfg, size_t count,
                            char** report_json) {
  MFCNN_REQUIRE(net && report_json, "null argument");
  return guarded([&] {
    const auto& c = cfg ? cfg->value : net->config;
    *report_json = dup_string(mfcnn::run_eval(net->net, c, count).to_json());
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_run_gradcheck(const mfcnn_config* cfg, size_t trials, double h,
                                 char** report_json) {
  MFCNN_REQUIRE(cfg && report_json, "null argument");
  return guarded([&] {
    const auto run = mfcnn::run_gradcheck(cfg->value, trials, h);
    nlohmann::ordered_json j = {{"config", cfg->value.name},
                                {"trials", run.trials},
                                {"h", run.h},
                                {"max_relative_error", run.max_error},
                                {"tolerance", mfcnn::kGradCheckTolerance},
                                {"worst_parameter", run.worst_path},
                                {"worst_trial", run.worst_trial},
                                {"checked", run.checked},
                                {"excluded_kink_adjacent", run.excluded},
                                {"passed", run.passed}};
    *report_json = dup_string(j.dump(2) + "\n");
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_run_matched(const char* signal_csv_path, const char* templates_csv_path,
                               const char* out_dir, int equal_energy, char** report_json) {
  MFCNN_REQUIRE(signal_csv_path && templates_csv_path && report_json, "null argument");
  return guarded([&] {
    const auto x = mfcnn::parse_signal_csv(read_text(signal_csv_path));
    auto named = mfcnn::parse_templates_csv(read_text(templates_csv_path));
    if (equal_energy) named.bank = named.bank.normalized();
    const auto report = mfcnn::bank_apply(x, named.bank);
    nlohmann::ordered_json per = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < named.names.size(); ++k) {
      per.push_back({{"name", named.names[k]},
                     {"peak_value", report.per_template[k].peak_value},
                     {"peak_index", report.per_template[k].peak_index},
                     {"template_energy", mfcnn::energy(named.bank[k])}});
    }
    nlohmann::ordered_json j = {{"templates", per},
                                {"winner", report.winner},
                                {"winner_name", named.names[report.winner]},
                                {"responses_csv", nullptr}};
    if (out_dir && *out_dir) {
      std::filesystem::create_directories(out_dir);
      const auto path = std::filesystem::path(out_dir) / "responses.csv";
      std::ofstream out(path, std::ios::binary);
      if (!out) throw mfcnn::IoError("cannot write " + path.string());
      out << mfcnn::responses_csv(named, report);
      j["responses_csv"] = path.string();
    }
    *report_json = dup_string(j.dump(2) + "\n");
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_run_matched_simulation(const mfcnn_config* cfg, size_t trials, uint64_t seed,
                                          int equal_energy, char** report_json) {
  MFCNN_REQUIRE(report_json, "null argument");
  return guarded([&] {
    const mfcnn::GenConfig data = cfg ? cfg->value.data : mfcnn::GenConfig{};
    const auto sim = mfcnn::run_matched_simulation(data, trials, seed, equal_energy != 0);
    nlohmann::ordered_json j = {{"trials", sim.trials}, {"correct", sim.correct}, {"seed", seed}};
    *report_json = dup_string(j.dump(2) + "\n");
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_run_shapes(const char* arch_path, char** report_json) {
  MFCNN_REQUIRE(arch_path && report_json, "null argument");
  return guarded([&] {
    const auto arch = mfcnn::parse_shape_arch(read_text(arch_path));
    *report_json = dup_string(mfcnn::shape_table_to_json(mfcnn::compute_shapes(arch)) + "\n");
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_param_budget(uint64_t k, uint64_t k2, uint64_t m2, uint64_t* direct,
                                uint64_t* factored, double* ratio, int* beneficial) {
  return guarded([&] {
    const auto b = mfcnn::param_budget(k, k2, m2);
    if (direct) *direct = b.direct;
    if (factored) *factored = b.factored;
    if (ratio) *ratio = b.ratio;
    if (beneficial) *beneficial = b.beneficial ? 1 : 0;
    return MFCNN_OK;
  });
}

mfcnn_status mfcnn_dump_dataset(const mfcnn_config* cfg, size_t count, const char* csv_path) {
  MFCNN_REQUIRE(cfg && csv_path, "null argument");
  return guarded([&] {
    mfcnn::Rng rng(cfg->value.train_data_seed());
    const auto data = mfcnn::generate_epoch(cfg->value.data, count, rng);
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw mfcnn::IoError(std::string("cannot write ") + csv_path);
    mfcnn::write_dataset_csv(out, data);
    return MFCNN_OK;
  });
}

}  // extern "C"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "mfcnn/mfcnn.h"

namespace fs = std::filesystem;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  mfcnn_string_free(s);
  return out;
}

struct Config {
  mfcnn_config* p = nullptr;
  ~Config() { mfcnn_config_free(p); }
};

struct Net {
  mfcnn_network* p = nullptr;
  ~Net() { mfcnn_network_free(p); }
};

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(mfcnn_version()) == "1.0.0");
  CHECK(std::string(mfcnn_status_name(MFCNN_OK)) == "ok");
  CHECK(std::string(mfcnn_status_name(MFCNN_ERR_BUFFER_TOO_SMALL)) == "buffer too small");
  CHECK(std::string(mfcnn_status_name(static_cast<mfcnn_status>(99))) == "unknown status");
}

TEST_CASE("kernels report lengths and short buffers") {
  const double x[] = {1, 2, 3, 4, 5};
  const double w[] = {1, 0, -1};
  size_t len = 0;
  CHECK(mfcnn_xcorr_valid(x, 5, w, 3, nullptr, 0, &len) == MFCNN_OK);
  CHECK(len == 3);
  double out[5] = {};
  CHECK(mfcnn_xcorr_valid(x, 5, w, 3, out, 2, &len) == MFCNN_ERR_BUFFER_TOO_SMALL);
  REQUIRE(mfcnn_xcorr_valid(x, 5, w, 3, out, 5, &len) == MFCNN_OK);
  CHECK(out[0] == -2.0);
  CHECK(out[2] == -2.0);
  CHECK(mfcnn_xcorr_same(x, 5, w, 3, out, 5, &len) == MFCNN_OK);
  CHECK(len == 5);
  CHECK(out[0] == -2.0);
  CHECK(mfcnn_xcorr_same(x, 5, w, 2, out, 5, &len) == MFCNN_ERR_LENGTH);
  CHECK(mfcnn_xcorr_valid(w, 3, x, 5, out, 5, &len) == MFCNN_ERR_LENGTH);
  CHECK(std::string(mfcnn_last_error()) != "");
  CHECK(mfcnn_conv_full(x, 2, w, 3, nullptr, 0, &len) == MFCNN_OK);
  CHECK(len == 4);

  double p[2];
  const double y[] = {0.0, std::log(3.0)};
  REQUIRE(mfcnn_softmax(y, 2, p) == MFCNN_OK);
  CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-15));
  double e = 0;
  CHECK(mfcnn_energy(x, 5, &e) == MFCNN_OK);
  CHECK(e == 55.0);
  CHECK(mfcnn_energy(nullptr, 5, &e) == MFCNN_ERR_INVALID_ARGUMENT);
}

TEST_CASE("detect_feature") {
  const double x[] = {0, 0, 1, 1, 1, 0, 0, 0};
  const double templates[] = {1, 1, 1, 0.5, 1, 0.5};
  const size_t lengths[] = {3, 3};
  size_t winner = 9;
  double peaks[2];
  size_t idx[2];
  REQUIRE(mfcnn_detect_feature(x, 8, templates, lengths, 2, &winner, peaks, idx) == MFCNN_OK);
  CHECK(winner == 0);
  CHECK(peaks[0] == 3.0);
  CHECK(idx[0] == 2);
  CHECK(mfcnn_detect_feature(x, 8, templates, lengths, 0, &winner, peaks, idx) != MFCNN_OK);
}

TEST_CASE("config handles") {
  Config cfg;
  CHECK(mfcnn_config_preset("nope", &cfg.p) == MFCNN_ERR_CONFIG);
  CHECK(cfg.p == nullptr);
  REQUIRE(mfcnn_config_preset("paperB", &cfg.p) == MFCNN_OK);
  CHECK(mfcnn_config_set(cfg.p, "epochs", "3") == MFCNN_OK);
  CHECK(mfcnn_config_set(cfg.p, "epochs", "0") == MFCNN_ERR_CONFIG);
  CHECK(mfcnn_config_set(cfg.p, "epochs", "three") == MFCNN_ERR_CONFIG);
  CHECK(mfcnn_config_set(cfg.p, "colour", "red") == MFCNN_ERR_CONFIG);
  CHECK(std::string(mfcnn_last_error()).find("colour") != std::string::npos);
  CHECK(mfcnn_config_set(cfg.p, "schedule", "layerwise") == MFCNN_OK);
  CHECK(mfcnn_config_set(cfg.p, "keep_prob", "1.5") == MFCNN_ERR_CONFIG);
  char* json = nullptr;
  REQUIRE(mfcnn_config_to_json(cfg.p, &json) == MFCNN_OK);
  const auto j = nlohmann::json::parse(take(json));
  CHECK(j["train"]["epochs"] == 3);
  CHECK(j["train"]["schedule"] == "layerwise");

  Config parsed;
  CHECK(mfcnn_config_parse("{\"train\": {\"bogus\": 1}}", &parsed.p) == MFCNN_ERR_CONFIG);
  CHECK(std::string(mfcnn_last_error()).find("train.bogus") != std::string::npos);
  CHECK(mfcnn_config_parse(j.dump().c_str(), &parsed.p) == MFCNN_OK);
  CHECK(mfcnn_config_load("/nonexistent.json", &parsed.p) != MFCNN_OK);
  CHECK(mfcnn_config_preset(nullptr, &parsed.p) == MFCNN_ERR_INVALID_ARGUMENT);
  CHECK(mfcnn_config_set(nullptr, "seed", "1") == MFCNN_ERR_INVALID_ARGUMENT);
}

TEST_CASE("network handles") {
  Config cfg;
  REQUIRE(mfcnn_config_preset("paperC", &cfg.p) == MFCNN_OK);
  Net net;
  REQUIRE(mfcnn_network_create(cfg.p, &net.p) == MFCNN_OK);
  size_t in = 0, out = 0, params = 0, dense = 0;
  REQUIRE(mfcnn_network_info(net.p, &in, &out, &params, &dense) == MFCNN_OK);
  CHECK(in == 8);
  CHECK(out == 2);
  CHECK(dense == 48);
  CHECK(params == 5 * 4 + 48);

  const double x[8] = {0, 0, 0.5, 1, 0.5, 0, 0, 0};
  double p[2];
  REQUIRE(mfcnn_network_forward(net.p, x, 8, p, 2) == MFCNN_OK);
  CHECK(p[0] + p[1] == doctest::Approx(1.0));
  CHECK(mfcnn_network_forward(net.p, x, 7, p, 2) == MFCNN_ERR_SHAPE);
  CHECK(mfcnn_network_forward(net.p, x, 8, p, 1) == MFCNN_ERR_BUFFER_TOO_SMALL);

  const fs::path path = fs::temp_directory_path() / "mfcnn_capi_model.json";
  REQUIRE(mfcnn_network_save(net.p, path.string().c_str()) == MFCNN_OK);
  Net loaded;
  REQUIRE(mfcnn_network_load(path.string().c_str(), &loaded.p) == MFCNN_OK);
  double q[2];
  REQUIRE(mfcnn_network_forward(loaded.p, x, 8, q, 2) == MFCNN_OK);
  CHECK(std::memcmp(p, q, sizeof p) == 0);
  fs::remove(path);
  CHECK(mfcnn_network_load("/nonexistent/model.json", &loaded.p) == MFCNN_ERR_IO);

  Config echo;
  REQUIRE(mfcnn_network_config(loaded.p, &echo.p) == MFCNN_OK);
  REQUIRE(mfcnn_network_zero(loaded.p) == MFCNN_OK);
  REQUIRE(mfcnn_network_forward(loaded.p, x, 8, q, 2) == MFCNN_OK);
  CHECK(q[0] == 0.5);
  CHECK(q[1] == 0.5);

  char* report = nullptr;
  REQUIRE(mfcnn_run_eval(loaded.p, echo.p, 50, &report) == MFCNN_OK);
  const auto r = nlohmann::json::parse(take(report));
  CHECK(r["test_count"] == 50);
  CHECK(r["test_ties"] == 50);
  CHECK(mfcnn_run_eval(loaded.p, echo.p, 0, &report) == MFCNN_ERR_CONFIG);
  CHECK(mfcnn_network_create(nullptr, &net.p) == MFCNN_ERR_INVALID_ARGUMENT);
}

TEST_CASE("command entry points") {
  Config cfg;
  REQUIRE(mfcnn_config_preset("paperA", &cfg.p) == MFCNN_OK);
  char* report = nullptr;
  REQUIRE(mfcnn_run_gradcheck(cfg.p, 3, 1e-6, &report) == MFCNN_OK);
  auto g = nlohmann::json::parse(take(report));
  CHECK(g["passed"] == true);
  CHECK(g["trials"] == 3);
  CHECK(g["max_relative_error"].get<double>() <= 1e-6);
  REQUIRE(mfcnn_run_gradcheck(cfg.p, 3, 0.1, &report) == MFCNN_OK);
  g = nlohmann::json::parse(take(report));
  CHECK(g["passed"] == false);

  REQUIRE(mfcnn_run_matched_simulation(cfg.p, 50, 7, 0, &report) == MFCNN_OK);
  const auto m = nlohmann::json::parse(take(report));
  CHECK(m["trials"] == 50);
  CHECK(m["correct"].get<int>() >= 48);

  REQUIRE(mfcnn_config_set(cfg.p, "epochs", "1") == MFCNN_OK);
  REQUIRE(mfcnn_run_train(cfg.p, nullptr, 0, &report) == MFCNN_OK);
  const auto t = nlohmann::json::parse(take(report));
  CHECK(t["dense_weight_count"] == 48);

  const fs::path csv = fs::temp_directory_path() / "mfcnn_capi_dump.csv";
  REQUIRE(mfcnn_dump_dataset(cfg.p, 4, csv.string().c_str()) == MFCNN_OK);
  CHECK(fs::file_size(csv) > 0);
  fs::remove(csv);

  uint64_t direct = 0, factored = 0;
  double ratio = 0;
  int beneficial = -1;
  REQUIRE(mfcnn_param_budget(4, 5, 3, &direct, &factored, &ratio, &beneficial) == MFCNN_OK);
  CHECK(direct == 60);
  CHECK(factored == 35);
  CHECK(ratio == doctest::Approx(35.0 / 60.0));
  CHECK(beneficial == 1);
  CHECK(mfcnn_param_budget(0, 5, 3, &direct, &factored, &ratio, &beneficial) == MFCNN_ERR_DOMAIN);
  CHECK(mfcnn_run_shapes("/nonexistent.json", &report) != MFCNN_OK);
}

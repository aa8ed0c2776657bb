#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mfcnn/errors.hpp"
#include "mfcnn/pipeline.hpp"

using namespace mfcnn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mfcnn_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("preset weight counts") {
  CHECK(build_network(preset("paperA")).dense_weight_count() == 48);
  CHECK(build_network(preset("paperB")).dense_weight_count() == 12);
  CHECK(build_network(preset("paperC")).dense_weight_count() == 48);
  CHECK(build_network(preset("paperA")).parameter_count() == 4 * (3 + 1) + 48);
  CHECK(build_network(preset("paperC")).parameter_count() == 5 * 4 + 48);
  CHECK(preset_names() == std::vector<std::string>{"paperA", "paperB", "paperC"});
  CHECK_THROWS_AS(preset("paperD"), ConfigError);
}

TEST_CASE("config parsing") {
  const auto cfg = parse_config(R"({"preset": "paperB", "train": {"epochs": 3, "seed": 9}})");
  CHECK(cfg.arch.conv[0].pool == 3);
  CHECK(cfg.train.epochs == 3);
  CHECK(cfg.train.seed == 9);
  const auto custom = parse_config(R"({
    "name": "tiny",
    "arch": {"input_length": 10,
             "conv": [{"channels": 2, "taps": 3, "pool": 2}],
             "dense": [{"outputs": 2}],
             "loss": "softmax_cross_entropy", "init": "xavier_uniform"},
    "data": {"N": 10}})");
  CHECK(custom.name == "tiny");
  CHECK(custom.arch.init == InitKind::XavierUniform);
  CHECK(build_network(custom).dense_weight_count() == 2 * 4 * 2);
}

TEST_CASE("config errors name the offending field") {
  CHECK(config_error(R"({"train": {"epochs": 0}})").find("train.epochs") != std::string::npos);
  CHECK(config_error(R"({"train": {"lr": 0.1}})").find("train.lr") != std::string::npos);
  CHECK(config_error(R"({"arch": {"conv": [{"taps": "x"}]}})").find("arch.conv[0].taps") !=
        std::string::npos);
  CHECK(config_error(R"({"data": {"bg_sigma": -1}})").find("bg_sigma") != std::string::npos);
  CHECK(config_error(R"({"preset": "paperA", "arch": {"input_length": 2}})") != "");
  CHECK(config_error("{not json") != "");
  CHECK(config_error(R"({"arch": {"conv": [{"taps": 9}]}})") != "");
}

TEST_CASE("config JSON round-trips") {
  for (const auto& name : preset_names()) {
    const auto cfg = preset(name);
    const std::string text = config_to_json(cfg);
    CHECK(config_to_json(parse_config(text)) == text);
  }
}

TEST_CASE("model JSON round-trips exactly") {
  const auto cfg = preset("paperC");
  const Network net = build_network(cfg);
  const std::string text = model_to_json(net, cfg);
  const auto loaded = model_from_json(text);
  CHECK(model_to_json(loaded.net, loaded.config) == text);
  Network a = net;
  Network b = loaded.net;
  auto pa = a.parameter_pointers();
  auto pb = b.parameter_pointers();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t j = 0; j < pa.size(); ++j) CHECK(*pa[j] == *pb[j]);
  const auto j = nlohmann::json::parse(text);
  CHECK(j["layers"][0]["weights"].size() == 5);
  CHECK(j["layers"][0]["weights"][0][0].size() == 3);
}

TEST_CASE("corrupt models are rejected") {
  CHECK_THROWS_AS(model_from_json("{}"), ConfigError);
  CHECK_THROWS_AS(model_from_json("[1,2"), ConfigError);
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), IoError);
  auto cfg = preset("paperA");
  auto j = nlohmann::json::parse(model_to_json(build_network(cfg), cfg));
  j["layers"][0]["bias"].erase(0);
  CHECK_THROWS(model_from_json(j.dump()));
}

TEST_CASE("format_real") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(1.0) == "1");
  CHECK(format_real(-2.5e-300) == "-2.5e-300");
  CHECK(std::stod(format_real(0.1 + 0.2)) == 0.1 + 0.2);
}

TEST_CASE("training writes deterministic files") {
  auto cfg = preset("paperB");
  cfg.train.epochs = 2;
  const auto d1 = scratch("train1");
  const auto d2 = scratch("train2");
  const auto r1 = run_train(cfg, d1, true);
  run_train(cfg, d2, true);
  for (const char* f : {"model.json", "probs.csv", "weights.csv", "loss.csv", "test_probs.csv",
                        "summary.json", "plot.gp"}) {
    REQUIRE(fs::exists(d1 / f));
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  CHECK(r1.report.dense_weight_count == 12);
  CHECK(r1.report.parameter_count == build_network(cfg).parameter_count());

  std::istringstream probs(slurp(d1 / "probs.csv"));
  std::string line;
  std::getline(probs, line);
  CHECK(line == "iteration,P_target,P_other");
  std::size_t rows = 0;
  while (std::getline(probs, line)) {
    std::stringstream row(line);
    std::string it, a, b;
    std::getline(row, it, ',');
    std::getline(row, a, ',');
    std::getline(row, b, ',');
    CHECK(std::abs(std::stod(a) + std::stod(b) - 1.0) <= 1e-12);
    ++rows;
  }
  CHECK(rows == 2 * cfg.train.realizations_per_epoch);

  std::istringstream weights(slurp(d1 / "weights.csv"));
  std::getline(weights, line);
  CHECK(line.rfind("iteration,w_0_0,", 0) == 0);

  const auto summary = nlohmann::json::parse(slurp(d1 / "summary.json"));
  CHECK(summary["dense_weight_count"] == 12);
  CHECK(summary["test_accuracy"].get<double>() >= 0.0);
  CHECK(summary["test_accuracy"].get<double>() <= 1.0);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("saved model re-evaluates to the training report") {
  auto cfg = preset("paperA");
  const auto dir = scratch("eval");
  const auto run = run_train(cfg, dir);
  const auto loaded = load_model(dir / "model.json");
  const auto report = run_eval(loaded.net, loaded.config, cfg.test_count);
  CHECK(report.test_accuracy == run.report.test_accuracy);
  CHECK(report.test_count == 100);
  fs::remove_all(dir);
}

TEST_CASE("evaluation edge cases") {
  const auto cfg = preset("paperA");
  CHECK_THROWS_WITH_AS(run_eval(build_network(cfg), cfg, 0), doctest::Contains("empty test set"),
                       ConfigError);
  // All-zero weights tie on every sample and ties count as incorrect.
  const auto zero = run_eval(build_network(cfg.arch), cfg, 100);
  CHECK(zero.test_ties == 100);
  CHECK(zero.test_accuracy == 0.0);
  // An untrained random model sits near chance.
  const auto untrained = run_eval(build_network(cfg), cfg, 100);
  CHECK(std::abs(untrained.test_accuracy - 0.5) <= 0.15);
}

TEST_CASE("run_gradcheck") {
  const auto run = run_gradcheck(preset("paperA"), 5, 1e-6);
  CHECK(run.passed);
  CHECK(run.trials == 5);
  CHECK_FALSE(run_gradcheck(preset("paperA"), 5, 1e-1).passed);
  CHECK_THROWS_AS(run_gradcheck(preset("paperA"), 0, 1e-6), ConfigError);
}

TEST_CASE("parameter budget") {
  const auto b = param_budget(4, 5, 3);
  CHECK(b.direct == 60);
  CHECK(b.factored == 35);
  CHECK(b.beneficial);
  const auto m1 = param_budget(4, 5, 1);
  CHECK(m1.direct == 20);
  CHECK(m1.factored == 25);
  CHECK_FALSE(m1.beneficial);
  const auto k1 = param_budget(1, 5, 3);
  CHECK(k1.direct == 15);
  CHECK(k1.factored == 20);
  CHECK_FALSE(k1.beneficial);
  CHECK_THROWS_AS(param_budget(0, 1, 1), DomainError);
}

TEST_CASE("seed derivation") {
  auto cfg = preset("paperA");
  CHECK(cfg.init_seed() != cfg.train_data_seed());
  CHECK(cfg.test_data_seed() != cfg.train_data_seed());
  cfg.data_seed = 42;
  CHECK(cfg.train_data_seed() == 42);
}

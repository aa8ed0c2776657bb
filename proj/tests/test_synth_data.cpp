#include <cmath>
#include <sstream>

#include "doctest.h"
#include "mfcnn/errors.hpp"
#include "mfcnn/synth_data.hpp"

using namespace mfcnn;

TEST_CASE("noiseless rectangular feature at offset 4") {
  GenConfig cfg;
  cfg.bg_sigma = 0.0;
  cfg.feature_noise_high = 0.0;
  cfg.normalize = false;
  Rng rng(1);
  const Sample s = generate_sample_at(cfg, 1, 4, rng);
  CHECK(s.x == Signal{0, 0, 0, 0, 1, 1, 1, 0});
  CHECK(s.target == Signal{1, 0});
  CHECK(generate_sample_at(cfg, 0, 0, rng).target == Signal{0, 1});
}

TEST_CASE("documented draw order") {
  GenConfig cfg;
  Rng a(77);
  Rng b(77);
  const Sample s = generate_sample(cfg, a);

  const std::size_t feature = b.index(2);
  const std::size_t offset = b.index(cfg.length - 3 + 1);
  CHECK(s.meta.feature_index == feature);
  CHECK(s.meta.offset == offset);
  std::vector<double> x(cfg.length, 0.0);
  const std::vector<double> base =
      feature == 0 ? std::vector<double>{-0.5, 1.0, -0.5} : std::vector<double>{1.0, 1.0, 1.0};
  for (std::size_t m = 0; m < 3; ++m) x[offset + m] = base[m] + b.uniform(0.0, 0.3);
  for (double& v : x) v += 0.05 * b.normal();
  double e = 0.0;
  for (double v : x) e += v * v;
  for (std::size_t n = 0; n < x.size(); ++n) CHECK(s.x[n] == doctest::Approx(x[n] / std::sqrt(e)).epsilon(1e-14));
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("same seed, same sample") {
  GenConfig cfg;
  Rng a(5);
  Rng b(5);
  const Sample s1 = generate_sample(cfg, a);
  const Sample s2 = generate_sample(cfg, b);
  CHECK(s1.x == s2.x);
  CHECK(s1.target == s2.target);
  CHECK(s1.meta.offset == s2.meta.offset);
}

TEST_CASE("feature balance, unit energy and offsets over many samples") {
  GenConfig cfg;
  Rng rng(31);
  std::size_t ones = 0;
  for (int i = 0; i < 10000; ++i) {
    const Sample s = generate_sample(cfg, rng);
    ones += s.meta.feature_index;
    CHECK(std::abs(energy(s.x) - 1.0) <= 1e-12);
    CHECK(s.meta.offset + 3 <= cfg.length);
  }
  CHECK(std::abs(static_cast<double>(ones) / 1e4 - 0.5) <= 0.02);
}

TEST_CASE("every offset is reachable") {
  GenConfig cfg;
  Rng rng(32);
  std::vector<int> seen(cfg.length - 2, 0);
  for (int i = 0; i < 2000; ++i) ++seen[generate_sample(cfg, rng).meta.offset];
  for (int c : seen) CHECK(c > 0);
}

TEST_CASE("epochs replay and balance") {
  GenConfig cfg;
  Rng a(1);
  Rng b(1);
  const Dataset d1 = generate_epoch(cfg, 200, a);
  const Dataset d2 = generate_epoch(cfg, 200, b);
  REQUIRE(d1.size() == 200);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    CHECK(d1[i].x == d2[i].x);
    positives += d1[i].target[0] == 1.0;
  }
  CHECK(positives >= 80);
  CHECK(positives <= 120);
  Rng c(2);
  CHECK(generate_epoch(cfg, 1, c).size() == 1);
  CHECK_THROWS_AS(generate_epoch(cfg, 0, c), ConfigError);
}

TEST_CASE("config validation") {
  Rng rng(1);
  GenConfig cfg;
  cfg.length = 2;
  CHECK_THROWS_AS(generate_sample(cfg, rng), ConfigError);
  cfg = GenConfig{};
  cfg.bg_sigma = -1.0;
  CHECK_THROWS_AS(generate_sample(cfg, rng), ConfigError);
  cfg = GenConfig{};
  cfg.feature_noise_high = -0.1;
  CHECK_THROWS_AS(generate_sample(cfg, rng), ConfigError);
  CHECK_THROWS_AS(generate_sample_at(GenConfig{}, 0, 6, rng), ConfigError);
}

TEST_CASE("dataset CSV") {
  GenConfig cfg;
  cfg.bg_sigma = 0.0;
  cfg.feature_noise_high = 0.0;
  cfg.normalize = false;
  Rng rng(1);
  Dataset d{generate_sample_at(cfg, 1, 4, rng), generate_sample_at(cfg, 0, 0, rng)};
  std::ostringstream out;
  write_dataset_csv(out, d);
  CHECK(out.str() ==
        "sample_id,label,offset,x0,x1,x2,x3,x4,x5,x6,x7\n"
        "0,0,4,0,0,0,0,1,1,1,0\n"
        "1,1,0,-0.5,1,-0.5,0,0,0,0,0\n");
}

TEST_CASE("CSV values round-trip at 17 digits") {
  Rng rng(9);
  Dataset d = generate_epoch(GenConfig{}, 20, rng);
  std::ostringstream out;
  write_dataset_csv(out, d);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  for (const auto& s : d) {
    std::getline(in, line);
    std::stringstream row(line);
    std::string cell;
    for (int skip = 0; skip < 3; ++skip) std::getline(row, cell, ',');
    for (double v : s.x) {
      std::getline(row, cell, ',');
      CHECK(std::stod(cell) == v);
    }
  }
}

TEST_CASE("rng transforms") {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.index(7) < 7);
  }
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) == mix_seed(1, 0));
  Rng a(4);
  Rng b(4);
  for (int i = 0; i < 5; ++i) CHECK(a.normal() == b.normal());
}

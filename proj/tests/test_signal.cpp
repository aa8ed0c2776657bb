#include <cmath>

#include "doctest.h"
#include "mfcnn/errors.hpp"
#include "mfcnn/rng.hpp"
#include "mfcnn/signal.hpp"
#include "oracles.hpp"

using namespace mfcnn;

TEST_CASE("xcorr_valid on a hand example") {
  const Signal y = xcorr_valid({1, 2, 3, 4}, {1, 0, -1});
  CHECK(y == Signal{-2, -2});
}

TEST_CASE("xcorr_valid matches the double-loop oracle") {
  Rng rng(11);
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = 1 + rng.index(40);
    const std::size_t m = 1 + rng.index(n);
    const auto x = oracle::random_vec(rng, n);
    const auto w = oracle::random_vec(rng, m);
    CHECK(oracle::max_abs_diff(oracle::xcorr(x, w), xcorr_valid(Signal(x), Signal(w))) <= 1e-12);
  }
}

TEST_CASE("conv_full matches the double-loop oracle") {
  Rng rng(12);
  for (int c = 0; c < 1000; ++c) {
    const auto a = oracle::random_vec(rng, 1 + rng.index(30));
    const auto b = oracle::random_vec(rng, 1 + rng.index(30));
    const Signal y = conv_full(Signal(a), Signal(b));
    REQUIRE(y.size() == a.size() + b.size() - 1);
    CHECK(oracle::max_abs_diff(oracle::conv_full(a, b), y) <= 1e-12);
  }
}

TEST_CASE("xcorr_same keeps the length and pads symmetrically") {
  const Signal x{1, 2, 3, 4, 5};
  const Signal w{1, 1, 1};
  const Signal y = xcorr_same(x, w);
  CHECK(y == Signal{3, 6, 9, 12, 9});
  CHECK_THROWS_AS(xcorr_same(x, Signal{1, 1}), LengthError);
}

TEST_CASE("length errors") {
  CHECK_THROWS_AS(xcorr_valid({1, 2}, {1, 2, 3}), LengthError);
  CHECK_THROWS_AS(xcorr_valid({1, 2}, Signal{}), LengthError);
  CHECK_THROWS_AS(padded_length(5, 4, Padding::Same), LengthError);
  CHECK(padded_length(8, 3, Padding::Valid) == 6);
  CHECK(padded_length(8, 3, Padding::Same) == 8);
}

TEST_CASE("correlation equals convolution with the reversed kernel") {
  Rng rng(13);
  for (int c = 0; c < 200; ++c) {
    const std::size_t n = 3 + rng.index(20);
    const std::size_t m = 1 + rng.index(3);
    const Signal x(oracle::random_vec(rng, n));
    const Signal w(oracle::random_vec(rng, m));
    const Signal full = conv_full(x, reverse(w));
    const Signal y = xcorr_valid(x, w);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(full[i + m - 1] - y[i]) <= 1e-12);
  }
}

TEST_CASE("linearity and reverse involution") {
  Rng rng(14);
  for (int c = 0; c < 200; ++c) {
    const std::size_t n = 4 + rng.index(20);
    const std::size_t m = 1 + rng.index(4);
    const Signal a(oracle::random_vec(rng, n));
    const Signal b(oracle::random_vec(rng, n));
    const Signal w(oracle::random_vec(rng, m));
    const double alpha = rng.uniform(-2, 2);
    Signal mix = a;
    for (std::size_t i = 0; i < n; ++i) mix[i] = alpha * a[i] + b[i];
    const Signal ya = xcorr_valid(a, w);
    const Signal yb = xcorr_valid(b, w);
    const Signal ym = xcorr_valid(mix, w);
    for (std::size_t i = 0; i < ym.size(); ++i)
      CHECK(std::abs(ym[i] - (alpha * ya[i] + yb[i])) <= 1e-12);
    CHECK(reverse(reverse(w)) == w);
  }
}

TEST_CASE("energy and unit normalization") {
  CHECK(energy({-0.5, 1.0, -0.5}) == doctest::Approx(1.5));
  const Signal u = unit_normalize({3, 4});
  CHECK(u[0] == doctest::Approx(0.6));
  CHECK(u[1] == doctest::Approx(0.8));
  CHECK(energy(u) == doctest::Approx(1.0));
  CHECK_THROWS_AS(unit_normalize({0, 0, 0}), ZeroEnergyError);
}

TEST_CASE("multi-channel signals require equal lengths") {
  CHECK_THROWS_AS(MultiChannelSignal({Signal{1, 2}, Signal{1}}), ShapeError);
  CHECK_THROWS_AS(MultiChannelSignal(std::vector<Signal>{}), ShapeError);
  const auto z = MultiChannelSignal::zeros(3, 4);
  CHECK(z.channel_count() == 3);
  CHECK(z.length() == 4);
}

TEST_CASE("every output is finite") {
  Rng rng(15);
  for (int c = 0; c < 100; ++c) {
    const Signal x(oracle::random_vec(rng, 16, -1e3, 1e3));
    const Signal w(oracle::random_vec(rng, 3, -1e3, 1e3));
    for (double v : xcorr_valid(x, w)) CHECK(std::isfinite(v));
    for (double v : conv_full(x, w)) CHECK(std::isfinite(v));
    for (double v : unit_normalize(x)) CHECK(std::isfinite(v));
  }
}

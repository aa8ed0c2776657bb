#include "mfcnn/signal.hpp"

#include <cmath>
#include <string>

#include "mfcnn/errors.hpp"

namespace mfcnn {

MultiChannelSignal::MultiChannelSignal(std::vector<Signal> channels)
    : channels_(std::move(channels)) {
  if (channels_.empty()) throw ShapeError("multi-channel signal needs at least one channel");
  const std::size_t len = channels_.front().size();
  for (std::size_t k = 1; k < channels_.size(); ++k) {
    if (channels_[k].size() != len) {
      throw ShapeError("channel " + std::to_string(k) + " has length " +
                       std::to_string(channels_[k].size()) + ", expected " +
                       std::to_string(len));
    }
  }
}

MultiChannelSignal MultiChannelSignal::zeros(std::size_t channels, std::size_t length) {
  return MultiChannelSignal(std::vector<Signal>(channels, Signal::zeros(length)));
}

MultiChannelSignal MultiChannelSignal::single(Signal s) {
  std::vector<Signal> v;
  v.push_back(std::move(s));
  return MultiChannelSignal(std::move(v));
}

std::size_t padded_length(std::size_t n, std::size_t m, Padding padding) {
  if (m == 0) throw LengthError("kernel must not be empty");
  if (padding == Padding::Same) {
    if (m % 2 == 0) throw LengthError("same padding needs an odd kernel length");
    if (m > n) throw LengthError("kernel longer than signal");
    return n;
  }
  if (m > n) throw LengthError("kernel longer than signal");
  return n - m + 1;
}

Signal xcorr_valid(const Signal& x, const Signal& w) {
  const std::size_t n = x.size();
  const std::size_t m = w.size();
  if (m == 0) throw LengthError("kernel must not be empty");
  if (m > n) {
    throw LengthError("kernel length " + std::to_string(m) + " exceeds signal length " +
                      std::to_string(n));
  }
  Signal y = Signal::zeros(n - m + 1);
  for (std::size_t i = 0; i < y.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += w[j] * x[i + j];
    y[i] = acc;
  }
  return y;
}

Signal zero_pad(const Signal& x, std::size_t before, std::size_t after) {
  std::vector<double> v(before + x.size() + after, 0.0);
  std::copy(x.begin(), x.end(), v.begin() + static_cast<std::ptrdiff_t>(before));
  return Signal(std::move(v));
}

Signal xcorr_same(const Signal& x, const Signal& w) {
  const std::size_t m = w.size();
  if (m == 0 || m % 2 == 0) throw LengthError("same padding needs an odd kernel length");
  if (m > x.size()) throw LengthError("kernel longer than signal");
  const std::size_t half = (m - 1) / 2;
  return xcorr_valid(zero_pad(x, half, half), w);
}

Signal conv_full(const Signal& a, const Signal& b) {
  if (a.empty() || b.empty()) throw LengthError("convolution of an empty signal");
  Signal y = Signal::zeros(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) y[i + j] += a[i] * b[j];
  }
  return y;
}

Signal reverse(const Signal& w) {
  return Signal(std::vector<double>(w.vector().rbegin(), w.vector().rend()));
}

double energy(const Signal& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

Signal unit_normalize(const Signal& x) {
  const double e = energy(x);
  if (!(e > 0.0)) throw ZeroEnergyError("cannot normalize a zero-energy signal");
  const double scale = 1.0 / std::sqrt(e);
  Signal y = x;
  for (double& v : y) v *= scale;
  return y;
}

}  // namespace mfcnn

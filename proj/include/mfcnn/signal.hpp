#ifndef MFCNN_SIGNAL_HPP
#define MFCNN_SIGNAL_HPP

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mfcnn {

/// A finite sequence of real samples, x(0) .. x(N-1).
class Signal {
 public:
  Signal() = default;
  explicit Signal(std::vector<double> samples) : samples_(std::move(samples)) {}
  Signal(std::initializer_list<double> samples) : samples_(samples) {}

  static Signal zeros(std::size_t n) { return Signal(std::vector<double>(n, 0.0)); }

  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  double operator[](std::size_t i) const { return samples_[i]; }
  double& operator[](std::size_t i) { return samples_[i]; }

  std::span<const double> samples() const noexcept { return samples_; }
  std::span<double> samples() noexcept { return samples_; }
  const std::vector<double>& vector() const noexcept { return samples_; }

  auto begin() const noexcept { return samples_.begin(); }
  auto end() const noexcept { return samples_.end(); }
  auto begin() noexcept { return samples_.begin(); }
  auto end() noexcept { return samples_.end(); }

  bool operator==(const Signal&) const = default;

 private:
  std::vector<double> samples_;
};

/// K >= 1 channels of one common length.
class MultiChannelSignal {
 public:
  MultiChannelSignal() = default;
  // Throws ShapeError on an empty channel list or unequal lengths.
  explicit MultiChannelSignal(std::vector<Signal> channels);

  static MultiChannelSignal zeros(std::size_t channels, std::size_t length);
  static MultiChannelSignal single(Signal s);

  std::size_t channel_count() const noexcept { return channels_.size(); }
  std::size_t length() const noexcept {
    return channels_.empty() ? 0 : channels_.front().size();
  }

  const Signal& operator[](std::size_t k) const { return channels_[k]; }
  Signal& operator[](std::size_t k) { return channels_[k]; }
  const std::vector<Signal>& channels() const noexcept { return channels_; }

  bool operator==(const MultiChannelSignal&) const = default;

 private:
  std::vector<Signal> channels_;
};

enum class Padding { Valid, Same };

// Correlation output length for a signal of length n and kernel of length m.
std::size_t padded_length(std::size_t n, std::size_t m, Padding padding);

/// y(n) = sum_m w(m) x(n+m), n = 0 .. N-M. Summation runs in ascending m.
Signal xcorr_valid(const Signal& x, const Signal& w);

/// Cross-correlation of x zero-padded with (M-1)/2 samples on each side.
/// Odd M only.
Signal xcorr_same(const Signal& x, const Signal& w);

/// Linear (non-reversed) convolution, length len(a)+len(b)-1.
Signal conv_full(const Signal& a, const Signal& b);

Signal reverse(const Signal& w);
Signal zero_pad(const Signal& x, std::size_t before, std::size_t after);

double energy(const Signal& x);
Signal unit_normalize(const Signal& x);

}  // namespace mfcnn

#endif  // MFCNN_SIGNAL_HPP

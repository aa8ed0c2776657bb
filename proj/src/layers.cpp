#include "mfcnn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfcnn/errors.hpp"

namespace mfcnn {

std::vector<int> IndicatorMask::row(std::size_t r) const {
  std::vector<int> out(cols_);
  for (std::size_t c = 0; c < cols_; ++c) out[c] = at(r, c) ? 1 : 0;
  return out;
}

std::size_t IndicatorMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

ConvLayer::ConvLayer(std::size_t out_channels, std::size_t in_channels, std::size_t taps,
                     std::size_t stride, Padding padding)
    : out_channels_(out_channels),
      in_channels_(in_channels),
      taps_(taps),
      stride_(stride),
      padding_(padding),
      weights_(out_channels * in_channels * taps, 0.0),
      bias_(out_channels, 0.0) {
  if (out_channels == 0 || in_channels == 0) throw ShapeError("conv layer needs channels");
  if (taps == 0) throw LengthError("conv kernel must have at least one tap");
  if (stride == 0) throw DomainError("stride must be at least 1");
  if (padding == Padding::Same && taps % 2 == 0) {
    throw LengthError("same padding needs an odd kernel length");
  }
}

Signal ConvLayer::kernel(std::size_t k, std::size_t p) const {
  const auto first = weights_.begin() + static_cast<std::ptrdiff_t>((k * in_channels_ + p) * taps_);
  return Signal(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(taps_)));
}

void ConvLayer::set_kernel(std::size_t k, std::size_t p, const Signal& w) {
  if (w.size() != taps_) throw ShapeError("kernel length mismatch");
  for (std::size_t m = 0; m < taps_; ++m) weight(k, p, m) = w[m];
}

std::size_t ConvLayer::output_length(std::size_t n) const {
  const std::size_t full = padded_length(n, taps_, padding_);
  return (full - 1) / stride_ + 1;
}

DenseLayer::DenseLayer(std::size_t outputs, std::size_t inputs, bool has_bias)
    : outputs_(outputs),
      inputs_(inputs),
      has_bias_(has_bias),
      weights_(outputs * inputs, 0.0),
      bias_(has_bias ? outputs : 0, 0.0) {
  if (outputs == 0 || inputs == 0) throw ShapeError("dense layer needs inputs and outputs");
}

ConvOutput conv_forward(const MultiChannelSignal& x, const ConvLayer& layer) {
  if (x.channel_count() != layer.in_channels()) {
    throw ShapeError("conv layer expects " + std::to_string(layer.in_channels()) +
                     " input channels, got " + std::to_string(x.channel_count()));
  }
  const std::size_t m = layer.taps();
  const std::size_t full = padded_length(x.length(), m, layer.padding());
  const std::size_t half = layer.padding() == Padding::Same ? (m - 1) / 2 : 0;

  std::vector<Signal> padded;
  padded.reserve(x.channel_count());
  for (const auto& ch : x.channels()) padded.push_back(zero_pad(ch, half, half));

  std::vector<Signal> y_full;
  y_full.reserve(layer.out_channels());
  for (std::size_t k = 0; k < layer.out_channels(); ++k) {
    Signal acc = Signal::zeros(full);
    for (std::size_t p = 0; p < layer.in_channels(); ++p) {
      const Signal part = xcorr_valid(padded[p], layer.kernel(k, p));
      for (std::size_t n = 0; n < full; ++n) acc[n] += part[n];
    }
    for (double& v : acc) v += layer.bias()[k];
    y_full.push_back(std::move(acc));
  }

  auto strided = stride_decimate(MultiChannelSignal(std::move(y_full)), layer.stride());
  ConvOutput out;
  out.y = std::move(strided.out);
  out.record.input = x;
  out.record.full_length = full;
  out.record.stride_mask = std::move(strided.mask);
  return out;
}

Signal relu_forward(const Signal& y, double leaky_slope, std::vector<int>* mask) {
  Signal o = y;
  if (mask) mask->assign(y.size(), 0);
  for (std::size_t n = 0; n < y.size(); ++n) {
    if (y[n] > 0.0) {
      if (mask) (*mask)[n] = 1;
    } else {
      o[n] = leaky_slope == 0.0 ? 0.0 : leaky_slope * y[n];
    }
  }
  return o;
}

ActivationOutput relu_forward(const MultiChannelSignal& y, double leaky_slope) {
  if (leaky_slope < 0.0) throw DomainError("leaky slope must be non-negative");
  IndicatorMask mask(y.channel_count(), y.length());
  std::vector<Signal> out;
  out.reserve(y.channel_count());
  std::vector<int> bits;
  for (std::size_t k = 0; k < y.channel_count(); ++k) {
    out.push_back(relu_forward(y[k], leaky_slope, &bits));
    for (std::size_t n = 0; n < bits.size(); ++n) mask.set(k, n, bits[n] != 0);
  }
  return {MultiChannelSignal(std::move(out)), std::move(mask)};
}

StrideOutput stride_decimate(const MultiChannelSignal& o, std::size_t stride) {
  if (stride == 0) throw DomainError("stride must be at least 1");
  const std::size_t len = o.length();
  const std::size_t kept = len == 0 ? 0 : (len - 1) / stride + 1;
  IndicatorMask mask(o.channel_count(), len);
  std::vector<Signal> out;
  out.reserve(o.channel_count());
  for (std::size_t k = 0; k < o.channel_count(); ++k) {
    Signal s = Signal::zeros(kept);
    for (std::size_t i = 0; i < kept; ++i) {
      s[i] = o[k][i * stride];
      mask.set(k, i * stride, true);
    }
    out.push_back(std::move(s));
  }
  return {MultiChannelSignal(std::move(out)), std::move(mask)};
}

std::size_t pooled_length(std::size_t length, std::size_t pool) {
  if (pool == 0) throw DomainError("pool size must be at least 1");
  return (length + pool - 1) / pool;
}

PoolOutput maxpool_forward(const MultiChannelSignal& o, std::size_t pool) {
  const std::size_t len = o.length();
  const std::size_t segments = pooled_length(len, pool);
  PoolOutput out;
  out.mask = IndicatorMask(o.channel_count(), len);
  out.argmax.resize(o.channel_count());
  std::vector<Signal> pooled;
  pooled.reserve(o.channel_count());
  for (std::size_t k = 0; k < o.channel_count(); ++k) {
    Signal s = Signal::zeros(segments);
    auto& idx = out.argmax[k];
    idx.resize(segments);
    for (std::size_t i = 0; i < segments; ++i) {
      const std::size_t start = i * pool;
      const std::size_t stop = std::min(start + pool, len);
      std::size_t best = start;
      for (std::size_t n = start + 1; n < stop; ++n) {
        if (o[k][n] > o[k][best]) best = n;
      }
      s[i] = o[k][best];
      idx[i] = best;
      out.mask.set(k, best, true);
    }
    pooled.push_back(std::move(s));
  }
  out.pooled = MultiChannelSignal(std::move(pooled));
  return out;
}

Signal flatten(const MultiChannelSignal& o) {
  std::vector<double> flat;
  flat.reserve(o.channel_count() * o.length());
  for (const auto& ch : o.channels()) flat.insert(flat.end(), ch.begin(), ch.end());
  return Signal(std::move(flat));
}

MultiChannelSignal unflatten(const Signal& flat, std::size_t channels, std::size_t length) {
  if (channels * length != flat.size()) {
    throw ShapeError("cannot unflatten " + std::to_string(flat.size()) + " samples into " +
                     std::to_string(channels) + "x" + std::to_string(length));
  }
  std::vector<Signal> out;
  out.reserve(channels);
  for (std::size_t k = 0; k < channels; ++k) {
    const auto first = flat.vector().begin() + static_cast<std::ptrdiff_t>(k * length);
    out.emplace_back(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(length)));
  }
  return MultiChannelSignal(std::move(out));
}

Signal dense_forward(const Signal& x, const DenseLayer& layer) {
  if (x.size() != layer.inputs()) {
    throw ShapeError("dense layer expects " + std::to_string(layer.inputs()) +
                     " inputs, got " + std::to_string(x.size()));
  }
  Signal y = Signal::zeros(layer.outputs());
  for (std::size_t k = 0; k < layer.outputs(); ++k) {
    double acc = 0.0;
    for (std::size_t n = 0; n < layer.inputs(); ++n) acc += layer.weight(k, n) * x[n];
    if (layer.has_bias()) acc += layer.bias()[k];
    y[k] = acc;
  }
  return y;
}

Signal softmax(const Signal& y) {
  if (y.empty()) throw LengthError("softmax of an empty vector");
  const double peak = *std::max_element(y.begin(), y.end());
  Signal p = Signal::zeros(y.size());
  double total = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    p[k] = std::exp(y[k] - peak);
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

IndicatorMask dropout_mask(std::size_t rows, std::size_t cols, double keep_prob, Rng& rng) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) {
    throw DomainError("keep probability must lie in (0, 1]");
  }
  IndicatorMask mask(rows, cols, true);
  if (keep_prob == 1.0) return mask;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) mask.set(r, c, rng.bernoulli(keep_prob));
  }
  return mask;
}

Signal apply_dropout(const Signal& o, const IndicatorMask& mask, double keep_prob) {
  if (mask.rows() != 1 || mask.cols() != o.size()) throw ShapeError("dropout mask shape");
  Signal out = o;
  for (std::size_t n = 0; n < o.size(); ++n) {
    out[n] = mask.at(0, n) ? o[n] / keep_prob : 0.0;
  }
  return out;
}

MultiChannelSignal apply_dropout(const MultiChannelSignal& o, const IndicatorMask& mask,
                                 double keep_prob) {
  if (mask.rows() != o.channel_count() || mask.cols() != o.length()) {
    throw ShapeError("dropout mask shape");
  }
  std::vector<Signal> out;
  out.reserve(o.channel_count());
  for (std::size_t k = 0; k < o.channel_count(); ++k) {
    Signal s = o[k];
    for (std::size_t n = 0; n < s.size(); ++n) s[n] = mask.at(k, n) ? s[n] / keep_prob : 0.0;
    out.push_back(std::move(s));
  }
  return MultiChannelSignal(std::move(out));
}

}  // namespace mfcnn

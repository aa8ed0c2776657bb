#include "mfcnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "mfcnn/errors.hpp"

namespace mfcnn {

GradientSet GradientSet::zeros_like(const Network& net) {
  GradientSet g;
  for (const auto& b : net.conv_blocks()) {
    g.conv.push_back({std::vector<double>(b.conv.weights().size(), 0.0),
                      std::vector<double>(b.conv.bias().size(), 0.0)});
  }
  for (const auto& b : net.dense_blocks()) {
    g.dense.push_back({std::vector<double>(b.dense.weights().size(), 0.0),
                       std::vector<double>(b.dense.bias().size(), 0.0)});
  }
  return g;
}

std::vector<double> GradientSet::flat() const {
  std::vector<double> out;
  for (const auto& c : conv) {
    out.insert(out.end(), c.weights.begin(), c.weights.end());
    out.insert(out.end(), c.bias.begin(), c.bias.end());
  }
  for (const auto& d : dense) {
    out.insert(out.end(), d.weights.begin(), d.weights.end());
    out.insert(out.end(), d.bias.begin(), d.bias.end());
  }
  return out;
}

void TrainConfig::validate() const {
  if (!(lr_weights >= 0.0) || !std::isfinite(lr_weights)) {
    throw ConfigError("train.lr_weights must be a finite non-negative number");
  }
  if (!(lr_bias >= 0.0) || !std::isfinite(lr_bias)) {
    throw ConfigError("train.lr_bias must be a finite non-negative number");
  }
  if (epochs < 1) throw ConfigError("train.epochs must be at least 1");
  if (realizations_per_epoch < 1) throw ConfigError("train.realizations_per_epoch must be at least 1");
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) throw ConfigError("train.keep_prob must lie in (0, 1]");
}

namespace {

void check_tape(const Network& net, const ForwardTape& tape) {
  if (tape.conv.size() != net.conv_blocks().size() ||
      tape.dense.size() != net.dense_blocks().size()) {
    throw TapeMismatchError("tape layer count does not match the network");
  }
  for (std::size_t i = 0; i < tape.conv.size(); ++i) {
    const auto& c = net.conv_blocks()[i].conv;
    const auto& e = tape.conv[i];
    if (e.conv.input.channel_count() != c.in_channels() ||
        e.y.channel_count() != c.out_channels() ||
        e.conv.full_length != padded_length(e.conv.input.length(), c.taps(), c.padding()) ||
        e.relu_mask.rows() != e.y.channel_count() || e.relu_mask.cols() != e.y.length() ||
        e.pool.argmax.size() != e.y.channel_count()) {
      throw TapeMismatchError("tape entry conv[" + std::to_string(i) + "] has the wrong shape");
    }
  }
  for (std::size_t i = 0; i < tape.dense.size(); ++i) {
    const auto& d = net.dense_blocks()[i];
    const auto& e = tape.dense[i];
    if (e.input.size() != d.dense.inputs() || e.y.size() != d.dense.outputs() ||
        (d.relu && e.relu_mask.size() != e.y.size())) {
      throw TapeMismatchError("tape entry dense[" + std::to_string(i) + "] has the wrong shape");
    }
  }
  if (tape.output.size() != net.output_length()) {
    throw TapeMismatchError("tape output length does not match the network");
  }
}

double relu_grad(bool active, double slope, double d) {
  if (active) return d;
  return slope == 0.0 ? 0.0 : slope * d;
}

// Called once a layer's gradient is complete and before its weights are used
// to propagate the delta further back.
using LayerHook = std::function<void(bool is_conv, std::size_t index, const GradientSet&)>;

GradientSet backprop(const Network& net, const ForwardTape& tape, const Signal& target,
                     BackwardTrace* trace, const LayerHook& hook) {
  check_tape(net, tape);
  GradientSet grads = GradientSet::zeros_like(net);
  if (trace) {
    trace->conv.assign(net.conv_blocks().size(), {});
    trace->dense.assign(net.dense_blocks().size(), {});
  }

  // Dense stack, output layer first.
  Signal delta = output_delta(net.loss(), tape.output, target);
  const auto& dense = net.dense_blocks();
  Signal upstream;  // dL/d(input of the current dense block)
  for (std::size_t i = dense.size(); i-- > 0;) {
    const auto& block = dense[i];
    const auto& e = tape.dense[i];
    const bool is_output = i + 1 == dense.size();
    if (!is_output) {
      // `delta` holds dL/d(block output); undo dropout, then the activation.
      Signal d = delta;
      if (e.dropout) {
        for (std::size_t k = 0; k < d.size(); ++k) {
          d[k] = e.dropout->at(0, k) ? d[k] / e.keep_prob : 0.0;
        }
      }
      if (block.relu) {
        for (std::size_t k = 0; k < d.size(); ++k) {
          d[k] = relu_grad(e.relu_mask[k] != 0, block.leaky_slope, d[k]);
        }
      }
      delta = std::move(d);
    }
    if (trace) trace->dense[i] = delta;

    auto& g = grads.dense[i];
    const std::size_t inputs = block.dense.inputs();
    for (std::size_t k = 0; k < block.dense.outputs(); ++k) {
      for (std::size_t n = 0; n < inputs; ++n) g.weights[k * inputs + n] = delta[k] * e.input[n];
    }
    if (block.dense.has_bias()) {
      for (std::size_t k = 0; k < block.dense.outputs(); ++k) g.bias[k] = delta[k];
    }
    if (hook) hook(false, i, grads);

    upstream = Signal::zeros(inputs);
    for (std::size_t n = 0; n < inputs; ++n) {
      double acc = 0.0;
      for (std::size_t k = 0; k < block.dense.outputs(); ++k) acc += delta[k] * block.dense.weight(k, n);
      upstream[n] = acc;
    }
    delta = upstream;
  }

  if (net.conv_blocks().empty()) return grads;

  MultiChannelSignal incoming = unflatten(delta, tape.flat_channels, tape.flat_length);
  const auto& conv = net.conv_blocks();
  for (std::size_t i = conv.size(); i-- > 0;) {
    const auto& block = conv[i];
    const auto& layer = block.conv;
    const auto& e = tape.conv[i];
    const std::size_t channels = layer.out_channels();
    const std::size_t y_len = e.y.length();

    // Reposition pooled deltas at the recorded argmax, gated by the ReLU.
    std::vector<Signal> repositioned(channels, Signal::zeros(y_len));
    for (std::size_t k = 0; k < channels; ++k) {
      const auto& argmax = e.pool.argmax[k];
      for (std::size_t s = 0; s < argmax.size(); ++s) {
        double d = incoming[k][s];
        if (e.dropout) d = e.dropout->at(k, s) ? d / e.keep_prob : 0.0;
        const std::size_t n = argmax[s];
        repositioned[k][n] = relu_grad(e.relu_mask.at(k, n), block.leaky_slope, d);
      }
    }
    MultiChannelSignal delta_y(std::move(repositioned));
    if (trace) trace->conv[i] = {incoming, delta_y};

    // Undo the stride: deltas sit at kept positions of the full correlation.
    const std::size_t stride = layer.stride();
    std::vector<Signal> full(channels, Signal::zeros(e.conv.full_length));
    for (std::size_t k = 0; k < channels; ++k) {
      for (std::size_t n = 0; n < y_len; ++n) full[k][n * stride] = delta_y[k][n];
    }

    const std::size_t m = layer.taps();
    const std::size_t half = layer.padding() == Padding::Same ? (m - 1) / 2 : 0;
    std::vector<Signal> padded_input;
    padded_input.reserve(layer.in_channels());
    for (const auto& ch : e.conv.input.channels()) padded_input.push_back(zero_pad(ch, half, half));

    auto& g = grads.conv[i];
    for (std::size_t k = 0; k < channels; ++k) {
      for (std::size_t p = 0; p < layer.in_channels(); ++p) {
        const Signal gk = xcorr_valid(padded_input[p], full[k]);
        for (std::size_t t = 0; t < m; ++t) g.weights[(k * layer.in_channels() + p) * m + t] = gk[t];
      }
      double acc = 0.0;
      for (std::size_t n = 0; n < y_len; ++n) acc += delta_y[k][n];
      g.bias[k] = acc;
    }
    if (hook) hook(true, i, grads);

    if (i == 0) break;
    const std::size_t in_len = e.conv.input.length();
    std::vector<Signal> prev(layer.in_channels(), Signal::zeros(in_len));
    for (std::size_t p = 0; p < layer.in_channels(); ++p) {
      Signal acc = Signal::zeros(in_len + 2 * half);
      for (std::size_t k = 0; k < channels; ++k) {
        const Signal part = conv_full(full[k], layer.kernel(k, p));
        for (std::size_t n = 0; n < acc.size(); ++n) acc[n] += part[n];
      }
      for (std::size_t n = 0; n < in_len; ++n) prev[p][n] = acc[n + half];
    }
    incoming = MultiChannelSignal(std::move(prev));
  }
  return grads;
}

void apply_conv_update(ConvLayer& layer, const ConvGradient& g, const TrainConfig& cfg) {
  auto& w = layer.weights();
  for (std::size_t j = 0; j < w.size(); ++j) w[j] -= cfg.lr_weights * g.weights[j];
  auto& b = layer.bias();
  for (std::size_t j = 0; j < b.size(); ++j) b[j] -= cfg.lr_bias * g.bias[j];
}

void apply_dense_update(DenseLayer& layer, const DenseGradient& g, const TrainConfig& cfg) {
  auto& w = layer.weights();
  for (std::size_t j = 0; j < w.size(); ++j) w[j] -= cfg.lr_weights * g.weights[j];
  auto& b = layer.bias();
  for (std::size_t j = 0; j < b.size(); ++j) b[j] -= cfg.lr_bias * g.bias[j];
}

}  // namespace

GradientSet backward(const Network& net, const ForwardTape& tape, const Signal& target,
                     BackwardTrace* trace) {
  return backprop(net, tape, target, trace, {});
}

void sgd_step(Network& net, const GradientSet& grads, const TrainConfig& cfg) {
  if (grads.conv.size() != net.conv_blocks().size() ||
      grads.dense.size() != net.dense_blocks().size()) {
    throw ShapeError("gradient set does not match the network");
  }
  for (std::size_t i = 0; i < grads.conv.size(); ++i) {
    const auto& layer = net.conv_blocks()[i].conv;
    if (grads.conv[i].weights.size() != layer.weights().size() ||
        grads.conv[i].bias.size() != layer.bias().size()) {
      throw ShapeError("gradient for conv[" + std::to_string(i) + "] has the wrong shape");
    }
  }
  for (std::size_t i = 0; i < grads.dense.size(); ++i) {
    const auto& layer = net.dense_blocks()[i].dense;
    if (grads.dense[i].weights.size() != layer.weights().size() ||
        grads.dense[i].bias.size() != layer.bias().size()) {
      throw ShapeError("gradient for dense[" + std::to_string(i) + "] has the wrong shape");
    }
  }
  for (std::size_t i = 0; i < grads.conv.size(); ++i) {
    apply_conv_update(net.conv_blocks()[i].conv, grads.conv[i], cfg);
  }
  for (std::size_t i = 0; i < grads.dense.size(); ++i) {
    apply_dense_update(net.dense_blocks()[i].dense, grads.dense[i], cfg);
  }
}

StepResult train_step(Network& net, const Signal& x, const Signal& target,
                      const TrainConfig& cfg, const DropoutContext* dropout) {
  StepResult r;
  auto fwd = forward(net, x, dropout);
  r.output = fwd.output;
  r.loss = loss_value(net.loss(), fwd.output, target, &r.clamped);
  if (cfg.schedule == StepSchedule::Standard) {
    r.grads = backward(net, fwd.tape, target, &r.trace);
    sgd_step(net, r.grads, cfg);
  } else {
    LayerHook hook = [&](bool is_conv, std::size_t i, const GradientSet& g) {
      if (is_conv) {
        apply_conv_update(net.conv_blocks()[i].conv, g.conv[i], cfg);
      } else {
        apply_dense_update(net.dense_blocks()[i].dense, g.dense[i], cfg);
      }
    };
    r.grads = backprop(net, fwd.tape, target, &r.trace, hook);
  }
  return r;
}

std::vector<double> TrainingLog::epoch_mean_loss() const {
  std::vector<double> sums;
  std::vector<std::size_t> counts;
  for (const auto& it : iterations) {
    if (it.epoch >= sums.size()) {
      sums.resize(it.epoch + 1, 0.0);
      counts.resize(it.epoch + 1, 0);
    }
    sums[it.epoch] += it.loss;
    ++counts[it.epoch];
  }
  for (std::size_t e = 0; e < sums.size(); ++e) {
    if (counts[e]) sums[e] /= static_cast<double>(counts[e]);
  }
  return sums;
}

TrainingLog train(Network& net, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw ConfigError("training set is empty");
  Rng dropout_rng(mix_seed(cfg.seed, 3));
  DropoutContext dropout{cfg.keep_prob, &dropout_rng};

  TrainingLog log;
  log.iterations.reserve(cfg.epochs * data.size());
  std::size_t iteration = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& sample : data) {
      StepResult r = train_step(net, sample.x, sample.target, cfg, &dropout);
      if (r.clamped) ++log.clamped_losses;
      IterationRecord rec;
      rec.iteration = iteration++;
      rec.epoch = epoch;
      rec.loss = r.loss;
      rec.output = std::move(r.output);
      rec.target_index = static_cast<std::size_t>(
          std::max_element(sample.target.begin(), sample.target.end()) - sample.target.begin());
      log.iterations.push_back(std::move(rec));
      log.dense_weight_trace.push_back(net.dense_blocks().front().dense.weights());
    }
  }
  return log;
}

namespace {

// ReLU indicators and pool selections of one pass; a change between passes
// means the loss is not smooth across the perturbation.
std::vector<std::size_t> activation_pattern(const ForwardTape& tape) {
  std::vector<std::size_t> pattern;
  for (const auto& e : tape.conv) {
    for (std::size_t k = 0; k < e.relu_mask.rows(); ++k)
      for (std::size_t n = 0; n < e.relu_mask.cols(); ++n) pattern.push_back(e.relu_mask.at(k, n));
    for (const auto& ch : e.pool.argmax) pattern.insert(pattern.end(), ch.begin(), ch.end());
  }
  for (const auto& e : tape.dense) {
    for (int b : e.relu_mask) pattern.push_back(static_cast<std::size_t>(b));
  }
  return pattern;
}

// Loss evaluated in extended precision with parameters taken from `theta`
// (parameter_pointers order). Mirrors forward() without dropout.
long double extended_loss(const Network& net, const std::vector<long double>& theta, const Signal& x,
                          const Signal& target) {
  using Channels = std::vector<std::vector<long double>>;
  std::size_t base = 0;
  Channels cur{std::vector<long double>(x.begin(), x.end())};
  auto relu = [](long double v, double slope) { return v > 0.0L ? v : slope * v; };

  for (const auto& block : net.conv_blocks()) {
    const ConvLayer& layer = block.conv;
    const std::size_t bias_base = base + layer.weights().size();
    const std::size_t m = layer.taps();
    const std::size_t half = layer.padding() == Padding::Same ? (m - 1) / 2 : 0;
    const std::size_t len = cur[0].size();
    const std::size_t full = padded_length(len, m, layer.padding());
    Channels out;
    for (std::size_t k = 0; k < layer.out_channels(); ++k) {
      std::vector<long double> y;
      for (std::size_t n = 0; n < full; n += layer.stride()) {
        long double acc = theta[bias_base + k];
        for (std::size_t p = 0; p < layer.in_channels(); ++p) {
          for (std::size_t j = 0; j < m; ++j) {
            const std::size_t pos = n + j;
            if (pos < half || pos - half >= len) continue;
            acc += theta[base + (k * layer.in_channels() + p) * m + j] * cur[p][pos - half];
          }
        }
        y.push_back(relu(acc, block.leaky_slope));
      }
      std::vector<long double> pooled;
      for (std::size_t i = 0; i < y.size(); i += block.pool) {
        long double best = y[i];
        for (std::size_t n = i + 1; n < std::min(i + block.pool, y.size()); ++n)
          best = std::max(best, y[n]);
        pooled.push_back(best);
      }
      out.push_back(std::move(pooled));
    }
    base = bias_base + layer.bias().size();
    cur = std::move(out);
  }

  std::vector<long double> vec;
  for (const auto& ch : cur) vec.insert(vec.end(), ch.begin(), ch.end());
  const auto& dense = net.dense_blocks();
  for (const auto& block : dense) {
    const DenseLayer& layer = block.dense;
    const std::size_t n_in = layer.inputs();
    const std::size_t bias_base = base + layer.weights().size();
    std::vector<long double> y(layer.outputs());
    for (std::size_t k = 0; k < y.size(); ++k) {
      long double acc = layer.has_bias() ? theta[bias_base + k] : 0.0L;
      for (std::size_t n = 0; n < n_in; ++n) acc += theta[base + k * n_in + n] * vec[n];
      y[k] = block.relu ? relu(acc, block.leaky_slope) : acc;
    }
    base = bias_base + layer.bias().size();
    vec = std::move(y);
  }

  long double loss = 0.0L;
  if (net.loss() == LossKind::MeanSquaredError) {
    for (std::size_t k = 0; k < vec.size(); ++k) {
      const long double d = vec[k] - target[k];
      loss += d * d;
    }
    return 0.5L * loss;
  }
  const long double top = *std::max_element(vec.begin(), vec.end());
  long double sum = 0.0L;
  for (long double v : vec) sum += std::exp(v - top);
  const long double log_z = top + std::log(sum);
  for (std::size_t k = 0; k < vec.size(); ++k) {
    if (target[k] == 0.0) continue;
    const long double log_p = std::max(vec[k] - log_z, std::log(static_cast<long double>(kLogClamp)));
    loss -= target[k] * log_p;
  }
  return loss;
}

}  // namespace

GradCheckReport grad_check(const Network& net, const Signal& x, const Signal& target,
                           double h) {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  const auto base = forward(net, x);
  const auto analytic = backward(net, base.tape, target).flat();
  const auto base_pattern = activation_pattern(base.tape);

  Network probe = net;
  auto params = probe.parameter_pointers();
  const auto paths = probe.parameter_paths();

  GradCheckReport report;
  report.entries.reserve(params.size());
  std::vector<long double> theta(params.size());
  for (std::size_t j = 0; j < params.size(); ++j) theta[j] = *params[j];

  for (std::size_t j = 0; j < params.size(); ++j) {
    double& value = *params[j];
    const double saved = value;
    value = saved + h;
    const auto plus = forward(probe, x);
    value = saved - h;
    const auto minus = forward(probe, x);
    value = saved;

    const long double center = theta[j];
    theta[j] = center + h;
    const long double loss_plus = extended_loss(probe, theta, x, target);
    theta[j] = center - h;
    const long double loss_minus = extended_loss(probe, theta, x, target);
    theta[j] = center;

    GradCheckEntry entry;
    entry.path = paths[j];
    entry.analytic = analytic[j];
    entry.numeric = static_cast<double>((loss_plus - loss_minus) / (2.0L * h));
    entry.kink_adjacent = activation_pattern(plus.tape) != base_pattern ||
                          activation_pattern(minus.tape) != base_pattern;
    const double scale =
        std::max({std::abs(entry.analytic), std::abs(entry.numeric), kGradCheckScaleFloor});
    entry.error = std::abs(entry.analytic - entry.numeric) / scale;
    if (entry.kink_adjacent) {
      ++report.excluded;
    } else {
      ++report.checked;
      if (report.worst_path.empty() || entry.error > report.max_error) {
        report.max_error = entry.error;
        report.worst_path = entry.path;
      }
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace mfcnn

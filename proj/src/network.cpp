#include "mfcnn/network.hpp"

#include <string>

#include "mfcnn/errors.hpp"

namespace mfcnn {

Network::Network(std::size_t input_length, std::vector<ConvBlock> conv,
                 std::vector<DenseBlock> dense, LossKind loss)
    : input_length_(input_length), conv_(std::move(conv)), dense_(std::move(dense)), loss_(loss) {
  validate();
}

void Network::validate() const {
  if (input_length_ == 0) throw ShapeError("input length must be positive");
  if (dense_.empty()) throw ShapeError("network needs at least one dense (output) layer");
  std::size_t channels = 1;
  std::size_t length = input_length_;
  for (std::size_t i = 0; i < conv_.size(); ++i) {
    const auto& b = conv_[i];
    const std::string where = "conv[" + std::to_string(i) + "]";
    if (b.conv.in_channels() != channels) {
      throw ShapeError(where + " expects " + std::to_string(b.conv.in_channels()) +
                       " input channels, previous stage gives " + std::to_string(channels));
    }
    if (b.pool == 0) throw ShapeError(where + ": pool must be at least 1");
    if (b.leaky_slope < 0.0) throw ShapeError(where + ": leaky slope must be non-negative");
    try {
      length = b.conv.output_length(length);
    } catch (const LengthError& e) {
      throw ShapeError(where + ": " + e.what());
    }
    length = pooled_length(length, b.pool);
    channels = b.conv.out_channels();
  }
  std::size_t width = channels * length;
  for (std::size_t i = 0; i < dense_.size(); ++i) {
    const auto& b = dense_[i];
    const std::string where = "dense[" + std::to_string(i) + "]";
    if (b.dense.inputs() != width) {
      throw ShapeError(where + " expects " + std::to_string(b.dense.inputs()) +
                       " inputs, previous stage gives " + std::to_string(width));
    }
    if (b.leaky_slope < 0.0) throw ShapeError(where + ": leaky slope must be non-negative");
    width = b.dense.outputs();
  }
  if (dense_.back().relu) throw ShapeError("output layer must not have an activation");
  if (loss_ == LossKind::SoftmaxCrossEntropy && width < 2) {
    throw ShapeError("softmax output needs at least two classes");
  }
}

std::size_t Network::output_length() const { return dense_.back().dense.outputs(); }

std::vector<LayerShape> Network::shapes() const {
  std::vector<LayerShape> out;
  std::size_t channels = 1;
  std::size_t length = input_length_;
  out.push_back({"input", channels, length, 0});
  for (const auto& b : conv_) {
    length = pooled_length(b.conv.output_length(length), b.pool);
    channels = b.conv.out_channels();
    out.push_back({"conv", channels, length, b.conv.parameter_count()});
  }
  out.push_back({"flatten", 1, channels * length, 0});
  for (const auto& b : dense_) {
    out.push_back({"dense", 1, b.dense.outputs(), b.dense.parameter_count()});
  }
  out.push_back({loss_ == LossKind::SoftmaxCrossEntropy ? "softmax" : "output", 1,
                 output_length(), 0});
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& b : conv_) n += b.conv.parameter_count();
  for (const auto& b : dense_) n += b.dense.parameter_count();
  return n;
}

std::size_t Network::dense_weight_count() const {
  std::size_t n = 0;
  for (const auto& b : dense_) n += b.dense.weight_count();
  return n;
}

std::vector<double*> Network::parameter_pointers() {
  std::vector<double*> out;
  out.reserve(parameter_count());
  for (auto& b : conv_) {
    for (double& w : b.conv.weights()) out.push_back(&w);
    for (double& v : b.conv.bias()) out.push_back(&v);
  }
  for (auto& b : dense_) {
    for (double& w : b.dense.weights()) out.push_back(&w);
    for (double& v : b.dense.bias()) out.push_back(&v);
  }
  return out;
}

std::vector<std::string> Network::parameter_paths() const {
  std::vector<std::string> out;
  out.reserve(parameter_count());
  for (std::size_t i = 0; i < conv_.size(); ++i) {
    const auto& c = conv_[i].conv;
    const std::string base = "conv[" + std::to_string(i) + "]";
    for (std::size_t k = 0; k < c.out_channels(); ++k)
      for (std::size_t p = 0; p < c.in_channels(); ++p)
        for (std::size_t m = 0; m < c.taps(); ++m)
          out.push_back(base + ".w[" + std::to_string(k) + "][" + std::to_string(p) + "][" +
                        std::to_string(m) + "]");
    for (std::size_t k = 0; k < c.out_channels(); ++k)
      out.push_back(base + ".b[" + std::to_string(k) + "]");
  }
  for (std::size_t i = 0; i < dense_.size(); ++i) {
    const auto& d = dense_[i].dense;
    const std::string base = "dense[" + std::to_string(i) + "]";
    for (std::size_t k = 0; k < d.outputs(); ++k)
      for (std::size_t n = 0; n < d.inputs(); ++n)
        out.push_back(base + ".w[" + std::to_string(k) + "][" + std::to_string(n) + "]");
    for (std::size_t k = 0; k < d.bias().size(); ++k)
      out.push_back(base + ".b[" + std::to_string(k) + "]");
  }
  return out;
}

void Network::initialize(InitKind kind, Rng& rng) {
  for (auto& b : conv_) {
    InitScheme s{kind, b.conv.fan_in(), b.conv.fan_out()};
    const Signal w = init_draw(s, b.conv.weights().size(), rng);
    std::copy(w.begin(), w.end(), b.conv.weights().begin());
    std::fill(b.conv.bias().begin(), b.conv.bias().end(), 0.0);
  }
  for (auto& b : dense_) {
    InitScheme s{kind, b.dense.inputs(), b.dense.outputs()};
    const Signal w = init_draw(s, b.dense.weights().size(), rng);
    std::copy(w.begin(), w.end(), b.dense.weights().begin());
    std::fill(b.dense.bias().begin(), b.dense.bias().end(), 0.0);
  }
}

ForwardResult forward(const Network& net, const Signal& x, const DropoutContext* dropout) {
  if (x.size() != net.input_length()) {
    throw ShapeError("network expects input length " + std::to_string(net.input_length()) +
                     ", got " + std::to_string(x.size()));
  }
  const bool use_dropout = dropout && dropout->keep_prob < 1.0;
  if (use_dropout && !dropout->rng) throw DomainError("dropout requires a generator");

  ForwardResult result;
  ForwardTape& tape = result.tape;
  MultiChannelSignal current = MultiChannelSignal::single(x);

  for (const auto& block : net.conv_blocks()) {
    ConvTapeEntry e;
    auto conv = conv_forward(current, block.conv);
    e.conv = std::move(conv.record);
    e.y = std::move(conv.y);
    auto act = relu_forward(e.y, block.leaky_slope);
    e.o = std::move(act.o);
    e.relu_mask = std::move(act.mask);
    e.pool = maxpool_forward(e.o, block.pool);
    if (use_dropout) {
      e.dropout = dropout_mask(e.pool.pooled.channel_count(), e.pool.pooled.length(),
                               dropout->keep_prob, *dropout->rng);
      e.keep_prob = dropout->keep_prob;
      e.output = apply_dropout(e.pool.pooled, *e.dropout, dropout->keep_prob);
    } else {
      e.output = e.pool.pooled;
    }
    current = e.output;
    tape.conv.push_back(std::move(e));
  }

  tape.flat_channels = current.channel_count();
  tape.flat_length = current.length();
  Signal vec = flatten(current);

  const auto& dense = net.dense_blocks();
  for (std::size_t i = 0; i < dense.size(); ++i) {
    const auto& block = dense[i];
    const bool is_output = i + 1 == dense.size();
    DenseTapeEntry e;
    e.input = vec;
    e.y = dense_forward(vec, block.dense);
    if (block.relu) {
      e.o = relu_forward(e.y, block.leaky_slope, &e.relu_mask);
    } else {
      e.o = e.y;
    }
    if (use_dropout && !is_output) {
      e.dropout = dropout_mask(1, e.o.size(), dropout->keep_prob, *dropout->rng);
      e.keep_prob = dropout->keep_prob;
      e.output = apply_dropout(e.o, *e.dropout, dropout->keep_prob);
    } else {
      e.output = e.o;
    }
    vec = e.output;
    tape.dense.push_back(std::move(e));
  }

  tape.output = net.loss() == LossKind::SoftmaxCrossEntropy ? softmax(vec) : vec;
  result.output = tape.output;
  return result;
}

Signal predict(const Network& net, const Signal& x) { return forward(net, x).output; }

}  // namespace mfcnn

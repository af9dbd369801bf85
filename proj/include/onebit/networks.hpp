#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "onebit/nn/layers.hpp"
#include "onebit/rng.hpp"

namespace onebit {

namespace detail {

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Convolution weights ~ N(0, 0.02^2); fully connected weights ~ N(0, 2/fan_in);
/// biases and norm shifts 0; norm gains 1.
template <typename S, typename Gen>
void init_parameter(nn::Parameter<S>& p, Gen& gen) {
  if (ends_with(p.name, ".gamma")) {
    p.value.setOnes();
    return;
  }
  if (ends_with(p.name, ".bias") || ends_with(p.name, ".beta")) {
    p.value.setZero();
    return;
  }
  const bool dense = p.name.rfind("fc", 0) == 0;
  const double stddev = dense ? std::sqrt(2.0 / static_cast<double>(p.value.cols())) : 0.02;
  std::normal_distribution<double> dist(0.0, stddev);
  for (nn::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = static_cast<S>(dist(gen));
}

}  // namespace detail


/// Problem dimensions a network is built for.
struct Dims {
  int antennas = 64;      // M
  int users = 32;         // K
  int pilot_length = 8;   // tau

  int condition_rows() const { return antennas + users; }
  bool operator==(const Dims&) const = default;
};

struct ConfigurationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct GeneratorSpec {
  int base_filters = 128;
  int kernel_h = 4;
  int kernel_w = 4;
  int encoder_blocks = 3;
  int decoder_blocks = 4;
  double leaky_slope = 0.2;
  bool skip_connections = true;

  void validate(const Dims& dims) const;
  bool operator==(const GeneratorSpec&) const = default;
};

struct DiscriminatorSpec {
  int filters = 512;
  int kernel_h = 4;
  int kernel_w = 4;
  int encoder_blocks = 4;
  int strided_convolutions = 3;  // leading convolutions with stride 2
  double leaky_slope = 0.2;

  void validate(const Dims& dims) const;
  bool operator==(const DiscriminatorSpec&) const = default;
};

struct MlpSpec {
  int layers = 9;
  int hidden = 0;  // 0: 2*M*K
  double leaky_slope = 0.2;

  int hidden_width(const Dims& d) const { return hidden > 0 ? hidden : 2 * d.antennas * d.users; }
  void validate(const Dims& dims) const;
  bool operator==(const MlpSpec&) const = default;
};

/// Row and column replication used by the generator's rescale stage so that
/// an (M+K) x tau condition is upsampled to (rows*M) x (cols*K) before a
/// strided convolution brings it to M x K.
struct RescaleFactors {
  int rows = 1;
  int cols = 1;
  static RescaleFactors for_dims(const Dims& d) {
    return {(d.condition_rows() + d.antennas - 1) / d.antennas, (d.pilot_length + d.users - 1) / d.users};
  }
};

/// Maps a batch of 2-channel (M+K) x tau conditions to 2-channel M x K images in [-1, 1].
template <typename S>
class ChannelNetwork {
 public:
  virtual ~ChannelNetwork() = default;
  virtual nn::Tensor<S> apply(const nn::Tensor<S>& condition) const = 0;
  virtual nn::Tensor<S> forward(const nn::Tensor<S>& condition) = 0;
  virtual nn::Tensor<S> backward(const nn::Tensor<S>& grad_output) = 0;
  virtual nn::ParameterList<S> parameters() = 0;
  virtual nn::Index weight_layers() const = 0;
  virtual const Dims& dims() const = 0;

  template <typename Gen>
  void init_weights(Gen& gen) {
    for (auto* p : parameters()) detail::init_parameter(*p, gen);
  }
};

/// U-Net generator. Rescale stage: nearest upsample then one strided convolution
/// to M x K. Encoders: conv(stride 2) + instance norm + LeakyReLU. Decoders:
/// upsample + conv + ReLU + instance norm. The first `encoder_blocks` decoders
/// undo the downsampling and concatenate the encoder output of matching size
/// (the last of them the rescale output); further decoders refine at full
/// resolution. Output: conv to 2 channels + tanh. With skip_connections off the
/// same stack is a plain encoder-decoder CNN.
template <typename S>
class UNetGenerator final : public ChannelNetwork<S> {
 public:
  UNetGenerator(const GeneratorSpec& spec, const Dims& dims) : spec_(spec), dims_(dims) {
    spec.validate(dims);
    const auto f = RescaleFactors::for_dims(dims);
    const nn::Index F = spec.base_filters, kh = spec.kernel_h, kw = spec.kernel_w;
    rescale_.template add<nn::ResizeNearest<S>>(nn::Index(f.rows) * dims.antennas, nn::Index(f.cols) * dims.users);
    rescale_.template add<nn::Conv2d<S>>("rescale.conv", 2, F, kh, kw, f.rows, f.cols);
    for (int i = 0; i < spec.encoder_blocks; ++i) {
      auto& e = encoders_.emplace_back();
      const std::string n = "enc" + std::to_string(i + 1);
      e.template add<nn::Conv2d<S>>(n + ".conv", F, F, kh, kw, 2, 2);
      e.template add<nn::InstanceNorm<S>>(n + ".norm", F);
      e.template add<nn::LeakyRelu<S>>(static_cast<S>(spec.leaky_slope));
    }
    for (int i = 0; i < spec.decoder_blocks; ++i) {
      auto& d = decoders_.emplace_back();
      const std::string n = "dec" + std::to_string(i + 1);
      const bool upsampling = i < spec.encoder_blocks;
      const bool receives_skip = spec.skip_connections && i > 0 && i <= spec.encoder_blocks;
      const nn::Index factor = upsampling ? 2 : 1;
      d.template add<nn::Upsample<S>>(factor, factor);
      d.template add<nn::Conv2d<S>>(n + ".conv", receives_skip ? 2 * F : F, F, kh, kw, 1, 1);
      d.template add<nn::LeakyRelu<S>>(S(0));
      d.template add<nn::InstanceNorm<S>>(n + ".norm", F);
    }
    const bool last_receives_skip = spec.skip_connections && spec.decoder_blocks == spec.encoder_blocks;
    head_.template add<nn::Conv2d<S>>("out.conv", last_receives_skip ? 2 * F : F, 2, kh, kw, 1, 1);
    head_.template add<nn::Tanh<S>>();
  }

  nn::Tensor<S> apply(const nn::Tensor<S>& x) const override { return run(x, nullptr); }

  nn::Tensor<S> forward(const nn::Tensor<S>& x) override { return run(x, this); }

  nn::Tensor<S> backward(const nn::Tensor<S>& dy) override {
    const int E = spec_.encoder_blocks, D = spec_.decoder_blocks;
    // gradients flowing into encoder outputs via skips; index 0 is the rescale output
    std::vector<nn::Tensor<S>> skip_grad(E + 1);
    nn::Tensor<S> g = head_.backward(dy);
    for (int i = D - 1; i >= 0; --i) {
      const int skip = skip_source(i + 1);  // the input of decoder i+1 is concat(dec_i, skip)
      if (skip >= 0) {
        const nn::Index F = spec_.base_filters;
        skip_grad[skip] = nn::slice_channels(g, F, F);
        g = nn::slice_channels(g, 0, F);
      }
      g = decoders_[i].backward(g);
    }
    for (int i = E - 1; i >= 0; --i) {
      if (skip_grad[i + 1].batch > 0) g.data += skip_grad[i + 1].data;
      g = encoders_[i].backward(g);
    }
    if (skip_grad[0].batch > 0) g.data += skip_grad[0].data;
    return rescale_.backward(g);
  }

  nn::ParameterList<S> parameters() override {
    nn::ParameterList<S> p;
    rescale_.collect(p);
    for (auto& e : encoders_) e.collect(p);
    for (auto& d : decoders_) d.collect(p);
    head_.collect(p);
    return p;
  }

  nn::Index weight_layers() const override {
    nn::Index n = rescale_.weight_layers() + head_.weight_layers();
    for (const auto& e : encoders_) n += e.weight_layers();
    for (const auto& d : decoders_) n += d.weight_layers();
    return n;
  }

  const Dims& dims() const override { return dims_; }
  const GeneratorSpec& spec() const { return spec_; }

 private:
  /// Encoder feature (0 = rescale output) concatenated after decoder `decoder_index`
  /// (1-based count of decoders applied so far), or -1.
  int skip_source(int decoders_done) const {
    if (!spec_.skip_connections) return -1;
    if (decoders_done < 1 || decoders_done > spec_.encoder_blocks) return -1;
    return spec_.encoder_blocks - decoders_done;
  }

  nn::Tensor<S> run(const nn::Tensor<S>& x, UNetGenerator* train) const {
    if (x.channels() != 2 || x.height != dims_.condition_rows() || x.width != dims_.pilot_length)
      throw std::invalid_argument("generator: expected condition of shape Nx2x" +
                                  std::to_string(dims_.condition_rows()) + "x" +
                                  std::to_string(dims_.pilot_length) + ", got " + x.shape_string());
    auto step = [train](auto& seq_mut, const auto& seq, const nn::Tensor<S>& in) {
      return train ? seq_mut.forward(in) : seq.apply(in);
    };
    auto* self = const_cast<UNetGenerator*>(this);  // only dereferenced when train != nullptr
    std::vector<nn::Tensor<S>> features;
    features.reserve(spec_.encoder_blocks + 1);
    features.push_back(step(self->rescale_, rescale_, x));
    for (int i = 0; i < spec_.encoder_blocks; ++i)
      features.push_back(step(self->encoders_[i], encoders_[i], features.back()));
    nn::Tensor<S> h = features.back();
    for (int i = 0; i < spec_.decoder_blocks; ++i) {
      h = step(self->decoders_[i], decoders_[i], h);
      const int skip = skip_source(i + 1);
      if (skip >= 0) h = nn::concat_channels(h, features[skip]);
    }
    return step(self->head_, head_, h);
  }

  GeneratorSpec spec_;
  Dims dims_;
  nn::Sequential<S> rescale_;
  std::vector<nn::Sequential<S>> encoders_;
  std::vector<nn::Sequential<S>> decoders_;
  nn::Sequential<S> head_;
};

/// Fully connected baseline over the flattened condition.
template <typename S>
class MlpNetwork final : public ChannelNetwork<S> {
 public:
  MlpNetwork(const MlpSpec& spec, const Dims& dims) : spec_(spec), dims_(dims) {
    spec.validate(dims);
    const nn::Index in = nn::Index(2) * dims.condition_rows() * dims.pilot_length;
    const nn::Index out = nn::Index(2) * dims.antennas * dims.users;
    const nn::Index hidden = spec.hidden_width(dims);
    for (int i = 0; i < spec.layers; ++i) {
      const nn::Index a = i == 0 ? in : hidden;
      const nn::Index b = i + 1 == spec.layers ? out : hidden;
      body_.template add<nn::Linear<S>>("fc" + std::to_string(i + 1), a, b);
      if (i + 1 < spec.layers) body_.template add<nn::LeakyRelu<S>>(static_cast<S>(spec.leaky_slope));
    }
    body_.template add<nn::Tanh<S>>();
  }

  nn::Tensor<S> apply(const nn::Tensor<S>& x) const override { return unflatten(body_.apply(flatten(x))); }
  nn::Tensor<S> forward(const nn::Tensor<S>& x) override { return unflatten(body_.forward(flatten(x))); }
  nn::Tensor<S> backward(const nn::Tensor<S>& dy) override {
    nn::Tensor<S> g = body_.backward(flatten_output(dy));
    nn::Tensor<S> dx(g.batch, 2, dims_.condition_rows(), dims_.pilot_length);
    dx.data = g.data.reshaped(2, g.batch * dims_.condition_rows() * dims_.pilot_length);
    return dx;
  }
  nn::ParameterList<S> parameters() override {
    nn::ParameterList<S> p;
    body_.collect(p);
    return p;
  }
  nn::Index weight_layers() const override { return body_.weight_layers(); }
  const Dims& dims() const override { return dims_; }
  const MlpSpec& spec() const { return spec_; }

 private:
  nn::Tensor<S> flatten(const nn::Tensor<S>& x) const {
    if (x.channels() != 2 || x.height != dims_.condition_rows() || x.width != dims_.pilot_length)
      throw std::invalid_argument("mlp: bad condition shape " + x.shape_string());
    nn::Tensor<S> f(x.batch, 2 * x.plane(), 1, 1);
    f.data = x.data.reshaped(2 * x.plane(), x.batch);
    return f;
  }
  nn::Tensor<S> flatten_output(const nn::Tensor<S>& y) const {
    nn::Tensor<S> f(y.batch, 2 * y.plane(), 1, 1);
    f.data = y.data.reshaped(2 * y.plane(), y.batch);
    return f;
  }
  nn::Tensor<S> unflatten(const nn::Tensor<S>& f) const {
    nn::Tensor<S> y(f.batch, 2, dims_.antennas, dims_.users);
    y.data = f.data.reshaped(2, f.batch * nn::Index(dims_.antennas) * dims_.users);
    return y;
  }

  MlpSpec spec_;
  Dims dims_;
  nn::Sequential<S> body_;
};

/// Patch discriminator over a 4-channel M x K input (channel image of H plus the
/// pilot image resized to M x K). conv + LeakyReLU, then encoder blocks
/// (conv + instance norm + LeakyReLU), then a convolution to one channel with a
/// sigmoid: the output is a map of per-patch probabilities.
template <typename S>
class PatchDiscriminator {
 public:
  PatchDiscriminator(const DiscriminatorSpec& spec, const Dims& dims) : spec_(spec), dims_(dims) {
    spec.validate(dims);
    const nn::Index F = spec.filters, kh = spec.kernel_h, kw = spec.kernel_w;
    auto stride = [&](int conv_index) -> nn::Index { return conv_index < spec.strided_convolutions ? 2 : 1; };
    body_.template add<nn::Conv2d<S>>("d.conv1", 4, F, kh, kw, stride(0), stride(0));
    body_.template add<nn::LeakyRelu<S>>(static_cast<S>(spec.leaky_slope));
    for (int i = 0; i < spec.encoder_blocks; ++i) {
      const std::string n = "d.enc" + std::to_string(i + 1);
      body_.template add<nn::Conv2d<S>>(n + ".conv", F, F, kh, kw, stride(i + 1), stride(i + 1));
      body_.template add<nn::InstanceNorm<S>>(n + ".norm", F);
      body_.template add<nn::LeakyRelu<S>>(static_cast<S>(spec.leaky_slope));
    }
    body_.template add<nn::Conv2d<S>>("d.out", F, 1, kh, kw, 1, 1);
    body_.template add<nn::Sigmoid<S>>();
  }

  nn::Tensor<S> apply(const nn::Tensor<S>& x) const { return body_.apply(check(x)); }
  nn::Tensor<S> forward(const nn::Tensor<S>& x) { return body_.forward(check(x)); }
  nn::Tensor<S> backward(const nn::Tensor<S>& dy) { return body_.backward(dy); }

  /// Per-sample mean of a patch map.
  static nn::Vec<S> mean_probability(const nn::Tensor<S>& patches) {
    nn::Vec<S> m(patches.batch);
    for (nn::Index n = 0; n < patches.batch; ++n) m(n) = patches.sample(n).mean();
    return m;
  }

  nn::ParameterList<S> parameters() {
    nn::ParameterList<S> p;
    body_.collect(p);
    return p;
  }
  nn::Index weight_layers() const { return body_.weight_layers(); }
  const DiscriminatorSpec& spec() const { return spec_; }

  template <typename Gen>
  void init_weights(Gen& gen) {
    for (auto* p : parameters()) detail::init_parameter(*p, gen);
  }

 private:
  const nn::Tensor<S>& check(const nn::Tensor<S>& x) const {
    if (x.channels() != 4 || x.height != dims_.antennas || x.width != dims_.users)
      throw std::invalid_argument("discriminator: expected Nx4x" + std::to_string(dims_.antennas) + "x" +
                                  std::to_string(dims_.users) + ", got " + x.shape_string());
    return x;
  }

  DiscriminatorSpec spec_;
  Dims dims_;
  nn::Sequential<S> body_;
};


}  // namespace onebit

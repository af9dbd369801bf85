#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "onebit/nn/tensor.hpp"

namespace onebit::nn {

template <typename S>
struct Parameter {
  std::string name;
  Mat<S> value;
  Mat<S> grad;

  Parameter() = default;
  Parameter(std::string n, Index rows, Index cols)
      : name(std::move(n)), value(Mat<S>::Zero(rows, cols)), grad(Mat<S>::Zero(rows, cols)) {}
};

template <typename S>
using ParameterList = std::vector<Parameter<S>*>;

template <typename S>
void zero_grad(const ParameterList<S>& params) {
  for (auto* p : params) p->grad.setZero();
}

template <typename S>
Index parameter_count(const ParameterList<S>& params) {
  Index n = 0;
  for (auto* p : params) n += p->value.size();
  return n;
}

/// A differentiable stage. `apply` is pure; `forward` additionally records what
/// `backward` needs. `backward` accumulates parameter gradients and returns the
/// gradient with respect to the input of the last `forward`.
template <typename S>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor<S> apply(const Tensor<S>& x) const = 0;
  virtual Tensor<S> forward(const Tensor<S>& x) = 0;
  virtual Tensor<S> backward(const Tensor<S>& dy) = 0;
  virtual void collect(ParameterList<S>&) {}
  virtual bool is_weight_layer() const { return false; }
};

/// TF-style "same" padding: output = ceil(input / stride).
struct SamePadding {
  Index out = 0;
  Index before = 0;

  static SamePadding make(Index in, Index kernel, Index stride) {
    SamePadding p;
    p.out = (in + stride - 1) / stride;
    const Index total = std::max<Index>((p.out - 1) * stride + kernel - in, 0);
    p.before = total / 2;
    return p;
  }
};

/// 2-D convolution with same padding. Weight row `o` holds the kernel laid out
/// as (ky, kx, c_in) with c_in fastest, matching the im2col column layout.
template <typename S>
class Conv2d final : public Layer<S> {
 public:
  Conv2d(std::string name, Index in_channels, Index out_channels, Index kernel_h, Index kernel_w, Index stride_h,
         Index stride_w)
      : in_(in_channels),
        out_(out_channels),
        kh_(kernel_h),
        kw_(kernel_w),
        sh_(stride_h),
        sw_(stride_w),
        weight_(name + ".weight", out_channels, kernel_h * kernel_w * in_channels),
        bias_(name + ".bias", out_channels, 1) {}

  template <typename Gen>
  void init_gaussian(Gen& gen, S stddev) {
    std::normal_distribution<double> dist(0.0, static_cast<double>(stddev));
    for (Index i = 0; i < weight_.value.size(); ++i) weight_.value.data()[i] = static_cast<S>(dist(gen));
    bias_.value.setZero();
  }

  Tensor<S> apply(const Tensor<S>& x) const override {
    Mat<S> cols;
    return convolve(x, cols);
  }

  Tensor<S> forward(const Tensor<S>& x) override {
    input_ = x;
    return convolve(x, cols_);
  }

  Tensor<S> backward(const Tensor<S>& dy) override {
    const Tensor<S>& x = input_;
    const auto ph = SamePadding::make(x.height, kh_, sh_);
    const auto pw = SamePadding::make(x.width, kw_, sw_);
    const Index out_plane = ph.out * pw.out;
    if (dy.batch != x.batch || dy.channels() != out_ || dy.height != ph.out || dy.width != pw.out)
      throw std::invalid_argument("Conv2d::backward: gradient shape " + dy.shape_string());
    Tensor<S> dx(x.batch, in_, x.height, x.width);
    const Index chunk = chunk_size(out_plane, x.batch);
    for (Index n0 = 0; n0 < x.batch; n0 += chunk) {
      const Index cn = std::min(chunk, x.batch - n0);
      im2col(x, n0, cn, ph, pw, cols_);
      const auto g = dy.data.middleCols(n0 * out_plane, cn * out_plane);
      weight_.grad.noalias() += g * cols_.transpose();
      bias_.grad.col(0) += g.rowwise().sum();
      dcols_.noalias() = weight_.value.transpose() * g;
      col2im(dcols_, n0, cn, ph, pw, dx);
    }
    return dx;
  }

  void collect(ParameterList<S>& params) override {
    params.push_back(&weight_);
    params.push_back(&bias_);
  }
  bool is_weight_layer() const override { return true; }

  Index in_channels() const { return in_; }
  Index out_channels() const { return out_; }

 private:
  Tensor<S> convolve(const Tensor<S>& x, Mat<S>& cols) const {
    check_input(x);
    const auto ph = SamePadding::make(x.height, kh_, sh_);
    const auto pw = SamePadding::make(x.width, kw_, sw_);
    Tensor<S> y(x.batch, out_, ph.out, pw.out);
    const Index out_plane = ph.out * pw.out;
    const Index chunk = chunk_size(out_plane, x.batch);
    for (Index n0 = 0; n0 < x.batch; n0 += chunk) {
      const Index cn = std::min(chunk, x.batch - n0);
      im2col(x, n0, cn, ph, pw, cols);
      auto block = y.data.middleCols(n0 * out_plane, cn * out_plane);
      block.noalias() = weight_.value * cols;
      block.colwise() += bias_.value.col(0);
    }
    return y;
  }

  void check_input(const Tensor<S>& x) const {
    if (x.channels() != in_)
      throw std::invalid_argument("Conv2d " + weight_.name + ": expected " + std::to_string(in_) +
                                  " input channels, got " + std::to_string(x.channels()));
  }

  Index chunk_size(Index out_plane, Index batch) const {
    // elements of the im2col buffer; kept well below glibc's mmap ceiling so
    // per-call buffers come from the heap instead of fresh zeroed pages
    constexpr Index kBudget = Index(1) << 20;
    const Index per_sample = std::max<Index>(1, kh_ * kw_ * in_ * out_plane);
    return std::clamp<Index>(kBudget / per_sample, 1, std::max<Index>(batch, 1));
  }

  void im2col(const Tensor<S>& x, Index n0, Index cn, const SamePadding& ph, const SamePadding& pw,
              Mat<S>& cols) const {
    const Index out_plane = ph.out * pw.out;
    cols.setZero(kh_ * kw_ * in_, cn * out_plane);
    for (Index n = 0; n < cn; ++n) {
      const Index in_base = (n0 + n) * x.plane();
      for (Index oy = 0; oy < ph.out; ++oy)
        for (Index ox = 0; ox < pw.out; ++ox) {
          const Index col = n * out_plane + oy * pw.out + ox;
          for (Index ky = 0; ky < kh_; ++ky) {
            const Index iy = oy * sh_ - ph.before + ky;
            if (iy < 0 || iy >= x.height) continue;
            for (Index kx = 0; kx < kw_; ++kx) {
              const Index ix = ox * sw_ - pw.before + kx;
              if (ix < 0 || ix >= x.width) continue;
              cols.col(col).segment((ky * kw_ + kx) * in_, in_) = x.data.col(in_base + iy * x.width + ix);
            }
          }
        }
    }
  }

  void col2im(const Mat<S>& dcols, Index n0, Index cn, const SamePadding& ph, const SamePadding& pw,
              Tensor<S>& dx) const {
    const Index out_plane = ph.out * pw.out;
    for (Index n = 0; n < cn; ++n) {
      const Index in_base = (n0 + n) * dx.plane();
      for (Index oy = 0; oy < ph.out; ++oy)
        for (Index ox = 0; ox < pw.out; ++ox) {
          const Index col = n * out_plane + oy * pw.out + ox;
          for (Index ky = 0; ky < kh_; ++ky) {
            const Index iy = oy * sh_ - ph.before + ky;
            if (iy < 0 || iy >= dx.height) continue;
            for (Index kx = 0; kx < kw_; ++kx) {
              const Index ix = ox * sw_ - pw.before + kx;
              if (ix < 0 || ix >= dx.width) continue;
              dx.data.col(in_base + iy * dx.width + ix) += dcols.col(col).segment((ky * kw_ + kx) * in_, in_);
            }
          }
        }
    }
  }

  Index in_, out_, kh_, kw_, sh_, sw_;
  Parameter<S> weight_, bias_;
  Tensor<S> input_;
  Mat<S> cols_, dcols_;  // training-path scratch, reused across calls
};

/// Per-sample, per-channel normalization over the spatial plane with a learned affine.
template <typename S>
class InstanceNorm final : public Layer<S> {
 public:
  InstanceNorm(std::string name, Index channels, S eps = S(1e-5))
      : eps_(eps), gamma_(name + ".gamma", channels, 1), beta_(name + ".beta", channels, 1) {
    gamma_.value.setOnes();
  }

  Tensor<S> apply(const Tensor<S>& x) const override {
    Tensor<S> y = x;
    for (Index n = 0; n < x.batch; ++n) {
      auto block = y.sample(n);
      const Vec<S> mean = block.rowwise().mean();
      block.colwise() -= mean;
      const Vec<S> inv = ((block.array().square().rowwise().sum() / S(x.plane())) + eps_).rsqrt().matrix();
      block = (inv.cwiseProduct(gamma_.value.col(0))).asDiagonal() * block;
      block.colwise() += beta_.value.col(0);
    }
    return y;
  }

  Tensor<S> forward(const Tensor<S>& x) override {
    normalized_ = x;
    inv_std_.resize(x.channels(), x.batch);
    for (Index n = 0; n < x.batch; ++n) {
      auto block = normalized_.sample(n);
      const Vec<S> mean = block.rowwise().mean();
      block.colwise() -= mean;
      inv_std_.col(n) = ((block.array().square().rowwise().sum() / S(x.plane())) + eps_).rsqrt().matrix();
      block = inv_std_.col(n).asDiagonal() * block;
    }
    Tensor<S> y = normalized_;
    for (Index n = 0; n < x.batch; ++n) {
      auto block = y.sample(n);
      block = gamma_.value.col(0).asDiagonal() * block;
      block.colwise() += beta_.value.col(0);
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) override {
    Tensor<S> dx(dy.batch, dy.channels(), dy.height, dy.width);
    const S p = S(dy.plane());
    for (Index n = 0; n < dy.batch; ++n) {
      const auto g = dy.sample(n);
      const auto xhat = normalized_.sample(n);
      gamma_.grad.col(0) += g.cwiseProduct(xhat).rowwise().sum();
      beta_.grad.col(0) += g.rowwise().sum();
      const Mat<S> dxhat = gamma_.value.col(0).asDiagonal() * g;
      const Vec<S> sum_d = dxhat.rowwise().sum();
      const Vec<S> sum_dx = dxhat.cwiseProduct(xhat).rowwise().sum();
      Mat<S> r = dxhat * p;
      r.colwise() -= sum_d;
      r -= sum_dx.asDiagonal() * xhat;
      dx.sample(n) = (inv_std_.col(n) / p).asDiagonal() * r;
    }
    return dx;
  }

  void collect(ParameterList<S>& params) override {
    params.push_back(&gamma_);
    params.push_back(&beta_);
  }

 private:
  S eps_;
  Parameter<S> gamma_, beta_;
  Tensor<S> normalized_;
  Mat<S> inv_std_;
};

/// max(x, slope*x); slope 0 gives ReLU.
template <typename S>
class LeakyRelu final : public Layer<S> {
 public:
  explicit LeakyRelu(S slope) : slope_(slope) {}

  Tensor<S> apply(const Tensor<S>& x) const override {
    Tensor<S> y = x;
    const S a = slope_;
    y.data = x.data.unaryExpr([a](S v) { return v >= S(0) ? v : a * v; });
    return y;
  }
  Tensor<S> forward(const Tensor<S>& x) override {
    input_ = x;
    return apply(x);
  }
  Tensor<S> backward(const Tensor<S>& dy) override {
    Tensor<S> dx = dy;
    const S a = slope_;
    dx.data = dy.data.binaryExpr(input_.data, [a](S g, S v) { return v >= S(0) ? g : a * g; });
    return dx;
  }

 private:
  S slope_;
  Tensor<S> input_;
};

template <typename S>
class Tanh final : public Layer<S> {
 public:
  Tensor<S> apply(const Tensor<S>& x) const override {
    Tensor<S> y = x;
    y.data = x.data.array().tanh().matrix();
    return y;
  }
  Tensor<S> forward(const Tensor<S>& x) override {
    output_ = apply(x);
    return output_;
  }
  Tensor<S> backward(const Tensor<S>& dy) override {
    Tensor<S> dx = dy;
    dx.data = dy.data.array() * (S(1) - output_.data.array().square());
    return dx;
  }

 private:
  Tensor<S> output_;
};

template <typename S>
class Sigmoid final : public Layer<S> {
 public:
  Tensor<S> apply(const Tensor<S>& x) const override {
    Tensor<S> y = x;
    y.data = x.data.unaryExpr([](S v) { return S(1) / (S(1) + std::exp(-v)); });
    return y;
  }
  Tensor<S> forward(const Tensor<S>& x) override {
    output_ = apply(x);
    return output_;
  }
  Tensor<S> backward(const Tensor<S>& dy) override {
    Tensor<S> dx = dy;
    dx.data = dy.data.array() * output_.data.array() * (S(1) - output_.data.array());
    return dx;
  }

 private:
  Tensor<S> output_;
};

/// Nearest-neighbour resize to a fixed output size; source index floor(dst * in / out).
/// With output >= input in both axes every input pixel is replicated at least once.
template <typename S>
class ResizeNearest final : public Layer<S> {
 public:
  ResizeNearest(Index out_h, Index out_w) : out_h_(out_h), out_w_(out_w) {}

  static ResizeNearest scale(Index in_h, Index in_w, Index fh, Index fw) { return {in_h * fh, in_w * fw}; }

  Tensor<S> apply(const Tensor<S>& x) const override {
    Tensor<S> y(x.batch, x.channels(), out_h_, out_w_);
    for (Index n = 0; n < x.batch; ++n)
      for (Index oy = 0; oy < out_h_; ++oy) {
        const Index iy = oy * x.height / out_h_;
        for (Index ox = 0; ox < out_w_; ++ox) {
          const Index ix = ox * x.width / out_w_;
          y.data.col(n * y.plane() + oy * out_w_ + ox) = x.data.col(n * x.plane() + iy * x.width + ix);
        }
      }
    return y;
  }
  Tensor<S> forward(const Tensor<S>& x) override {
    in_h_ = x.height;
    in_w_ = x.width;
    return apply(x);
  }
  Tensor<S> backward(const Tensor<S>& dy) override {
    Tensor<S> dx(dy.batch, dy.channels(), in_h_, in_w_);
    for (Index n = 0; n < dy.batch; ++n)
      for (Index oy = 0; oy < out_h_; ++oy) {
        const Index iy = oy * in_h_ / out_h_;
        for (Index ox = 0; ox < out_w_; ++ox) {
          const Index ix = ox * in_w_ / out_w_;
          dx.data.col(n * dx.plane() + iy * in_w_ + ix) += dy.data.col(n * dy.plane() + oy * out_w_ + ox);
        }
      }
    return dx;
  }

 private:
  Index out_h_, out_w_;
  Index in_h_ = 0, in_w_ = 0;
};

/// Integer-factor nearest-neighbour upsampling.
template <typename S>
class Upsample final : public Layer<S> {
 public:
  Upsample(Index factor_h, Index factor_w) : fh_(factor_h), fw_(factor_w) {}

  Tensor<S> apply(const Tensor<S>& x) const override {
    if (fh_ == 1 && fw_ == 1) return x;
    return ResizeNearest<S>(x.height * fh_, x.width * fw_).apply(x);
  }
  Tensor<S> forward(const Tensor<S>& x) override {
    resize_ = ResizeNearest<S>(x.height * fh_, x.width * fw_);
    if (fh_ == 1 && fw_ == 1) return x;
    return resize_.forward(x);
  }
  Tensor<S> backward(const Tensor<S>& dy) override {
    if (fh_ == 1 && fw_ == 1) return dy;
    return resize_.backward(dy);
  }

 private:
  Index fh_, fw_;
  ResizeNearest<S> resize_{0, 0};
};

/// Fully connected layer over tensors whose features live in the channel axis
/// (height = width = 1).
template <typename S>
class Linear final : public Layer<S> {
 public:
  Linear(std::string name, Index in_features, Index out_features)
      : weight_(name + ".weight", out_features, in_features), bias_(name + ".bias", out_features, 1) {}

  template <typename Gen>
  void init_gaussian(Gen& gen, S stddev) {
    std::normal_distribution<double> dist(0.0, static_cast<double>(stddev));
    for (Index i = 0; i < weight_.value.size(); ++i) weight_.value.data()[i] = static_cast<S>(dist(gen));
    bias_.value.setZero();
  }

  Tensor<S> apply(const Tensor<S>& x) const override {
    if (x.plane() != 1 || x.channels() != weight_.value.cols())
      throw std::invalid_argument("Linear " + weight_.name + ": bad input shape " + x.shape_string());
    Tensor<S> y(x.batch, weight_.value.rows(), 1, 1);
    y.data.noalias() = weight_.value * x.data;
    y.data.colwise() += bias_.value.col(0);
    return y;
  }
  Tensor<S> forward(const Tensor<S>& x) override {
    input_ = x;
    return apply(x);
  }
  Tensor<S> backward(const Tensor<S>& dy) override {
    weight_.grad.noalias() += dy.data * input_.data.transpose();
    bias_.grad.col(0) += dy.data.rowwise().sum();
    Tensor<S> dx(dy.batch, weight_.value.cols(), 1, 1);
    dx.data.noalias() = weight_.value.transpose() * dy.data;
    return dx;
  }
  void collect(ParameterList<S>& params) override {
    params.push_back(&weight_);
    params.push_back(&bias_);
  }
  bool is_weight_layer() const override { return true; }

 private:
  Parameter<S> weight_, bias_;
  Tensor<S> input_;
};

/// Chain of layers owned by value.
template <typename S>
class Sequential {
 public:
  Sequential() = default;
  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  template <typename L, typename... Args>
  L& add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }

  Tensor<S> apply(const Tensor<S>& x) const {
    Tensor<S> h = x;
    for (const auto& l : layers_) h = l->apply(h);
    return h;
  }
  Tensor<S> forward(const Tensor<S>& x) {
    Tensor<S> h = x;
    for (auto& l : layers_) h = l->forward(h);
    return h;
  }
  Tensor<S> backward(const Tensor<S>& dy) {
    Tensor<S> g = dy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
  }
  void collect(ParameterList<S>& params) {
    for (auto& l : layers_) l->collect(params);
  }
  Index weight_layers() const {
    return static_cast<Index>(std::count_if(layers_.begin(), layers_.end(), [](const auto& l) {
      return l->is_weight_layer();
    }));
  }
  bool empty() const { return layers_.empty(); }

 private:
  std::vector<std::unique_ptr<Layer<S>>> layers_;
};

/// RMSProp: ms <- rho*ms + (1-rho)*g^2;  w <- w - lr * g / (sqrt(ms) + eps).
template <typename S>
class RmsProp {
 public:
  RmsProp(ParameterList<S> params, S learning_rate, S rho = S(0.9), S eps = S(1e-7))
      : params_(std::move(params)), lr_(learning_rate), rho_(rho), eps_(eps) {
    for (auto* p : params_) mean_square_.push_back(Mat<S>::Zero(p->value.rows(), p->value.cols()));
  }

  void step() {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = *params_[i];
      auto& ms = mean_square_[i];
      ms = rho_ * ms + (S(1) - rho_) * p.grad.cwiseAbs2();
      p.value.array() -= lr_ * p.grad.array() / (ms.array().sqrt() + eps_);
    }
  }

  S learning_rate() const { return lr_; }

 private:
  ParameterList<S> params_;
  S lr_, rho_, eps_;
  std::vector<Mat<S>> mean_square_;
};

}  // namespace onebit::nn

#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace onebit::nn {

using Eigen::Index;

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// Batch of feature maps. `data` is channels x (batch * height * width); the
/// column of pixel (n, y, x) is n*height*width + y*width + x, so each pixel's
/// channel vector is contiguous.
template <typename S>
struct Tensor {
  Index batch = 0;
  Index height = 0;
  Index width = 0;
  Mat<S> data;

  Tensor() = default;
  Tensor(Index n, Index c, Index h, Index w) : batch(n), height(h), width(w), data(Mat<S>::Zero(c, n * h * w)) {}

  Index channels() const { return data.rows(); }
  Index plane() const { return height * width; }

  auto sample(Index n) { return data.middleCols(n * plane(), plane()); }
  auto sample(Index n) const { return data.middleCols(n * plane(), plane()); }

  S& at(Index n, Index c, Index y, Index x) { return data(c, n * plane() + y * width + x); }
  S at(Index n, Index c, Index y, Index x) const { return data(c, n * plane() + y * width + x); }

  bool same_shape(const Tensor& o) const {
    return batch == o.batch && height == o.height && width == o.width && channels() == o.channels();
  }

  std::string shape_string() const {
    return std::to_string(batch) + "x" + std::to_string(channels()) + "x" + std::to_string(height) + "x" +
           std::to_string(width);
  }

  template <typename T>
  Tensor<T> cast() const {
    Tensor<T> out;
    out.batch = batch;
    out.height = height;
    out.width = width;
    out.data = data.template cast<T>();
    return out;
  }
};

/// Concatenates along the channel axis.
template <typename S>
Tensor<S> concat_channels(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.batch != b.batch || a.height != b.height || a.width != b.width)
    throw std::invalid_argument("concat_channels: shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  Tensor<S> out;
  out.batch = a.batch;
  out.height = a.height;
  out.width = a.width;
  out.data.resize(a.channels() + b.channels(), a.data.cols());
  out.data.topRows(a.channels()) = a.data;
  out.data.bottomRows(b.channels()) = b.data;
  return out;
}

template <typename S>
Tensor<S> slice_channels(const Tensor<S>& t, Index first, Index count) {
  Tensor<S> out;
  out.batch = t.batch;
  out.height = t.height;
  out.width = t.width;
  out.data = t.data.middleRows(first, count);
  return out;
}

/// Stacks single-sample tensors into a batch.
template <typename S>
Tensor<S> stack(const std::vector<const Tensor<S>*>& items) {
  if (items.empty()) throw std::invalid_argument("stack: empty batch");
  const auto& f = *items.front();
  Tensor<S> out(static_cast<Index>(items.size()), f.channels(), f.height, f.width);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& t = *items[i];
    if (t.batch != 1 || t.channels() != f.channels() || t.height != f.height || t.width != f.width)
      throw std::invalid_argument("stack: inconsistent sample shapes");
    out.sample(static_cast<Index>(i)) = t.data;
  }
  return out;
}

template <typename S>
Tensor<S> unstack(const Tensor<S>& t, Index n) {
  Tensor<S> out(1, t.channels(), t.height, t.width);
  out.data = t.sample(n);
  return out;
}

}  // namespace onebit::nn

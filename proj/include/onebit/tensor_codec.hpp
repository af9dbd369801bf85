#pragma once

#include <vector>

#include <Eigen/Dense>

#include "onebit/channel_model.hpp"
#include "onebit/nn/tensor.hpp"

namespace onebit {

/// rows x cols x 2 real image: channel 0 holds the real part, channel 1 the imaginary part.
using TwoChannelImage = nn::Tensor<double>;

TwoChannelImage complex_to_image(const Eigen::MatrixXcd& x);
Eigen::MatrixXcd image_to_complex(const TwoChannelImage& img);

/// Global amplitude scale mapping channel images into the tanh range.
struct NormalizationScale {
  double value = 1.0;
};

NormalizationScale fit_scale(const std::vector<ChannelMatrix>& training_channels, double margin = 1.0);

template <typename S>
nn::Tensor<S> normalize(const nn::Tensor<S>& img, NormalizationScale scale) {
  if (!(scale.value > 0)) throw std::invalid_argument("normalize: scale must be > 0");
  nn::Tensor<S> out = img;
  out.data /= static_cast<S>(scale.value);
  return out;
}

template <typename S>
nn::Tensor<S> denormalize(const nn::Tensor<S>& img, NormalizationScale scale) {
  if (!(scale.value > 0)) throw std::invalid_argument("denormalize: scale must be > 0");
  nn::Tensor<S> out = img;
  out.data *= static_cast<S>(scale.value);
  return out;
}

/// Clamps values into [-1, 1]; returns how many entries were clipped.
template <typename S>
Eigen::Index clip_unit(nn::Tensor<S>& img) {
  const Eigen::Index n = (img.data.array().abs() > S(1)).count();
  if (n > 0) img.data = img.data.cwiseMax(S(-1)).cwiseMin(S(1));
  return n;
}

/// Normalizes a channel image for use as a network target; entries outside
/// the fitted range are clipped to [-1, 1] with a warning.
nn::Tensor<double> target_image(const ChannelMatrix& h, NormalizationScale scale);

}  // namespace onebit

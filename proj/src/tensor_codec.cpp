#include "onebit/tensor_codec.hpp"

#include <algorithm>
#include <stdexcept>

#include "onebit/log.hpp"

namespace onebit {

TwoChannelImage complex_to_image(const Eigen::MatrixXcd& x) {
  TwoChannelImage img(1, 2, x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      img.at(0, 0, r, c) = x(r, c).real();
      img.at(0, 1, r, c) = x(r, c).imag();
    }
  return img;
}

Eigen::MatrixXcd image_to_complex(const TwoChannelImage& img) {
  if (img.channels() != 2)
    throw std::invalid_argument("image_to_complex: expected 2 channels, got " + std::to_string(img.channels()));
  if (img.batch != 1) throw std::invalid_argument("image_to_complex: expected a single image");
  Eigen::MatrixXcd x(img.height, img.width);
  for (Eigen::Index r = 0; r < img.height; ++r)
    for (Eigen::Index c = 0; c < img.width; ++c) x(r, c) = {img.at(0, 0, r, c), img.at(0, 1, r, c)};
  return x;
}

NormalizationScale fit_scale(const std::vector<ChannelMatrix>& training_channels, double margin) {
  if (training_channels.empty()) throw std::invalid_argument("fit_scale: empty training set");
  if (!(margin >= 1.0)) throw std::invalid_argument("fit_scale: margin must be >= 1");
  double peak = 0.0;
  for (const auto& h : training_channels)
    peak = std::max({peak, h.real().cwiseAbs().maxCoeff(), h.imag().cwiseAbs().maxCoeff()});
  if (!(peak > 0)) throw std::invalid_argument("fit_scale: all-zero training set");
  return {margin * peak};
}

nn::Tensor<double> target_image(const ChannelMatrix& h, NormalizationScale scale) {
  nn::Tensor<double> img = normalize(complex_to_image(h), scale);
  if (const Eigen::Index n = clip_unit(img); n > 0)
    log_warning(std::to_string(n) + " channel entries exceed the fitted scale " + std::to_string(scale.value) +
                " and were clipped");
  return img;
}

}  // namespace onebit

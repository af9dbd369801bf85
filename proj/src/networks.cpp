#include "onebit/networks.hpp"

namespace onebit {

namespace {

void require_positive(int value, const char* what) {
  if (value < 1) throw ConfigurationError(std::string(what) + " must be >= 1");
}

}  // namespace

void GeneratorSpec::validate(const Dims& dims) const {
  require_positive(base_filters, "generator base_filters");
  require_positive(kernel_h, "generator kernel height");
  require_positive(kernel_w, "generator kernel width");
  require_positive(encoder_blocks, "generator encoder_blocks");
  require_positive(dims.antennas, "M");
  require_positive(dims.users, "K");
  require_positive(dims.pilot_length, "tau");
  if (decoder_blocks < encoder_blocks)
    throw ConfigurationError("generator decoder_blocks must be >= encoder_blocks");
  if (encoder_blocks > 20) throw ConfigurationError("generator encoder_blocks too large");
  const int divisor = 1 << encoder_blocks;
  if (dims.antennas % divisor != 0)
    throw ConfigurationError("generator: M = " + std::to_string(dims.antennas) + " is not divisible by " +
                             std::to_string(divisor) + " (2^encoder_blocks)");
  if (dims.users % divisor != 0)
    throw ConfigurationError("generator: K = " + std::to_string(dims.users) + " is not divisible by " +
                             std::to_string(divisor) + " (2^encoder_blocks)");
}

void DiscriminatorSpec::validate(const Dims& dims) const {
  require_positive(filters, "discriminator filters");
  require_positive(kernel_h, "discriminator kernel height");
  require_positive(kernel_w, "discriminator kernel width");
  require_positive(dims.antennas, "M");
  require_positive(dims.users, "K");
  if (encoder_blocks < 0) throw ConfigurationError("discriminator encoder_blocks must be >= 0");
  if (strided_convolutions < 0 || strided_convolutions > encoder_blocks + 1)
    throw ConfigurationError("discriminator strided_convolutions out of range");
}

void MlpSpec::validate(const Dims& dims) const {
  require_positive(layers, "mlp layers");
  require_positive(dims.antennas, "M");
  require_positive(dims.users, "K");
  require_positive(dims.pilot_length, "tau");
  if (hidden < 0) throw ConfigurationError("mlp hidden width must be >= 0");
}

}  // namespace onebit

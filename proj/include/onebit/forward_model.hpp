#pragma once

#include <cstdint>
#include <limits>

#include <Eigen/Dense>

#include "onebit/channel_model.hpp"
#include "onebit/rng.hpp"

namespace onebit {

using PilotMatrix = Eigen::MatrixXcd;           // K x tau
using QuantizedObservation = Eigen::MatrixXcd;  // M x tau, entries in {+-1 +-j}

inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

/// Constant-modulus Fourier pilots, entry (k, t) = sqrt(power/tau) * exp(-2*pi*j*k*t/N)
/// with N = max(K, tau). Rows are orthogonal with norm^2 = power when tau >= K;
/// otherwise the matrix is the first tau columns of the K-point DFT.
PilotMatrix generate_pilots(int users, int pilot_length, double power = 1.0);

/// sgn(Re x) + j sgn(Im x) with sgn(0) = +1.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> one_bit_quantize(
    const Eigen::MatrixBase<Derived>& x) {
  using C = typename Derived::Scalar;
  using R = typename C::value_type;
  if (x.hasNaN()) throw std::invalid_argument("one_bit_quantize: NaN input");
  auto sgn = [](R v) { return v >= R(0) ? R(1) : R(-1); };
  return x.unaryExpr([&](const C& v) { return C(sgn(v.real()), sgn(v.imag())); });
}

/// Noise variance sigma^2 = mean(|X|^2) / 10^(snr_db/10).
double noise_variance(const Eigen::MatrixXcd& x, double snr_db);

/// X + N with circularly-symmetric Gaussian N; snr_db = +inf returns X unchanged.
Eigen::MatrixXcd add_awgn(const Eigen::MatrixXcd& x, double snr_db, Rng& rng);

/// one_bit_quantize(H * Phi + N).
QuantizedObservation observe(const ChannelMatrix& h, const PilotMatrix& pilots, double snr_db, Rng& rng);

/// Observation of sample `index` at snr_db, with noise drawn from the stream
/// keyed by (noise_seed, index, snr_db).
QuantizedObservation observe_sample(const ChannelMatrix& h, const PilotMatrix& pilots, double snr_db,
                                    std::uint64_t noise_seed, std::uint64_t index);

bool is_quantized(const Eigen::MatrixXcd& y);

}  // namespace onebit

#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "onebit/rng.hpp"

namespace onebit {

inline constexpr double kSpeedOfLight = 299792458.0;

using ChannelMatrix = Eigen::MatrixXcd;

/// Array/system dimensions and radio parameters. Defaults follow the indoor
/// 2.5 GHz setup with M = 64 base-station antennas and K = 32 users.
struct SystemConfig {
  int antennas = 64;      // M
  int users = 32;         // K
  int paths = 10;         // L
  int pilot_length = 8;   // tau
  double bandwidth_hz = 0.01e9;
  double carrier_hz = 2.5e9;
  std::optional<double> antenna_spacing_m;  // unset: half a carrier wavelength
  std::uint64_t seed = 0;

  // Parametric path sampler.
  double max_delay_s = 100e-9;
  double delay_spread_s = 20e-9;

  double wavelength() const { return kSpeedOfLight / carrier_hz; }
  double spacing() const { return antenna_spacing_m.value_or(wavelength() / 2.0); }
  /// k*d in the steering phase; pi at half-wavelength spacing.
  double wavenumber_times_spacing() const { return 2.0 * std::numbers::pi / wavelength() * spacing(); }

  void validate() const;
};

/// One propagation path of one user. Angles in radians, delay in seconds.
struct PathParams {
  double azi_aod = 0.0;
  double ele_aod = 0.0;
  double azi_aoa = 0.0;  // arrival angles are carried for completeness;
  double ele_aoa = 0.0;  // the base-station response does not use them
  double phase = 0.0;
  double power = 0.0;
  double delay = 0.0;
};

using UserPaths = std::vector<PathParams>;

/// Uniform-linear-array response: element m is exp(j * kd * m * sin(ele) * cos(azi)).
template <typename Scalar = double>
Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> steering_vector(Scalar ele_aod, Scalar azi_aod, int antennas,
                                                                       Scalar wavenumber_times_spacing) {
  if (antennas < 1) throw std::invalid_argument("steering_vector: antenna count must be >= 1");
  const Scalar spatial = wavenumber_times_spacing * std::sin(ele_aod) * std::cos(azi_aod);
  Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> a(antennas);
  for (int m = 0; m < antennas; ++m) a(m) = std::polar(Scalar(1), spatial * Scalar(m));
  return a;
}

/// Complex path gain sqrt(P/K) * exp(j(phi + 2*pi*k/K * delay * B)); user_index is 1-based.
template <typename Scalar = double>
std::complex<Scalar> path_gain(Scalar power, int users, Scalar phase, Scalar delay, Scalar bandwidth_hz,
                               int user_index) {
  if (power < 0) throw std::invalid_argument("path_gain: negative power");
  if (users < 1) throw std::invalid_argument("path_gain: user count must be >= 1");
  if (user_index < 1 || user_index > users) throw std::invalid_argument("path_gain: user index out of range");
  const Scalar angle = phase + Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(user_index) / Scalar(users) * delay *
                                   bandwidth_hz;
  return std::polar(std::sqrt(power / Scalar(users)), angle);
}

/// Sum over paths of gain * steering vector for one user (1-based user_index).
Eigen::VectorXcd channel_vector(const UserPaths& paths, const SystemConfig& config, int user_index);

/// Draws L paths for each of the K users. Ranges:
///   azi_aod, azi_aoa ~ U[-pi, pi];  ele_aod, ele_aoa ~ U[0, pi/2];  phase ~ U[-pi, pi];
///   delay ~ U[0, max_delay_s];  power proportional to exp(-delay / delay_spread_s),
///   normalized so each user's path powers sum to 1.
std::vector<UserPaths> sample_paths(const SystemConfig& config, Rng& rng);

/// Stacks one channel_vector per user into an M x K matrix.
ChannelMatrix channel_matrix(const std::vector<UserPaths>& users, const SystemConfig& config);

/// Draws sample `index` of the dataset defined by config.seed.
ChannelMatrix generate_channel(const SystemConfig& config, std::uint64_t index);

std::vector<ChannelMatrix> generate_dataset(const SystemConfig& config, int count);

}  // namespace onebit

#include "onebit/channel_model.hpp"

#include <cmath>
#include <string>

namespace onebit {

void SystemConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("SystemConfig: " + what);
  };
  require(antennas >= 1, "M must be >= 1");
  require(users >= 1, "K must be >= 1");
  require(paths >= 1, "L must be >= 1");
  require(pilot_length >= 1, "tau must be >= 1");
  require(bandwidth_hz > 0, "bandwidth_hz must be > 0");
  require(carrier_hz > 0, "carrier_hz must be > 0");
  require(spacing() > 0, "antenna_spacing_m must be > 0");
  require(max_delay_s >= 0, "max_delay_s must be >= 0");
  require(delay_spread_s > 0, "delay_spread_s must be > 0");
}

Eigen::VectorXcd channel_vector(const UserPaths& paths, const SystemConfig& config, int user_index) {
  if (paths.empty()) throw std::invalid_argument("channel_vector: empty path list");
  const double kd = config.wavenumber_times_spacing();
  Eigen::VectorXcd h = Eigen::VectorXcd::Zero(config.antennas);
  for (const auto& p : paths) {
    h += path_gain(p.power, config.users, p.phase, p.delay, config.bandwidth_hz, user_index) *
         steering_vector(p.ele_aod, p.azi_aod, config.antennas, kd);
  }
  return h;
}

std::vector<UserPaths> sample_paths(const SystemConfig& config, Rng& rng) {
  using std::numbers::pi;
  std::uniform_real_distribution<double> azimuth(-pi, pi);
  std::uniform_real_distribution<double> elevation(0.0, pi / 2);
  std::uniform_real_distribution<double> phase(-pi, pi);
  std::uniform_real_distribution<double> delay(0.0, config.max_delay_s);

  std::vector<UserPaths> users(config.users, UserPaths(config.paths));
  for (auto& paths : users) {
    double total = 0.0;
    for (auto& p : paths) {
      p.azi_aod = azimuth(rng);
      p.ele_aod = elevation(rng);
      p.azi_aoa = azimuth(rng);
      p.ele_aoa = elevation(rng);
      p.phase = phase(rng);
      p.delay = delay(rng);
      p.power = std::exp(-p.delay / config.delay_spread_s);
      total += p.power;
    }
    for (auto& p : paths) p.power /= total;
  }
  return users;
}

ChannelMatrix channel_matrix(const std::vector<UserPaths>& users, const SystemConfig& config) {
  if (static_cast<int>(users.size()) != config.users)
    throw std::invalid_argument("channel_matrix: expected one path list per user");
  ChannelMatrix H(config.antennas, config.users);
  for (int k = 0; k < config.users; ++k) H.col(k) = channel_vector(users[k], config, k + 1);
  return H;
}

ChannelMatrix generate_channel(const SystemConfig& config, std::uint64_t index) {
  Rng rng = make_rng(config.seed, {stream::kChannel, index});
  return channel_matrix(sample_paths(config, rng), config);
}

std::vector<ChannelMatrix> generate_dataset(const SystemConfig& config, int count) {
  config.validate();
  if (count < 1) throw std::invalid_argument("generate_dataset: count must be >= 1");
  std::vector<ChannelMatrix> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(generate_channel(config, static_cast<std::uint64_t>(i)));
  return out;
}

}  // namespace onebit

#include "onebit/dataset.hpp"

#include <cmath>
#include <stdexcept>

namespace onebit {

Split Split::make(int count, const SplitRatios& ratios) {
  if (count < 1) throw std::invalid_argument("Split: empty dataset");
  if (ratios.train < 0 || ratios.test < 0 || ratios.validation < 0 ||
      std::abs(ratios.train + ratios.test + ratios.validation - 1.0) > 1e-9)
    throw std::invalid_argument("Split: ratios must be non-negative and sum to 1");
  const int n_train = static_cast<int>(std::lround(ratios.train * count));
  const int n_test = std::min(count - n_train, static_cast<int>(std::lround(ratios.test * count)));
  Split s;
  s.train = {0, n_train};
  s.test = {n_train, n_train + n_test};
  s.validation = {n_train + n_test, count};
  return s;
}

PairedDataset PairedDataset::generate(const SystemConfig& config, int count, const SplitRatios& ratios,
                                      double pilot_power) {
  PairedDataset d;
  d.system = config;
  d.ratios = ratios;
  d.pilots = generate_pilots(config.users, config.pilot_length, pilot_power);
  d.channels = generate_dataset(config, count);
  (void)d.split();
  return d;
}

}  // namespace onebit

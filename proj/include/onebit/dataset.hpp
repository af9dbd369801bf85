#pragma once

#include <cstdint>
#include <vector>

#include "onebit/channel_model.hpp"
#include "onebit/forward_model.hpp"

namespace onebit {

/// Train/test/validation fractions; defaults 50/40/10.
struct SplitRatios {
  double train = 0.5;
  double test = 0.4;
  double validation = 0.1;
};

struct IndexRange {
  int begin = 0;
  int end = 0;
  int size() const { return end - begin; }
};

struct Split {
  IndexRange train, test, validation;
  static Split make(int count, const SplitRatios& ratios);
};

/// Ground-truth channels with the shared pilot matrix. Observations are not
/// stored: observation(i, snr) regenerates them from (seed, i, snr).
struct PairedDataset {
  SystemConfig system;
  PilotMatrix pilots;
  std::vector<ChannelMatrix> channels;
  SplitRatios ratios;

  int size() const { return static_cast<int>(channels.size()); }
  Split split() const { return Split::make(size(), ratios); }
  QuantizedObservation observation(int index, double snr_db) const {
    return observe_sample(channels.at(index), pilots, snr_db, system.seed, static_cast<std::uint64_t>(index));
  }

  static PairedDataset generate(const SystemConfig& config, int count, const SplitRatios& ratios = {},
                                double pilot_power = 1.0);
};

}  // namespace onebit

#pragma once

#include <string>
#include <vector>

#include "onebit/channel_model.hpp"
#include "onebit/forward_model.hpp"

namespace onebit {

/// Common contract of every channel estimator: deterministic, returns M x K.
class ChannelEstimator {
 public:
  virtual ~ChannelEstimator() = default;
  virtual std::string name() const = 0;
  /// snr_db is the operating point of the observation; learned estimators ignore it.
  virtual ChannelMatrix estimate(const QuantizedObservation& y, const PilotMatrix& pilots, double snr_db) const = 0;
  virtual std::vector<ChannelMatrix> estimate_all(const std::vector<QuantizedObservation>& ys,
                                                  const PilotMatrix& pilots, double snr_db) const {
    std::vector<ChannelMatrix> out;
    out.reserve(ys.size());
    for (const auto& y : ys) out.push_back(estimate(y, pilots, snr_db));
    return out;
  }
  virtual bool ready() const { return true; }
};

}  // namespace onebit

#pragma once

#include <map>
#include <string>
#include <vector>

#include "onebit/channel_model.hpp"
#include "onebit/dataset.hpp"
#include "onebit/estimator.hpp"

namespace onebit {

/// 10 log10( mean_n ||H_n - H_hat_n||^2 / ||H_n||^2 ), floored at 1e-12 inside the log.
double nmse_db(const std::vector<ChannelMatrix>& truth, const std::vector<ChannelMatrix>& estimates);

/// Per-sample normalized errors ||H - H_hat||^2 / ||H||^2.
std::vector<double> normalized_errors(const std::vector<ChannelMatrix>& truth,
                                      const std::vector<ChannelMatrix>& estimates);

struct SweepEntry {
  bool present = true;
  bool degenerate = false;
  double nmse_db = 0.0;
  double half_width_db = 0.0;  // ~95% confidence half-width (delta method)
  int samples = 0;
  double runtime_ms = 0.0;     // only filled when timing was requested
};

struct SweepPoint {
  std::string label;
  double snr_db = 0.0;
  int antennas = 0;
  int pilot_length = 0;
  std::map<std::string, SweepEntry> entries;
};

struct SweepResult {
  std::string axis;  // "snr_db" or "size"
  std::vector<std::string> methods;
  std::vector<SweepPoint> points;

  const SweepEntry& at(std::size_t point, const std::string& method) const;
  std::string to_json() const;
  std::string to_table() const;
  static SweepResult from_json(const std::string& text);
  bool operator==(const SweepResult&) const;
};

/// Evaluates one method on observations of `range` regenerated at snr_db.
SweepEntry evaluate_point(const ChannelEstimator& model, const PairedDataset& data, const IndexRange& range,
                          double snr_db, bool record_timing = false);

struct NamedEstimator {
  std::string name;
  const ChannelEstimator* model = nullptr;
};

/// NMSE of every method at every SNR over the test split.
SweepResult sweep_snr(const std::vector<NamedEstimator>& models, const PairedDataset& data,
                      const std::vector<double>& snr_list, bool record_timing = false);

/// One grid cell of the size sweep; absent models are reported, not fatal.
struct SizeCell {
  int antennas = 0;
  int pilot_length = 0;
  const PairedDataset* data = nullptr;
  std::vector<NamedEstimator> models;
};

SweepResult sweep_size(const std::vector<SizeCell>& cells, const std::vector<std::string>& methods, double snr_db);

struct BenchmarkResult {
  double median_ms = 0.0;
  double mean_ms = 0.0;
  double min_ms = 0.0;
  int repetitions = 0;
};

/// Median wall-clock time of single-sample estimate() calls after 5 warm-up calls.
BenchmarkResult benchmark_time(const ChannelEstimator& model, const PairedDataset& data, int repetitions,
                               double snr_db);

}  // namespace onebit

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "onebit/cgan.hpp"
#include "onebit/dataset.hpp"
#include "onebit/gamp.hpp"

namespace onebit {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Flat `key = value` text; '#' starts a comment. Later keys override earlier ones.
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Grid point of the size sweep, written "MxT" (e.g. "64x8").
struct SizeKey {
  int antennas = 0;
  int pilot_length = 0;
  std::string str() const { return std::to_string(antennas) + "x" + std::to_string(pilot_length); }
  static SizeKey parse(const std::string& text);
  auto operator<=>(const SizeKey&) const = default;
};

/// Everything one CLI invocation needs. Defaults match the indoor 64-antenna,
/// 32-user, 4200-sample setup.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  SystemConfig system;
  int dataset_count = 4200;
  SplitRatios split;
  double pilot_power = 1.0;
  std::filesystem::path dataset_dir = "data/default";
  std::filesystem::path out = "runs/default";

  ModelKind model_kind = ModelKind::cgan;
  GeneratorSpec generator;
  DiscriminatorSpec discriminator;
  MlpSpec mlp;
  TrainConfig train;
  GampConfig gamp;

  /// Trained model per method name, for evaluate / sweep-snr / benchmark / plot.
  std::map<std::string, std::filesystem::path> checkpoints;
  std::vector<std::string> methods{"cgan", "unet", "cnn", "mlp", "gamp"};
  std::vector<double> snr_db = default_snr_grid();
  double eval_snr_db = 10.0;

  std::vector<SizeKey> sizes;
  std::map<SizeKey, std::filesystem::path> size_datasets;
  std::map<std::pair<SizeKey, std::string>, std::filesystem::path> size_checkpoints;
  double size_snr_db = 10.0;

  int benchmark_repetitions = 100;
  int plot_sample = 0;  // index into the test split

  /// Builds from key-value text; throws ConfigError listing every unknown key.
  static ExperimentConfig from_text(const std::string& text);
  static ExperimentConfig from_file(const std::filesystem::path& path);

  /// Sets the global seed and everything derived from it.
  void set_seed(std::uint64_t s);
  ModelDescriptor descriptor(ModelKind kind) const;
  void validate() const;
};

}  // namespace onebit

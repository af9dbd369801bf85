#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "onebit/cgan.hpp"
#include "onebit/dataset.hpp"

namespace onebit {

struct PersistenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

// Array files: "OBARRAY\0", u32 version, u8 dtype, 3 pad bytes, u32 ndim,
// u64 dims[ndim], then row-major little-endian data.
enum class DType : std::uint8_t { f32 = 1, f64 = 2, c128 = 3 };

inline constexpr std::uint32_t kArrayFormatVersion = 1;

struct ArrayBlob {
  DType dtype = DType::f64;
  std::vector<std::uint64_t> shape;
  std::string data;  // raw element bytes
};

std::string encode_array(const ArrayBlob& blob);
ArrayBlob decode_array(std::string_view bytes);

/// [count, M, K] complex array.
ArrayBlob channels_to_blob(const std::vector<ChannelMatrix>& channels);
std::vector<ChannelMatrix> blob_to_channels(const ArrayBlob& blob);
ArrayBlob matrix_to_blob(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd blob_to_matrix(const ArrayBlob& blob);

std::string read_file(const std::filesystem::path& path);
/// Refuses to replace an existing file unless `overwrite` is set.
void write_file(const std::filesystem::path& path, std::string_view content, bool overwrite);

inline constexpr int kDatasetFormatVersion = 1;

struct DatasetManifest {
  int format_version = kDatasetFormatVersion;
  SystemConfig system;
  int count = 0;
  SplitRatios ratios;
  std::uint64_t seed = 0;
  double pilot_power = 1.0;
  std::map<std::string, std::string> digests;  // file name -> sha256

  std::string to_json() const;
  static DatasetManifest from_json(const std::string& text);
};

/// Writes channels.oba, pilots.oba and manifest.json into `dir`.
DatasetManifest save_dataset(const PairedDataset& data, const std::filesystem::path& dir, bool overwrite,
                             double pilot_power = 1.0);
/// Validates version and digests before decoding.
PairedDataset load_dataset(const std::filesystem::path& dir);
DatasetManifest read_manifest(const std::filesystem::path& dir);

inline constexpr int kCheckpointFormatVersion = 1;

/// Self-describing checkpoint: magic line, version, JSON header (architecture,
/// scale, metadata, tensor table), float32 payload, trailing SHA-256 of all
/// preceding bytes.
std::string encode_checkpoint(const TrainedEstimator& model);
TrainedEstimator decode_checkpoint(std::string_view bytes);

void save_checkpoint(const TrainedEstimator& model, const std::filesystem::path& path, bool overwrite);
TrainedEstimator load_checkpoint(const std::filesystem::path& path);

std::string system_config_json(const SystemConfig& config);
SystemConfig system_config_from_json(const std::string& text);

/// Epoch-by-epoch loss history as tab-separated text.
std::string history_table(const TrainingMetadata& metadata);

}  // namespace onebit

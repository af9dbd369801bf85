#include "onebit/persistence.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"

namespace onebit {

static_assert(std::endian::native == std::endian::little, "array files are little-endian");

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw PersistenceError("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

namespace {

constexpr char kArrayMagic[8] = {'O', 'B', 'A', 'R', 'R', 'A', 'Y', '\0'};
constexpr std::string_view kCheckpointMagic = "ONEBIT-CHECKPOINT\n";

template <typename T>
void put(std::string& out, T value) {
  out.append(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T take(std::string_view bytes, std::size_t& pos, const char* what) {
  if (pos + sizeof(T) > bytes.size()) throw PersistenceError(std::string("truncated ") + what);
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::size_t element_size(DType t) {
  switch (t) {
    case DType::f32: return 4;
    case DType::f64: return 8;
    case DType::c128: return 16;
  }
  throw PersistenceError("unknown dtype tag " + std::to_string(int(t)));
}

std::uint64_t element_count(const std::vector<std::uint64_t>& shape) {
  std::uint64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

}  // namespace

std::string encode_array(const ArrayBlob& blob) {
  if (blob.data.size() != element_count(blob.shape) * element_size(blob.dtype))
    throw PersistenceError("encode_array: data size does not match shape");
  std::string out(kArrayMagic, 8);
  put<std::uint32_t>(out, kArrayFormatVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(blob.dtype));
  out.append(3, '\0');
  put<std::uint32_t>(out, static_cast<std::uint32_t>(blob.shape.size()));
  for (auto d : blob.shape) put<std::uint64_t>(out, d);
  out += blob.data;
  return out;
}

ArrayBlob decode_array(std::string_view bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kArrayMagic, 8) != 0) throw PersistenceError("not an array file");
  std::size_t pos = 8;
  const auto version = take<std::uint32_t>(bytes, pos, "array header");
  if (version != kArrayFormatVersion) throw PersistenceError("unsupported array version " + std::to_string(version));
  ArrayBlob blob;
  blob.dtype = static_cast<DType>(take<std::uint8_t>(bytes, pos, "array header"));
  pos += 3;
  const auto ndim = take<std::uint32_t>(bytes, pos, "array header");
  if (ndim > 16) throw PersistenceError("implausible array rank " + std::to_string(ndim));
  for (std::uint32_t i = 0; i < ndim; ++i) blob.shape.push_back(take<std::uint64_t>(bytes, pos, "array shape"));
  const std::uint64_t n = element_count(blob.shape) * element_size(blob.dtype);
  if (bytes.size() - pos != n) throw PersistenceError("array payload size does not match its shape");
  blob.data.assign(bytes.substr(pos));
  return blob;
}

ArrayBlob channels_to_blob(const std::vector<ChannelMatrix>& channels) {
  ArrayBlob blob;
  blob.dtype = DType::c128;
  const std::uint64_t M = channels.empty() ? 0 : channels[0].rows(), K = channels.empty() ? 0 : channels[0].cols();
  blob.shape = {channels.size(), M, K};
  blob.data.reserve(channels.size() * M * K * 16);
  for (const auto& h : channels) {
    if (std::uint64_t(h.rows()) != M || std::uint64_t(h.cols()) != K)
      throw PersistenceError("channels_to_blob: inconsistent channel shapes");
    const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> r = h;
    blob.data.append(reinterpret_cast<const char*>(r.data()), r.size() * 16);
  }
  return blob;
}

std::vector<ChannelMatrix> blob_to_channels(const ArrayBlob& blob) {
  if (blob.dtype != DType::c128 || blob.shape.size() != 3) throw PersistenceError("expected a [count, M, K] complex array");
  const auto N = blob.shape[0], M = blob.shape[1], K = blob.shape[2];
  std::vector<ChannelMatrix> out;
  out.reserve(N);
  const auto* base = reinterpret_cast<const std::complex<double>*>(blob.data.data());
  for (std::uint64_t n = 0; n < N; ++n) {
    Eigen::Map<const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> r(
        base + n * M * K, M, K);
    out.emplace_back(r);
  }
  return out;
}

ArrayBlob matrix_to_blob(const Eigen::MatrixXcd& m) {
  ArrayBlob blob;
  blob.dtype = DType::c128;
  blob.shape = {std::uint64_t(m.rows()), std::uint64_t(m.cols())};
  const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> r = m;
  blob.data.assign(reinterpret_cast<const char*>(r.data()), r.size() * 16);
  return blob;
}

Eigen::MatrixXcd blob_to_matrix(const ArrayBlob& blob) {
  if (blob.dtype != DType::c128 || blob.shape.size() != 2) throw PersistenceError("expected a 2-d complex array");
  Eigen::Map<const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> r(
      reinterpret_cast<const std::complex<double>*>(blob.data.data()), blob.shape[0], blob.shape[1]);
  return r;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistenceError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, std::string_view content, bool overwrite) {
  if (fs::exists(path) && !overwrite)
    throw PersistenceError(path.string() + " already exists (use --overwrite to replace it)");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PersistenceError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw PersistenceError("write failed for " + path.string());
}

namespace {

Json system_to_json(const SystemConfig& c) {
  Json j;
  j["antennas"] = c.antennas;
  j["users"] = c.users;
  j["paths"] = c.paths;
  j["pilot_length"] = c.pilot_length;
  j["bandwidth_hz"] = c.bandwidth_hz;
  j["carrier_hz"] = c.carrier_hz;
  j["antenna_spacing_m"] = c.antenna_spacing_m ? Json(*c.antenna_spacing_m) : Json(nullptr);
  j["seed"] = c.seed;
  j["max_delay_s"] = c.max_delay_s;
  j["delay_spread_s"] = c.delay_spread_s;
  return j;
}

SystemConfig system_from_json(const Json& j) {
  SystemConfig c;
  c.antennas = j.at("antennas");
  c.users = j.at("users");
  c.paths = j.at("paths");
  c.pilot_length = j.at("pilot_length");
  c.bandwidth_hz = j.at("bandwidth_hz");
  c.carrier_hz = j.at("carrier_hz");
  if (!j.at("antenna_spacing_m").is_null()) c.antenna_spacing_m = j.at("antenna_spacing_m").get<double>();
  c.seed = j.at("seed");
  c.max_delay_s = j.at("max_delay_s");
  c.delay_spread_s = j.at("delay_spread_s");
  c.validate();
  return c;
}

Json descriptor_to_json(const ModelDescriptor& d) {
  Json j;
  j["kind"] = to_string(d.kind);
  j["dims"] = {{"antennas", d.dims.antennas}, {"users", d.dims.users}, {"pilot_length", d.dims.pilot_length}};
  const auto& g = d.generator;
  j["generator"] = {{"base_filters", g.base_filters},     {"kernel_h", g.kernel_h},
                    {"kernel_w", g.kernel_w},             {"encoder_blocks", g.encoder_blocks},
                    {"decoder_blocks", g.decoder_blocks}, {"leaky_slope", g.leaky_slope},
                    {"skip_connections", g.skip_connections}};
  const auto& s = d.discriminator;
  j["discriminator"] = {{"filters", s.filters},
                        {"kernel_h", s.kernel_h},
                        {"kernel_w", s.kernel_w},
                        {"encoder_blocks", s.encoder_blocks},
                        {"strided_convolutions", s.strided_convolutions},
                        {"leaky_slope", s.leaky_slope}};
  j["mlp"] = {{"layers", d.mlp.layers}, {"hidden", d.mlp.hidden}, {"leaky_slope", d.mlp.leaky_slope}};
  return j;
}

ModelDescriptor descriptor_from_json(const Json& j) {
  ModelDescriptor d;
  d.kind = parse_model_kind(j.at("kind"));
  d.dims.antennas = j.at("dims").at("antennas");
  d.dims.users = j.at("dims").at("users");
  d.dims.pilot_length = j.at("dims").at("pilot_length");
  const auto& g = j.at("generator");
  d.generator.base_filters = g.at("base_filters");
  d.generator.kernel_h = g.at("kernel_h");
  d.generator.kernel_w = g.at("kernel_w");
  d.generator.encoder_blocks = g.at("encoder_blocks");
  d.generator.decoder_blocks = g.at("decoder_blocks");
  d.generator.leaky_slope = g.at("leaky_slope");
  d.generator.skip_connections = g.at("skip_connections");
  const auto& s = j.at("discriminator");
  d.discriminator.filters = s.at("filters");
  d.discriminator.kernel_h = s.at("kernel_h");
  d.discriminator.kernel_w = s.at("kernel_w");
  d.discriminator.encoder_blocks = s.at("encoder_blocks");
  d.discriminator.strided_convolutions = s.at("strided_convolutions");
  d.discriminator.leaky_slope = s.at("leaky_slope");
  d.mlp.layers = j.at("mlp").at("layers");
  d.mlp.hidden = j.at("mlp").at("hidden");
  d.mlp.leaky_slope = j.at("mlp").at("leaky_slope");
  return d;
}

Json metadata_to_json(const TrainingMetadata& m) {
  Json j;
  j["config_hash"] = m.config_hash;
  j["epochs_run"] = m.epochs_run;
  j["selected_epoch"] = m.selected_epoch;
  Json h = Json::array();
  for (const auto& r : m.history)
    h.push_back({{"epoch", r.epoch},
                 {"generator_gan_loss", r.generator_gan_loss},
                 {"discriminator_loss", r.discriminator_loss},
                 {"gan_objective", r.gan_objective},
                 {"l2_loss", r.l2_loss},
                 {"validation_nmse_db", r.validation_nmse_db},
                 {"output_min", r.output_min},
                 {"output_max", r.output_max}});
  j["history"] = h;
  return j;
}

double number_or_nan(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

TrainingMetadata metadata_from_json(const Json& j) {
  TrainingMetadata m;
  m.config_hash = j.at("config_hash");
  m.epochs_run = j.at("epochs_run");
  m.selected_epoch = j.at("selected_epoch");
  for (const auto& r : j.at("history")) {
    EpochRecord e;
    e.epoch = r.at("epoch");
    e.generator_gan_loss = number_or_nan(r.at("generator_gan_loss"));
    e.discriminator_loss = number_or_nan(r.at("discriminator_loss"));
    e.gan_objective = number_or_nan(r.at("gan_objective"));
    e.l2_loss = number_or_nan(r.at("l2_loss"));
    e.validation_nmse_db = number_or_nan(r.at("validation_nmse_db"));
    e.output_min = number_or_nan(r.at("output_min"));
    e.output_max = number_or_nan(r.at("output_max"));
    m.history.push_back(e);
  }
  return m;
}

void append_floats(std::string& payload, const nn::Mat<float>& m) {
  payload.append(reinterpret_cast<const char*>(m.data()), m.size() * sizeof(float));
}

}  // namespace

std::string system_config_json(const SystemConfig& config) { return system_to_json(config).dump(2); }

SystemConfig system_config_from_json(const std::string& text) { return system_from_json(Json::parse(text)); }

std::string DatasetManifest::to_json() const {
  Json j;
  j["format"] = "onebit-dataset";
  j["format_version"] = format_version;
  j["system"] = system_to_json(system);
  j["count"] = count;
  j["split"] = {{"train", ratios.train}, {"test", ratios.test}, {"validation", ratios.validation}};
  j["seed"] = seed;
  j["pilot_power"] = pilot_power;
  j["digests"] = digests;
  return j.dump(2) + "\n";
}

DatasetManifest DatasetManifest::from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw PersistenceError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "onebit-dataset") throw PersistenceError("manifest has the wrong format tag");
  DatasetManifest m;
  m.format_version = j.at("format_version");
  if (m.format_version != kDatasetFormatVersion)
    throw PersistenceError("unsupported dataset version " + std::to_string(m.format_version));
  m.system = system_from_json(j.at("system"));
  m.count = j.at("count");
  m.ratios = {j.at("split").at("train"), j.at("split").at("test"), j.at("split").at("validation")};
  if (std::abs(m.ratios.train + m.ratios.test + m.ratios.validation - 1.0) > 1e-9)
    throw PersistenceError("manifest split ratios do not sum to 1");
  m.seed = j.at("seed");
  m.pilot_power = j.at("pilot_power");
  m.digests = j.at("digests").get<std::map<std::string, std::string>>();
  return m;
}

DatasetManifest save_dataset(const PairedDataset& data, const fs::path& dir, bool overwrite, double pilot_power) {
  if (fs::exists(dir) && !overwrite)
    throw PersistenceError(dir.string() + " already exists (use --overwrite to replace it)");
  fs::create_directories(dir);
  const std::string channels = encode_array(channels_to_blob(data.channels));
  const std::string pilots = encode_array(matrix_to_blob(data.pilots));
  DatasetManifest m;
  m.system = data.system;
  m.count = data.size();
  m.ratios = data.ratios;
  m.seed = data.system.seed;
  m.pilot_power = pilot_power;
  m.digests["channels.oba"] = sha256_hex(channels);
  m.digests["pilots.oba"] = sha256_hex(pilots);
  write_file(dir / "channels.oba", channels, true);
  write_file(dir / "pilots.oba", pilots, true);
  write_file(dir / "manifest.json", m.to_json(), true);
  return m;
}

DatasetManifest read_manifest(const fs::path& dir) {
  if (!fs::exists(dir / "manifest.json")) throw PersistenceError("no dataset manifest at " + (dir / "manifest.json").string());
  return DatasetManifest::from_json(read_file(dir / "manifest.json"));
}

PairedDataset load_dataset(const fs::path& dir) {
  const DatasetManifest m = read_manifest(dir);
  auto checked = [&](const std::string& name) {
    const std::string bytes = read_file(dir / name);
    const auto it = m.digests.find(name);
    if (it == m.digests.end()) throw PersistenceError("manifest has no digest for " + name);
    if (sha256_hex(bytes) != it->second) throw PersistenceError("digest mismatch for " + (dir / name).string());
    return decode_array(bytes);
  };
  PairedDataset d;
  d.system = m.system;
  d.ratios = m.ratios;
  d.channels = blob_to_channels(checked("channels.oba"));
  d.pilots = blob_to_matrix(checked("pilots.oba"));
  if (d.size() != m.count) throw PersistenceError("dataset count does not match manifest");
  if (d.pilots.rows() != m.system.users || d.pilots.cols() != m.system.pilot_length)
    throw PersistenceError("pilot matrix shape does not match manifest");
  if (!d.channels.empty() && (d.channels[0].rows() != m.system.antennas || d.channels[0].cols() != m.system.users))
    throw PersistenceError("channel shape does not match manifest");
  return d;
}

std::string encode_checkpoint(const TrainedEstimator& model) {
  auto& net = const_cast<ChannelNetwork<float>&>(model.network());
  std::string payload;
  Json tensors = Json::array();
  for (const auto* p : net.parameters()) {
    tensors.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()},
                       {"offset", payload.size()}});
    append_floats(payload, p->value);
  }
  Json disc = Json::array();
  if (model.discriminator_weights()) {
    int i = 0;
    for (const auto& w : *model.discriminator_weights()) {
      disc.push_back({{"name", "disc." + std::to_string(i++)}, {"rows", w.rows()}, {"cols", w.cols()},
                      {"offset", payload.size()}});
      append_floats(payload, w);
    }
  }
  Json header;
  header["format"] = "onebit-checkpoint";
  header["format_version"] = kCheckpointFormatVersion;
  header["descriptor"] = descriptor_to_json(model.descriptor());
  header["scale"] = model.scale().value;
  header["metadata"] = metadata_to_json(model.metadata());
  header["tensors"] = tensors;
  header["discriminator_tensors"] = model.discriminator_weights() ? disc : Json(nullptr);
  header["payload_bytes"] = payload.size();
  header["payload_sha256"] = sha256_hex(payload);
  const std::string h = header.dump();

  std::string out(kCheckpointMagic);
  put<std::uint32_t>(out, kCheckpointFormatVersion);
  put<std::uint64_t>(out, h.size());
  out += h;
  out += payload;
  out += sha256_hex(out);
  return out;
}

TrainedEstimator decode_checkpoint(std::string_view bytes) {
  if (!bytes.starts_with(kCheckpointMagic)) throw PersistenceError("not a checkpoint file");
  if (bytes.size() < kCheckpointMagic.size() + 12 + 64) throw PersistenceError("truncated checkpoint");
  const std::string_view body = bytes.substr(0, bytes.size() - 64);
  if (sha256_hex(body) != bytes.substr(bytes.size() - 64)) throw PersistenceError("checkpoint digest mismatch");
  std::size_t pos = kCheckpointMagic.size();
  const auto version = take<std::uint32_t>(body, pos, "checkpoint header");
  if (version != kCheckpointFormatVersion)
    throw PersistenceError("unsupported checkpoint version " + std::to_string(version));
  const auto hlen = take<std::uint64_t>(body, pos, "checkpoint header");
  if (pos + hlen > body.size()) throw PersistenceError("truncated checkpoint header");
  const Json header = Json::parse(body.substr(pos, hlen));
  pos += hlen;
  const std::string_view payload = body.substr(pos);
  if (payload.size() != header.at("payload_bytes").get<std::size_t>() ||
      sha256_hex(payload) != header.at("payload_sha256").get<std::string>())
    throw PersistenceError("checkpoint payload digest mismatch");

  TrainedEstimator model(descriptor_from_json(header.at("descriptor")), NormalizationScale{header.at("scale")});
  model.metadata() = metadata_from_json(header.at("metadata"));
  auto read_tensor = [&](const Json& t, nn::Mat<float>& m) {
    const auto rows = t.at("rows").get<Eigen::Index>(), cols = t.at("cols").get<Eigen::Index>();
    const auto off = t.at("offset").get<std::size_t>();
    if (off + std::size_t(rows * cols) * sizeof(float) > payload.size())
      throw PersistenceError("tensor " + t.at("name").get<std::string>() + " runs past the payload");
    m.resize(rows, cols);
    std::memcpy(m.data(), payload.data() + off, m.size() * sizeof(float));
  };
  auto params = model.network().parameters();
  const auto& tensors = header.at("tensors");
  if (tensors.size() != params.size()) throw PersistenceError("checkpoint tensor count does not match architecture");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& t = tensors[i];
    if (t.at("name") != params[i]->name || t.at("rows") != params[i]->value.rows() ||
        t.at("cols") != params[i]->value.cols())
      throw PersistenceError("checkpoint tensor " + t.at("name").get<std::string>() + " does not match architecture");
    read_tensor(t, params[i]->value);
  }
  if (!header.at("discriminator_tensors").is_null()) {
    std::vector<nn::Mat<float>> disc;
    for (const auto& t : header.at("discriminator_tensors")) read_tensor(t, disc.emplace_back());
    model.discriminator_weights() = std::move(disc);
  }
  return model;
}

void save_checkpoint(const TrainedEstimator& model, const fs::path& path, bool overwrite) {
  write_file(path, encode_checkpoint(model), overwrite);
}

TrainedEstimator load_checkpoint(const fs::path& path) {
  if (!fs::exists(path)) throw PersistenceError("checkpoint not found: " + path.string());
  return decode_checkpoint(read_file(path));
}

std::string history_table(const TrainingMetadata& metadata) {
  std::ostringstream os;
  os << "epoch\tgenerator_gan_loss\tdiscriminator_loss\tgan_objective\tl2_loss\tvalidation_nmse_db\toutput_min\toutput_"
        "max\n";
  os << std::setprecision(9);
  for (const auto& r : metadata.history)
    os << r.epoch << '\t' << r.generator_gan_loss << '\t' << r.discriminator_loss << '\t' << r.gan_objective << '\t'
       << r.l2_loss << '\t' << r.validation_nmse_db << '\t' << r.output_min << '\t' << r.output_max << '\n';
  return os.str();
}

}  // namespace onebit

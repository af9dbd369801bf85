#include "onebit/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace onebit {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  if (v == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) { return static_cast<int>(to_integer(key, v)); }

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  using C = ExperimentConfig;
  using S = const std::string&;
  static const std::map<std::string, Setter> table{
      {"seed", [](C& c, S k, S v) { c.set_seed(to_u64(k, v)); }},
      {"out", [](C& c, S, S v) { c.out = v; }},

      {"system.antennas", [](C& c, S k, S v) { c.system.antennas = to_int(k, v); }},
      {"system.users", [](C& c, S k, S v) { c.system.users = to_int(k, v); }},
      {"system.paths", [](C& c, S k, S v) { c.system.paths = to_int(k, v); }},
      {"system.pilot_length", [](C& c, S k, S v) { c.system.pilot_length = to_int(k, v); }},
      {"system.bandwidth_hz", [](C& c, S k, S v) { c.system.bandwidth_hz = to_double(k, v); }},
      {"system.carrier_hz", [](C& c, S k, S v) { c.system.carrier_hz = to_double(k, v); }},
      {"system.antenna_spacing_m", [](C& c, S k, S v) { c.system.antenna_spacing_m = to_double(k, v); }},
      {"system.max_delay_s", [](C& c, S k, S v) { c.system.max_delay_s = to_double(k, v); }},
      {"system.delay_spread_s", [](C& c, S k, S v) { c.system.delay_spread_s = to_double(k, v); }},
      {"system.seed", [](C& c, S k, S v) { c.system.seed = to_u64(k, v); }},

      {"dataset.count", [](C& c, S k, S v) { c.dataset_count = to_int(k, v); }},
      {"dataset.dir", [](C& c, S, S v) { c.dataset_dir = v; }},
      {"dataset.pilot_power", [](C& c, S k, S v) { c.pilot_power = to_double(k, v); }},
      {"dataset.split_train", [](C& c, S k, S v) { c.split.train = to_double(k, v); }},
      {"dataset.split_test", [](C& c, S k, S v) { c.split.test = to_double(k, v); }},
      {"dataset.split_validation", [](C& c, S k, S v) { c.split.validation = to_double(k, v); }},

      {"model.kind", [](C& c, S, S v) { c.model_kind = parse_model_kind(v); }},

      {"generator.base_filters", [](C& c, S k, S v) { c.generator.base_filters = to_int(k, v); }},
      {"generator.kernel_h", [](C& c, S k, S v) { c.generator.kernel_h = to_int(k, v); }},
      {"generator.kernel_w", [](C& c, S k, S v) { c.generator.kernel_w = to_int(k, v); }},
      {"generator.encoder_blocks", [](C& c, S k, S v) { c.generator.encoder_blocks = to_int(k, v); }},
      {"generator.decoder_blocks", [](C& c, S k, S v) { c.generator.decoder_blocks = to_int(k, v); }},
      {"generator.leaky_slope", [](C& c, S k, S v) { c.generator.leaky_slope = to_double(k, v); }},

      {"discriminator.filters", [](C& c, S k, S v) { c.discriminator.filters = to_int(k, v); }},
      {"discriminator.kernel_h", [](C& c, S k, S v) { c.discriminator.kernel_h = to_int(k, v); }},
      {"discriminator.kernel_w", [](C& c, S k, S v) { c.discriminator.kernel_w = to_int(k, v); }},
      {"discriminator.encoder_blocks", [](C& c, S k, S v) { c.discriminator.encoder_blocks = to_int(k, v); }},
      {"discriminator.strided_convolutions",
       [](C& c, S k, S v) { c.discriminator.strided_convolutions = to_int(k, v); }},
      {"discriminator.leaky_slope", [](C& c, S k, S v) { c.discriminator.leaky_slope = to_double(k, v); }},

      {"mlp.layers", [](C& c, S k, S v) { c.mlp.layers = to_int(k, v); }},
      {"mlp.hidden", [](C& c, S k, S v) { c.mlp.hidden = to_int(k, v); }},
      {"mlp.leaky_slope", [](C& c, S k, S v) { c.mlp.leaky_slope = to_double(k, v); }},

      {"train.seed", [](C& c, S k, S v) { c.train.seed = to_u64(k, v); }},
      {"train.lr_generator", [](C& c, S k, S v) { c.train.lr_generator = to_double(k, v); }},
      {"train.lr_discriminator", [](C& c, S k, S v) { c.train.lr_discriminator = to_double(k, v); }},
      {"train.rmsprop_rho", [](C& c, S k, S v) { c.train.rmsprop_rho = to_double(k, v); }},
      {"train.rmsprop_eps", [](C& c, S k, S v) { c.train.rmsprop_eps = to_double(k, v); }},
      {"train.batch_size", [](C& c, S k, S v) { c.train.batch_size = to_int(k, v); }},
      {"train.epochs", [](C& c, S k, S v) { c.train.epochs = to_int(k, v); }},
      {"train.l2_weight", [](C& c, S k, S v) { c.train.l2_weight = to_double(k, v); }},
      {"train.generator_loss_mode",
       [](C& c, S, S v) { c.train.generator_loss_mode = parse_generator_loss_mode(v); }},
      {"train.snr_db", [](C& c, S k, S v) { c.train.train_snr_db = to_doubles(k, v); }},
      {"train.keep_best_validation", [](C& c, S k, S v) { c.train.keep_best_validation = to_bool(k, v); }},

      {"gamp.max_iterations", [](C& c, S k, S v) { c.gamp.max_iterations = to_int(k, v); }},
      {"gamp.damping", [](C& c, S k, S v) { c.gamp.damping = to_double(k, v); }},
      {"gamp.mixture_components", [](C& c, S k, S v) { c.gamp.mixture_components = to_int(k, v); }},
      {"gamp.em_iterations", [](C& c, S k, S v) { c.gamp.em_iterations = to_int(k, v); }},
      {"gamp.tolerance", [](C& c, S k, S v) { c.gamp.tolerance = to_double(k, v); }},
      {"gamp.prior_variance", [](C& c, S k, S v) { c.gamp.prior_variance = to_double(k, v); }},

      {"eval.methods", [](C& c, S, S v) { c.methods = split_list(v); }},
      {"eval.snr_db", [](C& c, S k, S v) { c.eval_snr_db = to_double(k, v); }},
      {"sweep.snr_db", [](C& c, S k, S v) { c.snr_db = to_doubles(k, v); }},
      {"sweep.sizes",
       [](C& c, S, S v) {
         c.sizes.clear();
         for (const auto& s : split_list(v)) c.sizes.push_back(SizeKey::parse(s));
       }},
      {"sweep.size_snr_db", [](C& c, S k, S v) { c.size_snr_db = to_double(k, v); }},
      {"benchmark.repetitions", [](C& c, S k, S v) { c.benchmark_repetitions = to_int(k, v); }},
      {"plot.sample", [](C& c, S k, S v) { c.plot_sample = to_int(k, v); }},
  };
  return table;
}

bool is_method(const std::string& m) { return m == "gamp" || m == "cgan" || m == "unet" || m == "cnn" || m == "mlp"; }

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

SizeKey SizeKey::parse(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw ConfigError("size '" + text + "' is not of the form MxT");
  return {to_int(text, text.substr(0, x)), to_int(text, text.substr(x + 1))};
}

void ExperimentConfig::set_seed(std::uint64_t s) {
  seed = s;
  system.seed = s;
  train.seed = s;
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  auto kv = parse_key_values(text);
  ExperimentConfig c;
  // the global seed first so that system.seed / train.seed can override it
  if (auto it = kv.find("seed"); it != kv.end()) {
    c.set_seed(to_u64("seed", it->second));
    kv.erase(it);
  }
  std::vector<std::string> unknown;
  for (const auto& [key, value] : kv) {
    if (auto it = setters().find(key); it != setters().end()) {
      it->second(c, key, value);
      continue;
    }
    if (key.starts_with("dataset.") && key.find('x') != std::string::npos && key.find('.', 8) == std::string::npos) {
      c.size_datasets[SizeKey::parse(key.substr(8))] = value;
      continue;
    }
    if (key.starts_with("checkpoint.")) {
      const std::string rest = key.substr(11);
      const auto dot = rest.find('.');
      if (dot == std::string::npos && is_method(rest)) {
        c.checkpoints[rest] = value;
        continue;
      }
      if (dot != std::string::npos && is_method(rest.substr(dot + 1))) {
        c.size_checkpoints[{SizeKey::parse(rest.substr(0, dot)), rest.substr(dot + 1)}] = value;
        continue;
      }
    }
    unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return from_text(os.str());
}

ModelDescriptor ExperimentConfig::descriptor(ModelKind kind) const {
  ModelDescriptor d;
  d.kind = kind;
  d.dims = {system.antennas, system.users, system.pilot_length};
  d.generator = generator;
  d.generator.skip_connections = kind != ModelKind::cnn;
  d.discriminator = discriminator;
  d.mlp = mlp;
  return d;
}

void ExperimentConfig::validate() const {
  system.validate();
  if (dataset_count < 1) throw ConfigError("dataset.count must be >= 1");
  if (std::abs(split.train + split.test + split.validation - 1.0) > 1e-9)
    throw ConfigError("dataset split ratios must sum to 1");
  if (split.train < 0 || split.test < 0 || split.validation < 0) throw ConfigError("dataset split ratios must be >= 0");
  if (!(pilot_power > 0)) throw ConfigError("dataset.pilot_power must be > 0");
  train.validate();
  gamp.validate();
  for (const auto& m : methods)
    if (!is_method(m)) throw ConfigError("eval.methods: unknown method '" + m + "'");
  if (benchmark_repetitions < 10) throw ConfigError("benchmark.repetitions must be >= 10");
}

}  // namespace onebit

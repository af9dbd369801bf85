// onebit: dataset generation, training, evaluation and plotting for one-bit
// massive MIMO channel estimation.

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "onebit/baselines.hpp"
#include "onebit/config.hpp"
#include "onebit/evaluation.hpp"
#include "onebit/persistence.hpp"
#include "onebit/plot.hpp"

namespace fs = std::filesystem;
using namespace onebit;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool overwrite = false;
  std::string model_kind;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "key = value experiment config");
  cmd->add_option("--seed", o.seed, "global seed (dataset and training)");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_flag("--overwrite", o.overwrite, "replace existing outputs");
  cmd->add_option("--model-kind", o.model_kind, "cgan | unet | cnn | mlp");
}

/// Any invalid value in the config or on the command line is a usage error.
ExperimentConfig load_config(const CommonOptions& o) {
  try {
    ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : ExperimentConfig::from_file(o.config);
    if (o.seed) c.set_seed(*o.seed);
    if (!o.out.empty()) c.out = o.out;
    if (!o.model_kind.empty()) c.model_kind = parse_model_kind(o.model_kind);
    c.validate();
    return c;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

fs::path checkpoint_path(const ExperimentConfig& c, const std::string& method) {
  if (auto it = c.checkpoints.find(method); it != c.checkpoints.end()) return it->second;
  return c.out / (method + ".ckpt");
}

/// Loaded estimators kept alive for the duration of a command.
struct ModelSet {
  std::vector<std::unique_ptr<ChannelEstimator>> owned;
  std::vector<NamedEstimator> named;

  void add(const std::string& name, std::unique_ptr<ChannelEstimator> m) {
    named.push_back({name, m.get()});
    owned.push_back(std::move(m));
  }
};

std::unique_ptr<ChannelEstimator> load_method(const std::string& method, const fs::path& ckpt, const GampConfig& gamp,
                                              const Dims& dims) {
  if (method == "gamp") return std::make_unique<GampEstimator>(gamp);
  auto model = std::make_unique<TrainedEstimator>(load_checkpoint(ckpt));
  if (model->descriptor().kind != parse_model_kind(method))
    throw PersistenceError(ckpt.string() + " holds a " + to_string(model->descriptor().kind) + " model, expected " +
                           method);
  if (!(model->descriptor().dims == dims))
    throw PersistenceError(ckpt.string() + " was trained for different dimensions than the dataset");
  return model;
}

ModelSet load_models(const ExperimentConfig& c, const Dims& dims) {
  ModelSet set;
  for (const auto& m : c.methods) set.add(m, load_method(m, checkpoint_path(c, m), c.gamp, dims));
  return set;
}

Dims dims_of(const PairedDataset& d) { return {d.system.antennas, d.system.users, d.system.pilot_length}; }

void write_sweep(const SweepResult& r, const ExperimentConfig& c, const std::string& stem, bool overwrite) {
  write_file(c.out / (stem + ".json"), r.to_json(), overwrite);
  write_file(c.out / (stem + ".tsv"), r.to_table(), overwrite);
  std::cout << r.to_table();
}

int cmd_generate(const CommonOptions& o) {
  ExperimentConfig c = load_config(o);
  const fs::path dir = o.out.empty() ? c.dataset_dir : fs::path(o.out);
  const PairedDataset data = PairedDataset::generate(c.system, c.dataset_count, c.split, c.pilot_power);
  const DatasetManifest m = save_dataset(data, dir, o.overwrite, c.pilot_power);
  const Split s = data.split();
  std::cout << "wrote " << m.count << " samples (M=" << c.system.antennas << ", K=" << c.system.users
            << ", tau=" << c.system.pilot_length << ") to " << dir.string() << "\n"
            << "split train/test/validation: " << s.train.size() << "/" << s.test.size() << "/"
            << s.validation.size() << "\n";
  for (const auto& [name, digest] : m.digests) std::cout << name << " sha256 " << digest << "\n";
  return 0;
}

int cmd_train(const CommonOptions& o) {
  ExperimentConfig c = load_config(o);
  const PairedDataset data = load_dataset(c.dataset_dir);
  const ModelDescriptor d = c.descriptor(c.model_kind);
  const fs::path ckpt = checkpoint_path(c, to_string(c.model_kind));
  if (fs::exists(ckpt) && !o.overwrite)
    throw PersistenceError(ckpt.string() + " already exists (use --overwrite to replace it)");
  const bool adversarial = c.model_kind == ModelKind::cgan;
  TrainedEstimator model = train(data, d, c.train, [&](const EpochRecord& r) {
    std::cerr << "epoch " << r.epoch << "/" << c.train.epochs << "  l2 " << std::setprecision(5) << r.l2_loss;
    if (adversarial) std::cerr << "  g_gan " << r.generator_gan_loss << "  d_loss " << r.discriminator_loss;
    std::cerr << "  val_nmse_db " << r.validation_nmse_db << "\n";
  });
  save_checkpoint(model, ckpt, o.overwrite);
  write_file(c.out / (to_string(c.model_kind) + "_history.tsv"), history_table(model.metadata()), o.overwrite);
  const auto& h = model.metadata().history;
  std::cout << "checkpoint " << ckpt.string() << "\n"
            << "selected epoch " << model.metadata().selected_epoch << " of " << model.metadata().epochs_run << "\n"
            << "validation NMSE " << std::setprecision(6) << h[model.metadata().selected_epoch - 1].validation_nmse_db
            << " dB\n";
  return 0;
}

int cmd_evaluate(const CommonOptions& o) {
  ExperimentConfig c = load_config(o);
  const PairedDataset data = load_dataset(c.dataset_dir);
  const ModelSet models = load_models(c, dims_of(data));
  write_sweep(sweep_snr(models.named, data, {c.eval_snr_db}), c, "evaluate", o.overwrite);
  return 0;
}

int cmd_sweep_snr(const CommonOptions& o) {
  ExperimentConfig c = load_config(o);
  const PairedDataset data = load_dataset(c.dataset_dir);
  const ModelSet models = load_models(c, dims_of(data));
  write_sweep(sweep_snr(models.named, data, c.snr_db), c, "sweep_snr", o.overwrite);
  return 0;
}

int cmd_sweep_size(const CommonOptions& o) {
  ExperimentConfig c = load_config(o);
  if (c.sizes.empty()) throw ConfigError("sweep-size needs sweep.sizes (e.g. 64x8, 256x8)");
  std::vector<PairedDataset> datasets;
  datasets.reserve(c.sizes.size());
  std::vector<ModelSet> sets(c.sizes.size());
  std::vector<SizeCell> cells;
  for (std::size_t i = 0; i < c.sizes.size(); ++i) {
    const SizeKey key = c.sizes[i];
    const auto ds = c.size_datasets.find(key);
    if (ds == c.size_datasets.end()) throw ConfigError("no dataset." + key.str() + " entry for size " + key.str());
    datasets.push_back(load_dataset(ds->second));
    const PairedDataset& data = datasets.back();
    if (data.system.antennas != key.antennas || data.system.pilot_length != key.pilot_length)
      throw ConfigError("dataset." + key.str() + " holds a " + std::to_string(data.system.antennas) + "x" +
                        std::to_string(data.system.pilot_length) + " dataset");
    for (const auto& m : c.methods) {
      if (m == "gamp") {
        sets[i].add(m, std::make_unique<GampEstimator>(c.gamp));
        continue;
      }
      const auto ck = c.size_checkpoints.find({key, m});
      if (ck == c.size_checkpoints.end()) continue;  // reported as absent
      sets[i].add(m, load_method(m, ck->second, c.gamp, dims_of(data)));
    }
    cells.push_back({key.antennas, key.pilot_length, &data, sets[i].named});
  }
  write_sweep(sweep_size(cells, c.methods, c.size_snr_db), c, "sweep_size", o.overwrite);
  return 0;
}

int cmd_benchmark(const CommonOptions& o) {
  ExperimentConfig c = load_config(o);
  const PairedDataset data = load_dataset(c.dataset_dir);
  const ModelSet models = load_models(c, dims_of(data));
  nlohmann::ordered_json j;
  j["format"] = "onebit-benchmark";
  j["format_version"] = 1;
  j["snr_db"] = c.eval_snr_db;
  j["repetitions"] = c.benchmark_repetitions;
  std::cout << "method\tmedian_ms\tmean_ms\tmin_ms\n";
  for (const auto& m : models.named) {
    const BenchmarkResult r = benchmark_time(*m.model, data, c.benchmark_repetitions, c.eval_snr_db);
    j["methods"][m.name] = {{"median_ms", r.median_ms}, {"mean_ms", r.mean_ms}, {"min_ms", r.min_ms}};
    std::cout << m.name << '\t' << std::fixed << std::setprecision(3) << r.median_ms << '\t' << r.mean_ms << '\t'
              << r.min_ms << '\n';
  }
  write_file(c.out / "benchmark.json", j.dump(2) + "\n", o.overwrite);
  return 0;
}

int cmd_plot(const CommonOptions& o) {
  ExperimentConfig c = load_config(o);
  const PairedDataset data = load_dataset(c.dataset_dir);
  const ModelSet models = load_models(c, dims_of(data));
  const IndexRange test = data.split().test;
  if (c.plot_sample < 0 || c.plot_sample >= test.size())
    throw ConfigError("plot.sample must index the test split (0.." + std::to_string(test.size() - 1) + ")");
  const int index = test.begin + c.plot_sample;
  const QuantizedObservation y = data.observation(index, c.eval_snr_db);
  std::vector<PlotPanel> panels{{"ground truth", data.channels[index].real()}};
  for (const auto& m : models.named) panels.push_back({m.name, m.model->estimate(y, data.pilots, c.eval_snr_db).real()});
  const fs::path path = c.out / ("sample_" + std::to_string(c.plot_sample) + ".png");
  write_file(path, encode_png(render_panels(panels)), o.overwrite);
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-bit massive MIMO channel estimation"};
  app.require_subcommand(1);
  CommonOptions opts;
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const CommonOptions&);
  };
  const Command commands[] = {
      {"generate-dataset", "generate and save a channel dataset", cmd_generate},
      {"train", "train one model kind and write its checkpoint", cmd_train},
      {"evaluate", "test-split NMSE of every method at eval.snr_db", cmd_evaluate},
      {"sweep-snr", "NMSE of every method over sweep.snr_db", cmd_sweep_snr},
      {"sweep-size", "NMSE over the sweep.sizes grid", cmd_sweep_size},
      {"benchmark", "single-sample inference time per method", cmd_benchmark},
      {"plot", "ground truth next to each method's estimate", cmd_plot},
  };
  for (const auto& cmd : commands) add_common(app.add_subcommand(cmd.name, cmd.help), opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    for (const auto& cmd : commands)
      if (app.got_subcommand(cmd.name)) return cmd.run(opts);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ConfigurationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const TrainingDiverged& e) {
    std::cerr << "error: training diverged at epoch " << e.epoch << ": " << e.what() << "\n";
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}

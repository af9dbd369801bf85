// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero if
// any criterion fails. Trained models are cached by configuration fingerprint
// when --cache is given.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gradcheck.hpp"
#include "json.hpp"
#include "onebit/baselines.hpp"
#include "onebit/config.hpp"
#include "onebit/evaluation.hpp"
#include "onebit/persistence.hpp"
#include "oracles.hpp"
#include "scratch_dir.hpp"

using namespace onebit;
namespace fs = std::filesystem;
using cd = std::complex<double>;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fixed(double v, int digits = 2) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

struct Outcome {
  std::string id;
  bool pass = false;
  std::string detail;
};

/// Experiment sizes. "desk" is the reduced configuration that fits a single CPU;
/// "full" is the 64x32 setup with the default network widths.
struct Profile {
  std::string name;
  int antennas, users, pilot_length, count;
  int generator_filters, discriminator_filters;
  int epochs;
  std::vector<std::uint64_t> train_seeds;
  std::vector<int> size_antennas;
  int size_users, size_count, size_epochs;
};

Profile profile_named(const std::string& name) {
  if (name == "desk") return {"desk", 32, 16, 8, 1000, 32, 64, 200, {1, 2, 3}, {64, 256}, 16, 1000, 50};
  if (name == "full") return {"full", 64, 32, 8, 4200, 128, 512, 200, {1, 2, 3}, {64, 256}, 32, 4200, 200};
  throw std::invalid_argument("unknown profile '" + name + "' (desk or full)");
}

constexpr std::uint64_t kDatasetSeed = 1;

// ---------------------------------------------------------------------------
// 1. forward model

Outcome criterion_forward_model() {
  const auto t0 = Clock::now();
  const int cases = 100000;
  std::mt19937_64 rng(101);
  std::normal_distribution<double> normal(0, 1);
  std::uniform_int_distribution<int> small(1, 8), users(1, 16);
  std::uniform_real_distribution<double> log_scale(-6, 6), unit(0, 1);
  int alphabet = 0, zero_sign = 0, scale = 0, gram = 0, zeros_seen = 0;
  double worst_gram = 0;
  auto part = [&]() {
    const double u = unit(rng);
    if (u < 0.05) return 0.0;
    if (u < 0.10) return -0.0;
    return normal(rng) * std::pow(10.0, log_scale(rng));
  };
  for (int c = 0; c < cases; ++c) {
    const int rows = small(rng), cols = small(rng);
    Eigen::MatrixXcd z(rows, cols);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = cd(part(), part());
    const Eigen::MatrixXcd q = one_bit_quantize(z);
    bool in_alphabet = true, zero_ok = true;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      const cd v = q.data()[i];
      in_alphabet &= (v.real() == 1 || v.real() == -1) && (v.imag() == 1 || v.imag() == -1);
      const cd src = z.data()[i];
      if (src.real() == 0) ++zeros_seen, zero_ok &= v.real() == 1;
      if (src.imag() == 0) ++zeros_seen, zero_ok &= v.imag() == 1;
    }
    alphabet += in_alphabet;
    zero_sign += zero_ok;

    // positive scaling of the channel leaves the noiseless observation unchanged
    const int k = users(rng);
    const int tau = std::max(k, small(rng) * 4);
    const double power = std::pow(10.0, log_scale(rng) / 3);
    const PilotMatrix p = generate_pilots(k, tau, power);
    Eigen::MatrixXcd h(rows, k);
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = cd(normal(rng), normal(rng));
    const double s = std::pow(10.0, log_scale(rng));
    Rng unused(0);
    const bool scale_ok = observe(h, p, kNoiseless, unused) == observe(ChannelMatrix(s * h), p, kNoiseless, unused) &&
                          one_bit_quantize(z) == one_bit_quantize(Eigen::MatrixXcd(s * z));
    scale += scale_ok;

    const double err = (p * p.adjoint() - power * Eigen::MatrixXcd::Identity(k, k)).cwiseAbs().maxCoeff();
    worst_gram = std::max(worst_gram, err);
    gram += err <= 1e-12;
  }
  const double secs = seconds_since(t0);
  const bool pass = alphabet == cases && zero_sign == cases && scale == cases && gram == cases && secs < 60;
  return {"1", pass,
          std::to_string(cases) + " cases: alphabet " + std::to_string(alphabet) + ", sgn(0)=+1 " +
              std::to_string(zero_sign) + " (" + std::to_string(zeros_seen) + " zero parts), scale invariance " +
              std::to_string(scale) + ", pilot Gram " + std::to_string(gram) + " (worst " +
              [&] { std::ostringstream os; os << worst_gram; return os.str(); }() + "), " + fixed(secs, 1) + " s"};
}

// ---------------------------------------------------------------------------
// 2. metric

Outcome criterion_metric() {
  std::mt19937_64 rng(202);
  std::normal_distribution<double> normal(0, 1);
  std::uniform_real_distribution<double> mag(0.01, 100);
  double worst_zero = 0, worst_double = 0, worst_scale = 0, worst_loop = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 9, rows = 1 + trial % 11, cols = 1 + trial % 6;
    std::vector<ChannelMatrix> h, e, zero, twice, sh, se;
    const cd alpha(normal(rng) * mag(rng), normal(rng));
    for (int i = 0; i < n; ++i) {
      ChannelMatrix a(rows, cols), b(rows, cols);
      const double s = mag(rng);
      for (Eigen::Index j = 0; j < a.size(); ++j) {
        a.data()[j] = s * cd(normal(rng), normal(rng));
        b.data()[j] = s * cd(normal(rng), normal(rng));
      }
      h.push_back(a), e.push_back(b);
      zero.push_back(ChannelMatrix::Zero(rows, cols));
      twice.push_back(2.0 * a);
      sh.push_back(alpha * a), se.push_back(alpha * b);
    }
    worst_zero = std::max(worst_zero, std::abs(nmse_db(h, zero)));
    worst_double = std::max(worst_double, std::abs(nmse_db(h, twice)));
    worst_scale = std::max(worst_scale, std::abs(nmse_db(sh, se) - nmse_db(h, e)));
    worst_loop = std::max(worst_loop, std::abs(nmse_db(h, e) - oracle::nmse_db_loop(h, e)));
  }
  const bool pass = worst_zero <= 1e-10 && worst_double <= 1e-10 && worst_scale <= 1e-10 && worst_loop <= 1e-10;
  std::ostringstream os;
  os << "max deviations over 1000 batches: H^=0 " << worst_zero << " dB, H^=2H " << worst_double
     << " dB, joint scaling " << worst_scale << " dB, loop oracle " << worst_loop << " dB";
  return {"2", pass, os.str()};
}

// ---------------------------------------------------------------------------
// 3. losses and gradients

Outcome criterion_gradients() {
  const double g = gan_loss({0.5}, {0.5});
  std::mt19937_64 rng(303);
  gradcheck::TinyNet net;
  std::normal_distribution<double> d(0, 0.5);
  for (auto* p : net.parameters())
    for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value.data()[i] = d(rng);
  gradcheck::T x(2, 2, 4, 4), target(2, 2, 2, 2);
  for (Eigen::Index i = 0; i < x.data.size(); ++i) x.data.data()[i] = d(rng) * 2;
  for (Eigen::Index i = 0; i < target.data.size(); ++i) target.data.data()[i] = d(rng);
  const double worst = gradcheck::gradient_check(net, x, target, 100, rng);
  const bool pass = std::abs(g + 1.3863) < 1e-4 && worst < 1e-3;
  std::ostringstream os;
  os << "gan_loss(0.5, 0.5) = " << std::setprecision(6) << g << "; worst relative gradient error over 100 probes "
     << worst;
  return {"3", pass, os.str()};
}

// ---------------------------------------------------------------------------
// 4. GAMP against numerical integration

Outcome criterion_gamp_oracle() {
  const auto t0 = Clock::now();
  const int K = 2, tau = 16, trials = 100;
  const PilotMatrix p = generate_pilots(K, tau);
  const Eigen::MatrixXd a = real_measurement_matrix(p);
  const double prior_var = 1.0 / K;  // per complex entry
  GampConfig cfg;
  cfg.mixture_components = 1;
  cfg.em_iterations = 0;
  cfg.prior_variance = prior_var;
  cfg.max_iterations = 500;
  cfg.tolerance = 1e-12;
  int within = 0;
  std::vector<double> errors;
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_rng(404, {std::uint64_t(t)});
    std::normal_distribution<double> d(0, std::sqrt(prior_var / 2));
    ChannelMatrix h(1, K);
    for (int k = 0; k < K; ++k) h(0, k) = cd(d(rng), d(rng));
    const QuantizedObservation y = observe(h, p, kNoiseless, rng);
    const ChannelMatrix est = gamp_estimate(y, p, kNoiseless, cfg).estimate;

    Eigen::VectorXd yr(2 * tau), truth(2 * K);
    yr << y.row(0).real().transpose(), y.row(0).imag().transpose();
    truth << h.row(0).real().transpose(), h.row(0).imag().transpose();
    const Eigen::VectorXd mean = oracle::cone_posterior_mean(a, yr, std::sqrt(prior_var / 2), truth);
    double worst = 0;
    for (int k = 0; k < K; ++k) {
      worst = std::max(worst, std::abs(est(0, k).real() - mean(k)));
      worst = std::max(worst, std::abs(est(0, k).imag() - mean(K + k)));
    }
    errors.push_back(worst);
    within += worst <= 1e-2;
  }
  std::sort(errors.begin(), errors.end());
  const double secs = seconds_since(t0);
  const bool pass = within >= 90 && secs < 600;
  return {"4", pass,
          std::to_string(within) + "/100 trials within 1e-2 per entry (median max error " + fixed(errors[50], 4) +
              ", worst " + fixed(errors.back(), 4) + "), " + fixed(secs, 1) + " s"};
}

// ---------------------------------------------------------------------------
// training with an optional checkpoint cache

class ModelCache {
 public:
  explicit ModelCache(std::optional<fs::path> dir) : dir_(std::move(dir)) {
    if (dir_) fs::create_directories(*dir_);
  }

  TrainedEstimator obtain(const PairedDataset& data, const ModelDescriptor& d, const TrainConfig& c,
                          const std::string& label) {
    const std::string hash = config_fingerprint(d, c, data.system, data.size());
    const std::optional<fs::path> path =
        dir_ ? std::optional<fs::path>(*dir_ / (label + "-" + hash + ".ckpt")) : std::nullopt;
    if (path && fs::exists(*path)) {
      try {
        TrainedEstimator m = load_checkpoint(*path);
        if (m.metadata().config_hash == hash) {
          std::cerr << "[acceptance] " << label << ": loaded " << path->string() << "\n";
          return m;
        }
      } catch (const PersistenceError& e) {
        std::cerr << "[acceptance] " << label << ": ignoring cached checkpoint (" << e.what() << ")\n";
      }
    }
    const auto t0 = Clock::now();
    TrainedEstimator m = train(data, d, c, [&](const EpochRecord& r) {
      if (r.epoch % 10 == 0 || r.epoch == c.epochs)
        std::cerr << "[acceptance] " << label << " epoch " << r.epoch << "/" << c.epochs << " l2 " << r.l2_loss
                  << " val " << fixed(r.validation_nmse_db, 3) << " dB (" << fixed(seconds_since(t0), 0) << " s)\n";
    });
    std::cerr << "[acceptance] " << label << ": selected epoch " << m.metadata().selected_epoch << "\n";
    if (path) save_checkpoint(m, *path, true);
    return m;
  }

 private:
  std::optional<fs::path> dir_;
};

ModelDescriptor descriptor_for(ModelKind kind, const Profile& prof, const Dims& dims) {
  ModelDescriptor d;
  d.kind = kind;
  d.dims = dims;
  d.generator.base_filters = prof.generator_filters;
  d.generator.skip_connections = kind != ModelKind::cnn;
  d.discriminator.filters = prof.discriminator_filters;
  return d;
}

PairedDataset make_dataset(int antennas, int users, int pilot_length, int count) {
  SystemConfig sys;
  sys.antennas = antennas;
  sys.users = users;
  sys.pilot_length = pilot_length;
  sys.seed = kDatasetSeed;
  return PairedDataset::generate(sys, count);
}

double mean_over(const SweepResult& r, const std::string& method, const std::set<double>& snrs) {
  double sum = 0;
  int n = 0;
  for (std::size_t i = 0; i < r.points.size(); ++i)
    if (snrs.count(r.points[i].snr_db)) sum += r.at(i, method).nmse_db, ++n;
  return sum / n;
}

double at_snr(const SweepResult& r, const std::string& method, double snr) {
  for (std::size_t i = 0; i < r.points.size(); ++i)
    if (r.points[i].snr_db == snr) return r.at(i, method).nmse_db;
  throw std::out_of_range("no sweep point at " + std::to_string(snr) + " dB");
}

// ---------------------------------------------------------------------------
// 5. training reproduction

std::vector<Outcome> criterion_training(const Profile& prof, ModelCache& cache) {
  const PairedDataset data = make_dataset(prof.antennas, prof.users, prof.pilot_length, prof.count);
  const Dims dims{prof.antennas, prof.users, prof.pilot_length};
  std::cerr << "[acceptance] profile " << prof.name << ": M=" << dims.antennas << " K=" << dims.users
            << " tau=" << dims.pilot_length << ", " << prof.count << " samples, " << prof.epochs << " epochs\n";

  TrainConfig base;  // defaults apart from the epoch budget and seed
  base.epochs = prof.epochs;

  std::map<std::string, std::vector<TrainedEstimator>> models;
  for (std::size_t s = 0; s < prof.train_seeds.size(); ++s) {
    TrainConfig c = base;
    c.seed = prof.train_seeds[s];
    const std::string tag = "-seed" + std::to_string(c.seed);
    std::vector<ModelKind> kinds{ModelKind::cgan, ModelKind::unet};
    if (s == 0) kinds.insert(kinds.end(), {ModelKind::cnn, ModelKind::mlp});
    for (ModelKind k : kinds)
      models[to_string(k)].push_back(
          cache.obtain(data, descriptor_for(k, prof, dims), c, prof.name + "-" + to_string(k) + tag));
  }
  const GampEstimator gamp;

  const auto& grid = default_snr_grid();
  std::vector<NamedEstimator> first{{"cgan", &models["cgan"][0]}, {"unet", &models["unet"][0]},
                                    {"cnn", &models["cnn"][0]},   {"mlp", &models["mlp"][0]},
                                    {"gamp", &gamp}};
  const SweepResult sweep = sweep_snr(first, data, grid);
  std::cout << "  test-split NMSE (dB), train seed " << prof.train_seeds[0] << ":\n";
  std::istringstream table(sweep.to_table());
  for (std::string line; std::getline(table, line);) std::cout << "    " << line << "\n";

  std::vector<Outcome> out;
  const double c10 = at_snr(sweep, "cgan", 10), u10 = at_snr(sweep, "unet", 10), n10 = at_snr(sweep, "cnn", 10),
               m10 = at_snr(sweep, "mlp", 10), g10 = at_snr(sweep, "gamp", 10);
  out.push_back({"5a", c10 <= u10 && u10 <= n10 && c10 <= m10,
                 "at 10 dB: cgan " + fixed(c10) + ", unet " + fixed(u10) + ", cnn " + fixed(n10) + ", mlp " +
                     fixed(m10) + " dB (need cgan <= unet <= cnn and cgan <= mlp)"});

  const std::set<double> low{-10, -5, 0};
  int margin_pass = 0;
  std::string margins;
  for (std::size_t s = 0; s < prof.train_seeds.size(); ++s) {
    const SweepResult r = sweep_snr({{"cgan", &models["cgan"][s]}, {"unet", &models["unet"][s]}}, data,
                                    {low.begin(), low.end()});
    const double margin = mean_over(r, "unet", low) - mean_over(r, "cgan", low);
    margin_pass += margin >= 1.5;
    margins += (s ? ", " : "") + fixed(margin);
  }
  out.push_back({"5b", 2 * margin_pass > static_cast<int>(prof.train_seeds.size()),
                 "low-SNR margin unet - cgan per seed: " + margins + " dB (need >= 1.5 dB on a majority)"});

  const double c20 = at_snr(sweep, "cgan", 20);
  out.push_back({"5c", c20 <= -10, "cgan at 20 dB: " + fixed(c20) + " dB (need <= -10)"});

  double mlp_lo = 1e9, mlp_hi = -1e9;
  for (double snr : grid) {
    const double v = at_snr(sweep, "mlp", snr);
    mlp_lo = std::min(mlp_lo, v), mlp_hi = std::max(mlp_hi, v);
  }
  out.push_back({"5d", mlp_lo >= -8 && mlp_hi <= -4,
                 "mlp range over the SNR grid: [" + fixed(mlp_lo) + ", " + fixed(mlp_hi) + "] dB (need within [-8, -4])"});

  out.push_back({"5e", c10 <= g10 - 6,
                 "at 10 dB: cgan " + fixed(c10) + ", gamp " + fixed(g10) + " dB (need a gain >= 6 dB, got " +
                     fixed(g10 - c10) + ")"});
  return out;
}

// ---------------------------------------------------------------------------
// 6. size sweep

Outcome criterion_size(const Profile& prof, ModelCache& cache) {
  TrainConfig c;
  c.epochs = prof.size_epochs;
  c.seed = prof.train_seeds[0];
  std::vector<PairedDataset> datasets;
  std::vector<TrainedEstimator> models;
  datasets.reserve(prof.size_antennas.size());
  for (int m : prof.size_antennas) {
    datasets.push_back(make_dataset(m, prof.size_users, 8, prof.size_count));
    const Dims dims{m, prof.size_users, 8};
    models.push_back(cache.obtain(datasets.back(), descriptor_for(ModelKind::cgan, prof, dims), c,
                                  prof.name + "-size-M" + std::to_string(m) + "-cgan"));
  }
  std::vector<SizeCell> cells;
  for (std::size_t i = 0; i < models.size(); ++i)
    cells.push_back({prof.size_antennas[i], 8, &datasets[i], {{"cgan", &models[i]}}});
  const SweepResult r = sweep_size(cells, {"cgan"}, 10.0);
  const double first = r.at(0, "cgan").nmse_db, last = r.at(r.points.size() - 1, "cgan").nmse_db;
  return {"6", last - first <= 3.0,
          "cgan at 10 dB, K=" + std::to_string(prof.size_users) + ", tau=8, " + std::to_string(prof.size_epochs) +
              " epochs: M=" + std::to_string(prof.size_antennas.front()) + " " + fixed(first) + " dB, M=" +
              std::to_string(prof.size_antennas.back()) + " " + fixed(last) + " dB (degradation " +
              fixed(last - first) + ", need <= 3)"};
}

// ---------------------------------------------------------------------------
// 7. determinism and persistence

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + ONEBIT_CLI + "\" " + args + " >>\"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

/// Relative path -> contents of every regular file below `root`.
std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_file(e.path());
  return files;
}

Outcome criterion_determinism() {
  ScratchDir scratch("acceptance");
  const fs::path work = scratch / "work", log = scratch / "cli.log";
  const std::string cfg_text = "seed = 5\n"
                               "system.antennas = 16\nsystem.users = 8\nsystem.pilot_length = 4\n"
                               "dataset.count = 120\n"
                               "dataset.dir = " + (work / "data").string() + "\n" +
                               "out = " + (work / "runs").string() + "\n" +
                               "generator.base_filters = 8\ndiscriminator.filters = 8\nmlp.hidden = 64\n"
                               "train.epochs = 2\n"
                               "sweep.snr_db = -10, 10, 30\n"
                               "sweep.sizes = 16x4\n"
                               "dataset.16x4 = " + (work / "data").string() + "\n" +
                               "checkpoint.16x4.cgan = " + (work / "runs/cgan.ckpt").string() + "\n" +
                               "benchmark.repetitions = 10\n";
  const fs::path cfg = scratch / "pipeline.cfg";
  write_file(cfg, cfg_text, false);
  const std::string c = "--config \"" + cfg.string() + "\"";
  const std::vector<std::string> steps{"generate-dataset " + c, "train " + c + " --model-kind cgan",
                                       "train " + c + " --model-kind unet", "train " + c + " --model-kind cnn",
                                       "train " + c + " --model-kind mlp", "evaluate " + c, "sweep-snr " + c,
                                       "sweep-size " + c, "plot " + c, "benchmark " + c};

  std::vector<std::map<std::string, std::string>> runs;
  for (int attempt = 0; attempt < 2; ++attempt) {
    fs::remove_all(work);
    for (const auto& s : steps)
      if (const int code = run_cli(s, log); code != 0)
        return {"7", false, "onebit " + s.substr(0, s.find(' ')) + " exited with " + std::to_string(code) +
                                " (log: " + read_file(log).substr(0, 400) + ")"};
    runs.push_back(snapshot_tree(work));
  }
  // wall-clock timings are the only nondeterministic output
  int compared = 0, identical = 0;
  std::string differing;
  for (const auto& [name, bytes] : runs[0]) {
    if (name == "runs/benchmark.json") continue;
    ++compared;
    auto it = runs[1].find(name);
    if (it != runs[1].end() && it->second == bytes) ++identical;
    else differing += " " + name;
  }
  const bool same_set = runs[0].size() == runs[1].size();

  // the CLI's checkpoint reproduces in-memory estimates bit-exactly after a reload
  const PairedDataset data = load_dataset(work / "data");
  const ExperimentConfig ec = ExperimentConfig::from_file(cfg);
  const TrainedEstimator fresh = train(data, ec.descriptor(ModelKind::cgan), ec.train);
  save_checkpoint(fresh, scratch / "fresh.ckpt", false);
  const TrainedEstimator loaded = load_checkpoint(scratch / "fresh.ckpt");
  const auto test = data.split().test;
  std::vector<QuantizedObservation> ys;
  for (int i = test.begin; i < test.end; ++i) ys.push_back(data.observation(i, 10.0));
  bool bit_exact = loaded.estimate_all(ys, data.pilots, 10.0) == fresh.estimate_all(ys, data.pilots, 10.0);
  for (const auto& y : ys) bit_exact &= loaded.estimate(y, data.pilots) == fresh.estimate(y, data.pilots);
  const bool cli_matches = read_file(scratch / "fresh.ckpt") == runs[1].at("runs/cgan.ckpt");

  const bool pass = same_set && identical == compared && bit_exact && cli_matches;
  return {"7", pass,
          std::to_string(identical) + "/" + std::to_string(compared) +
              " result files byte-identical across two CLI pipelines (benchmark timings excluded)" +
              (differing.empty() ? "" : "; differing:" + differing) + "; checkpoint reload bit-exact: " +
              (bit_exact ? "yes" : "no") + "; in-process training matches the CLI checkpoint: " +
              (cli_matches ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 8. inference timing

Outcome criterion_timing() {
  const PairedDataset data = make_dataset(64, 32, 8, 60);
  const Dims dims{64, 32, 8};
  Rng rng(808);
  std::vector<std::unique_ptr<TrainedEstimator>> nets;
  std::vector<NamedEstimator> named;
  for (ModelKind k : {ModelKind::cgan, ModelKind::unet, ModelKind::cnn, ModelKind::mlp}) {
    ModelDescriptor d;
    d.kind = k;
    d.dims = dims;
    nets.push_back(std::make_unique<TrainedEstimator>(d, NormalizationScale{1.0}));
    nets.back()->network().init_weights(rng);
    named.push_back({to_string(k), nets.back().get()});
  }
  const GampEstimator gamp;
  named.push_back({"gamp", &gamp});
  std::ostringstream os;
  os << "median single-sample inference at M=64, K=32, tau=8 with default widths:";
  double cgan_ms = 0;
  for (const auto& m : named) {
    const BenchmarkResult b = benchmark_time(*m.model, data, 20, -10.0);
    os << " " << m.name << " " << fixed(b.median_ms) << " ms";
    if (m.name == "cgan") cgan_ms = b.median_ms;
  }
  os << " (need cgan < 1000 ms)";
  return {"8", cgan_ms > 0 && cgan_ms < 1000, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string only, profile_name = "desk", cache;
  app.add_option("--only", only, "comma-separated criteria to run (default: all)");
  app.add_option("--profile", profile_name, "desk | full")->envname("ONEBIT_ACCEPTANCE_PROFILE");
  app.add_option("--cache", cache, "directory for trained checkpoints");
  CLI11_PARSE(app, argc, argv);

  std::set<std::string> selected;
  for (std::stringstream ss(only); ss.good();) {
    std::string item;
    std::getline(ss, item, ',');
    if (!item.empty()) selected.insert(item);
  }
  auto wanted = [&](const std::string& id) { return selected.empty() || selected.count(id); };

  const Profile prof = profile_named(profile_name);
  ModelCache models(cache.empty() ? std::nullopt : std::optional<fs::path>(cache));

  std::vector<Outcome> outcomes;
  auto report = [&](const Outcome& o) {
    std::cout << "criterion " << o.id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
    outcomes.push_back(o);
  };
  auto guarded = [&](const std::string& id, const std::function<void()>& body) {
    if (!wanted(id)) return;
    try {
      body();
    } catch (const std::exception& e) {
      report({id, false, std::string("error: ") + e.what()});
    }
  };

  guarded("1", [&] { report(criterion_forward_model()); });
  guarded("2", [&] { report(criterion_metric()); });
  guarded("3", [&] { report(criterion_gradients()); });
  guarded("4", [&] { report(criterion_gamp_oracle()); });
  guarded("5", [&] {
    for (const auto& o : criterion_training(prof, models)) report(o);
  });
  guarded("6", [&] { report(criterion_size(prof, models)); });
  guarded("7", [&] { report(criterion_determinism()); });
  guarded("8", [&] { report(criterion_timing()); });

  int failed = 0;
  for (const auto& o : outcomes) failed += !o.pass;
  std::cout << outcomes.size() - failed << "/" << outcomes.size() << " criteria passed (profile " << prof.name
            << ")" << std::endl;
  return failed == 0 ? 0 : 1;
}

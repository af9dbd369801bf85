#include "onebit/cgan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "onebit/evaluation.hpp"
#include "onebit/persistence.hpp"

namespace onebit {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::cgan: return "cgan";
    case ModelKind::unet: return "unet";
    case ModelKind::cnn: return "cnn";
    case ModelKind::mlp: return "mlp";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "cgan") return ModelKind::cgan;
  if (text == "unet") return ModelKind::unet;
  if (text == "cnn") return ModelKind::cnn;
  if (text == "mlp") return ModelKind::mlp;
  throw std::invalid_argument("unknown model kind '" + text + "' (expected cgan, unet, cnn or mlp)");
}

std::string to_string(GeneratorLossMode mode) {
  return mode == GeneratorLossMode::saturating ? "saturating" : "non-saturating";
}

GeneratorLossMode parse_generator_loss_mode(const std::string& text) {
  if (text == "saturating") return GeneratorLossMode::saturating;
  if (text == "non-saturating" || text == "non_saturating") return GeneratorLossMode::non_saturating;
  throw std::invalid_argument("unknown generator loss mode '" + text + "'");
}

void TrainConfig::validate() const {
  if (!(lr_generator > 0) || !(lr_discriminator > 0))
    throw std::invalid_argument("TrainConfig: learning rates must be > 0");
  if (!(l2_weight >= 0)) throw std::invalid_argument("TrainConfig: l2_weight must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (!(rmsprop_rho > 0 && rmsprop_rho < 1)) throw std::invalid_argument("TrainConfig: rmsprop_rho must be in (0,1)");
  if (!(rmsprop_eps > 0)) throw std::invalid_argument("TrainConfig: rmsprop_eps must be > 0");
  if (train_snr_db.empty()) throw std::invalid_argument("TrainConfig: train_snr_db is empty");
}

std::unique_ptr<ChannelNetwork<float>> ModelDescriptor::build_network() const {
  switch (kind) {
    case ModelKind::cgan:
    case ModelKind::unet: {
      GeneratorSpec g = generator;
      g.skip_connections = true;
      return std::make_unique<UNetGenerator<float>>(g, dims);
    }
    case ModelKind::cnn: {
      GeneratorSpec g = generator;
      g.skip_connections = false;
      return std::make_unique<UNetGenerator<float>>(g, dims);
    }
    case ModelKind::mlp: return std::make_unique<MlpNetwork<float>>(mlp, dims);
  }
  throw std::logic_error("unreachable model kind");
}

TrainedEstimator::TrainedEstimator(ModelDescriptor descriptor, NormalizationScale scale)
    : descriptor_(std::move(descriptor)), scale_(scale), network_(descriptor_.build_network()) {
  if (!(scale_.value > 0)) throw std::invalid_argument("TrainedEstimator: scale must be > 0");
}

namespace {

void check_shapes(const Dims& dims, const QuantizedObservation& y, const PilotMatrix& pilots) {
  if (y.rows() != dims.antennas || y.cols() != dims.pilot_length || pilots.rows() != dims.users ||
      pilots.cols() != dims.pilot_length)
    throw std::invalid_argument("estimate: model expects M=" + std::to_string(dims.antennas) +
                                ", K=" + std::to_string(dims.users) + ", tau=" + std::to_string(dims.pilot_length) +
                                " but got Y " + std::to_string(y.rows()) + "x" + std::to_string(y.cols()) +
                                " and pilots " + std::to_string(pilots.rows()) + "x" +
                                std::to_string(pilots.cols()));
}

nn::Tensor<float> condition_tensor(const QuantizedObservation& y, const PilotMatrix& pilots) {
  return assemble_condition(y, pilots).cast<float>();
}

ChannelMatrix to_channel(const nn::Tensor<float>& out, nn::Index n, NormalizationScale scale) {
  TwoChannelImage img = nn::unstack(out, n).cast<double>();
  return image_to_complex(denormalize(img, scale));
}

}  // namespace

ChannelMatrix TrainedEstimator::estimate(const QuantizedObservation& y, const PilotMatrix& pilots) const {
  check_shapes(descriptor_.dims, y, pilots);
  const nn::Tensor<float> out = network_->apply(condition_tensor(y, pilots));
  return to_channel(out, 0, scale_);
}

std::vector<ChannelMatrix> TrainedEstimator::estimate_all(const std::vector<QuantizedObservation>& ys,
                                                          const PilotMatrix& pilots, double) const {
  constexpr std::size_t kBatch = 32;
  std::vector<ChannelMatrix> out;
  out.reserve(ys.size());
  for (std::size_t b = 0; b < ys.size(); b += kBatch) {
    const std::size_t e = std::min(ys.size(), b + kBatch);
    std::vector<nn::Tensor<float>> conds;
    conds.reserve(e - b);
    for (std::size_t i = b; i < e; ++i) {
      check_shapes(descriptor_.dims, ys[i], pilots);
      conds.push_back(condition_tensor(ys[i], pilots));
    }
    std::vector<const nn::Tensor<float>*> ptrs;
    for (const auto& c : conds) ptrs.push_back(&c);
    const nn::Tensor<float> res = network_->apply(nn::stack(ptrs));
    for (std::size_t i = 0; i < e - b; ++i) out.push_back(to_channel(res, static_cast<nn::Index>(i), scale_));
  }
  return out;
}

TwoChannelImage assemble_condition(const QuantizedObservation& y, const PilotMatrix& pilots) {
  if (y.cols() != pilots.cols())
    throw std::invalid_argument("assemble_condition: Y has " + std::to_string(y.cols()) + " pilot slots, pilots have " +
                                std::to_string(pilots.cols()));
  Eigen::MatrixXcd stacked(y.rows() + pilots.rows(), y.cols());
  stacked << y, pilots;
  return complex_to_image(stacked);
}

double gan_loss(const std::vector<double>& d_real, const std::vector<double>& d_fake) {
  if (d_real.size() != d_fake.size() || d_real.empty())
    throw std::invalid_argument("gan_loss: batches must be non-empty and of equal size");
  auto clamp = [](double p) { return std::clamp(p, kProbabilityEps, 1.0 - kProbabilityEps); };
  double sum = 0.0;
  for (std::size_t i = 0; i < d_real.size(); ++i) sum += std::log(clamp(d_real[i])) + std::log(1.0 - clamp(d_fake[i]));
  return sum / static_cast<double>(d_real.size());
}

double l2_loss(const ChannelMatrix& h, const ChannelMatrix& h_hat) {
  if (h.rows() != h_hat.rows() || h.cols() != h_hat.cols())
    throw std::invalid_argument("l2_loss: shape mismatch");
  return (h - h_hat).squaredNorm();
}

double l2_loss(const std::vector<ChannelMatrix>& h, const std::vector<ChannelMatrix>& h_hat) {
  if (h.size() != h_hat.size() || h.empty()) throw std::invalid_argument("l2_loss: batch size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) sum += l2_loss(h[i], h_hat[i]);
  return sum / static_cast<double>(h.size());
}

nn::Tensor<float> pilot_plane(const PilotMatrix& pilots, const Dims& dims) {
  return nn::ResizeNearest<float>(dims.antennas, dims.users).apply(complex_to_image(pilots).cast<float>());
}

std::string config_fingerprint(const ModelDescriptor& d, const TrainConfig& c, const SystemConfig& s,
                               int dataset_size) {
  std::ostringstream os;
  os.precision(17);
  os << to_string(d.kind) << '|' << d.dims.antennas << ',' << d.dims.users << ',' << d.dims.pilot_length << '|'
     << d.generator.base_filters << ',' << d.generator.kernel_h << ',' << d.generator.kernel_w << ','
     << d.generator.encoder_blocks << ',' << d.generator.decoder_blocks << ',' << d.generator.leaky_slope << '|'
     << d.discriminator.filters << ',' << d.discriminator.encoder_blocks << ',' << d.discriminator.strided_convolutions
     << '|' << d.mlp.layers << ',' << d.mlp.hidden << '|' << c.lr_generator << ',' << c.lr_discriminator << ','
     << c.rmsprop_rho << ',' << c.rmsprop_eps << ',' << c.batch_size << ',' << c.epochs << ',' << c.l2_weight << ','
     << to_string(c.generator_loss_mode) << ',' << c.seed << ',' << c.keep_best_validation;
  for (double snr : c.train_snr_db) os << ',' << snr;
  os << '|' << s.seed << ',' << s.antennas << ',' << s.users << ',' << s.paths << ',' << s.pilot_length << ','
     << dataset_size;
  return sha256_hex(os.str()).substr(0, 16);
}

namespace {

nn::Tensor<float> tile(const nn::Tensor<float>& single, nn::Index n) {
  nn::Tensor<float> out(n, single.channels(), single.height, single.width);
  for (nn::Index i = 0; i < n; ++i) out.sample(i) = single.data;
  return out;
}

struct Batch {
  nn::Tensor<float> condition;
  nn::Tensor<float> target;
};

class BatchBuilder {
 public:
  BatchBuilder(const PairedDataset& data, NormalizationScale scale, const TrainConfig& config)
      : data_(data), scale_(scale), config_(config) {}

  Batch make(const std::vector<int>& indices, int epoch) const {
    std::vector<nn::Tensor<float>> conds, targets;
    for (int i : indices) {
      const auto& snrs = config_.train_snr_db;
      const double snr = snrs[static_cast<std::size_t>(i + epoch) % snrs.size()];
      conds.push_back(condition_tensor(data_.observation(i, snr), data_.pilots));
      targets.push_back(target_image(data_.channels[i], scale_).cast<float>());
    }
    return {stack_all(conds), stack_all(targets)};
  }

 private:
  static nn::Tensor<float> stack_all(const std::vector<nn::Tensor<float>>& items) {
    std::vector<const nn::Tensor<float>*> ptrs;
    for (const auto& t : items) ptrs.push_back(&t);
    return nn::stack(ptrs);
  }

  const PairedDataset& data_;
  NormalizationScale scale_;
  const TrainConfig& config_;
};

double validation_nmse(const TrainedEstimator& model, const PairedDataset& data, const IndexRange& range,
                       const std::vector<double>& snrs) {
  std::vector<ChannelMatrix> truth, est;
  // group by SNR so each call batches one operating point
  for (std::size_t s = 0; s < snrs.size(); ++s) {
    std::vector<QuantizedObservation> ys;
    for (int i = range.begin; i < range.end; ++i) {
      if (static_cast<std::size_t>(i) % snrs.size() != s) continue;
      ys.push_back(data.observation(i, snrs[s]));
      truth.push_back(data.channels[i]);
    }
    auto e = model.estimate_all(ys, data.pilots, snrs[s]);
    est.insert(est.end(), std::make_move_iterator(e.begin()), std::make_move_iterator(e.end()));
  }
  return nmse_db(truth, est);
}

std::vector<nn::Mat<float>> snapshot(const nn::ParameterList<float>& params) {
  std::vector<nn::Mat<float>> out;
  out.reserve(params.size());
  for (auto* p : params) out.push_back(p->value);
  return out;
}

void restore(const nn::ParameterList<float>& params, const std::vector<nn::Mat<float>>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

}  // namespace

TrainedEstimator train(const PairedDataset& data, const ModelDescriptor& descriptor, const TrainConfig& config,
                       const EpochCallback& on_epoch) {
  config.validate();
  const Split split = data.split();
  if (split.train.size() < 1) throw std::invalid_argument("train: empty training split");
  const Dims& dims = descriptor.dims;
  if (dims.antennas != data.system.antennas || dims.users != data.system.users ||
      dims.pilot_length != data.system.pilot_length)
    throw std::invalid_argument("train: model dimensions do not match the dataset");

  const std::vector<ChannelMatrix> training_channels(data.channels.begin() + split.train.begin,
                                                     data.channels.begin() + split.train.end);
  TrainedEstimator model(descriptor, fit_scale(training_channels));
  const bool adversarial = descriptor.kind == ModelKind::cgan;

  Rng init_rng = make_rng(config.seed, {stream::kInit});
  ChannelNetwork<float>& generator = model.network();
  generator.init_weights(init_rng);
  const auto g_params = generator.parameters();
  nn::RmsProp<float> g_opt(g_params, static_cast<float>(config.lr_generator), static_cast<float>(config.rmsprop_rho),
                           static_cast<float>(config.rmsprop_eps));

  std::unique_ptr<PatchDiscriminator<float>> disc;
  std::unique_ptr<nn::RmsProp<float>> d_opt;
  nn::ParameterList<float> d_params;
  if (adversarial) {
    disc = std::make_unique<PatchDiscriminator<float>>(descriptor.discriminator, dims);
    disc->init_weights(init_rng);
    d_params = disc->parameters();
    d_opt = std::make_unique<nn::RmsProp<float>>(d_params, static_cast<float>(config.lr_discriminator),
                                                 static_cast<float>(config.rmsprop_rho),
                                                 static_cast<float>(config.rmsprop_eps));
  }
  const nn::Tensor<float> pilot_img = pilot_plane(data.pilots, dims);

  auto& meta = model.metadata();
  meta.config_hash = config_fingerprint(descriptor, config, data.system, data.size());
  const BatchBuilder builder(data, model.scale(), config);

  std::vector<int> order(split.train.size());
  std::iota(order.begin(), order.end(), split.train.begin);
  double best_nmse = std::numeric_limits<double>::infinity();
  std::vector<nn::Mat<float>> best_g, best_d;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle_rng = make_rng(config.seed, {stream::kShuffle, static_cast<std::uint64_t>(epoch)});
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.output_min = std::numeric_limits<double>::infinity();
    rec.output_max = -std::numeric_limits<double>::infinity();
    double samples = 0.0;

    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(config.batch_size)) {
      const std::vector<int> idx(order.begin() + b,
                                 order.begin() + std::min(order.size(), b + static_cast<std::size_t>(config.batch_size)));
      const Batch batch = builder.make(idx, epoch);
      const nn::Index n = batch.target.batch;
      const double inv_n = 1.0 / static_cast<double>(n);

      const nn::Tensor<float> fake = generator.forward(batch.condition);
      rec.output_min = std::min(rec.output_min, static_cast<double>(fake.data.minCoeff()));
      rec.output_max = std::max(rec.output_max, static_cast<double>(fake.data.maxCoeff()));
      nn::Tensor<float> diff = fake;
      diff.data -= batch.target.data;
      double l2_sum = 0.0;
      for (nn::Index i = 0; i < n; ++i) l2_sum += static_cast<double>(diff.sample(i).squaredNorm());

      nn::Tensor<float> grad_fake = diff;
      double g_gan_sum = 0.0;

      if (adversarial) {
        const nn::Tensor<float> pilots_n = tile(pilot_img, n);
        const nn::Tensor<float> real_in = nn::concat_channels(batch.target, pilots_n);
        const nn::Tensor<float> fake_in = nn::concat_channels(fake, pilots_n);

        // discriminator: ascend log D(real) + log(1 - D(fake)), i.e. descend its negation
        const double objective = discriminator_step(*disc, *d_opt, d_params, real_in, fake_in);
        rec.gan_objective += objective;
        rec.discriminator_loss -= objective;

        // generator adversarial term against the updated discriminator
        nn::zero_grad(d_params);
        const nn::Tensor<float> p_gen = disc->forward(fake_in);
        const nn::Vec<float> d_gen = PatchDiscriminator<float>::mean_probability(p_gen);
        nn::Tensor<float> dpatch;
        if (config.generator_loss_mode == GeneratorLossMode::non_saturating) {
          for (nn::Index i = 0; i < n; ++i) g_gan_sum -= clamped_log(d_gen(i));
          dpatch = detail::patch_gradient(p_gen, d_gen, -inv_n, +1);
        } else {
          for (nn::Index i = 0; i < n; ++i) g_gan_sum += clamped_log(1.0 - d_gen(i));
          dpatch = detail::patch_gradient(p_gen, d_gen, inv_n, -1);
        }
        const nn::Tensor<float> d_input = disc->backward(dpatch);
        grad_fake.data *= static_cast<float>(2.0 * config.l2_weight * inv_n);
        grad_fake.data += d_input.data.topRows(2);
      } else {
        grad_fake.data *= static_cast<float>(2.0 * inv_n);
      }

      nn::zero_grad(g_params);
      generator.backward(grad_fake);
      g_opt.step();

      rec.l2_loss += l2_sum;
      rec.generator_gan_loss += g_gan_sum;
      samples += static_cast<double>(n);
      if (!std::isfinite(l2_sum) || !std::isfinite(g_gan_sum) || !std::isfinite(rec.gan_objective))
        throw TrainingDiverged(epoch, "training diverged at epoch " + std::to_string(epoch) + " (non-finite loss)");
    }
    rec.l2_loss /= samples;
    rec.generator_gan_loss /= samples;
    rec.gan_objective /= samples;
    rec.discriminator_loss /= samples;

    meta.epochs_run = epoch;
    if (split.validation.size() > 0) {
      rec.validation_nmse_db = validation_nmse(model, data, split.validation, config.train_snr_db);
      if (!std::isfinite(rec.validation_nmse_db))
        throw TrainingDiverged(epoch, "validation NMSE is not finite at epoch " + std::to_string(epoch));
    } else {
      rec.validation_nmse_db = std::numeric_limits<double>::quiet_NaN();
    }
    meta.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    const bool take = !config.keep_best_validation || split.validation.size() == 0 ||
                      rec.validation_nmse_db < best_nmse;
    if (take) {
      best_nmse = rec.validation_nmse_db;
      best_g = snapshot(g_params);
      if (adversarial) best_d = snapshot(d_params);
      meta.selected_epoch = epoch;
    }
  }

  restore(g_params, best_g);
  if (adversarial) model.discriminator_weights() = best_d;
  return model;
}

}  // namespace onebit

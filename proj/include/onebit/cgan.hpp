#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "onebit/dataset.hpp"
#include "onebit/estimator.hpp"
#include "onebit/networks.hpp"
#include "onebit/tensor_codec.hpp"

namespace onebit {

enum class ModelKind { cgan, unet, cnn, mlp };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

enum class GeneratorLossMode { saturating, non_saturating };

std::string to_string(GeneratorLossMode mode);
GeneratorLossMode parse_generator_loss_mode(const std::string& text);

inline const std::vector<double>& default_snr_grid() {
  static const std::vector<double> grid{-10, -5, 0, 5, 10, 15, 20, 25, 30, 40};
  return grid;
}

struct TrainConfig {
  double lr_generator = 2e-4;
  double lr_discriminator = 2e-5;
  double rmsprop_rho = 0.9;
  double rmsprop_eps = 1e-7;
  int batch_size = 16;
  int epochs = 200;
  double l2_weight = 1.0;
  GeneratorLossMode generator_loss_mode = GeneratorLossMode::non_saturating;
  std::uint64_t seed = 0;
  /// Training sample i in epoch e is observed at train_snr_db[(i + e) % size].
  std::vector<double> train_snr_db = default_snr_grid();
  /// Return the generator from the epoch with the best validation NMSE.
  bool keep_best_validation = true;

  void validate() const;
};

/// Everything that defines a network architecture.
struct ModelDescriptor {
  ModelKind kind = ModelKind::cgan;
  Dims dims;
  GeneratorSpec generator;
  DiscriminatorSpec discriminator;
  MlpSpec mlp;

  std::unique_ptr<ChannelNetwork<float>> build_network() const;
};

struct EpochRecord {
  int epoch = 0;
  double generator_gan_loss = 0.0;  // generator adversarial term (0 for L2-only models)
  double discriminator_loss = 0.0;  // negated GAN objective: D's binary cross-entropy
  double gan_objective = 0.0;       // E[log D(real)] + E[log(1 - D(fake))]
  double l2_loss = 0.0;             // mean squared Frobenius error in normalized units
  double validation_nmse_db = 0.0;
  double output_min = 0.0;
  double output_max = 0.0;
};

struct TrainingMetadata {
  std::string config_hash;
  int epochs_run = 0;
  int selected_epoch = 0;
  std::vector<EpochRecord> history;
};

struct TrainingDiverged : std::runtime_error {
  int epoch;
  TrainingDiverged(int e, const std::string& what) : std::runtime_error(what), epoch(e) {}
};

/// Generator weights with their architecture and normalization scale.
class TrainedEstimator final : public ChannelEstimator {
 public:
  TrainedEstimator(ModelDescriptor descriptor, NormalizationScale scale);
  TrainedEstimator(TrainedEstimator&&) noexcept = default;
  TrainedEstimator& operator=(TrainedEstimator&&) noexcept = default;

  std::string name() const override { return to_string(descriptor_.kind); }
  ChannelMatrix estimate(const QuantizedObservation& y, const PilotMatrix& pilots) const;
  ChannelMatrix estimate(const QuantizedObservation& y, const PilotMatrix& pilots, double) const override {
    return estimate(y, pilots);
  }
  std::vector<ChannelMatrix> estimate_all(const std::vector<QuantizedObservation>& ys, const PilotMatrix& pilots,
                                          double snr_db) const override;
  bool ready() const override { return metadata_.epochs_run > 0; }

  const ModelDescriptor& descriptor() const { return descriptor_; }
  NormalizationScale scale() const { return scale_; }
  ChannelNetwork<float>& network() { return *network_; }
  const ChannelNetwork<float>& network() const { return *network_; }
  TrainingMetadata& metadata() { return metadata_; }
  const TrainingMetadata& metadata() const { return metadata_; }

  /// Discriminator weights are only present for cGAN training checkpoints.
  std::optional<std::vector<nn::Mat<float>>>& discriminator_weights() { return discriminator_weights_; }
  const std::optional<std::vector<nn::Mat<float>>>& discriminator_weights() const { return discriminator_weights_; }

 private:
  ModelDescriptor descriptor_;
  NormalizationScale scale_;
  std::unique_ptr<ChannelNetwork<float>> network_;
  TrainingMetadata metadata_;
  std::optional<std::vector<nn::Mat<float>>> discriminator_weights_;
};

/// Stacks the observation image on top of the pilot image: (M+K) x tau x 2.
TwoChannelImage assemble_condition(const QuantizedObservation& y, const PilotMatrix& pilots);

/// mean over the batch of log(d_real) + log(1 - d_fake), inputs clamped to [eps, 1-eps].
double gan_loss(const std::vector<double>& d_real, const std::vector<double>& d_fake);
inline constexpr double kProbabilityEps = 1e-7;

inline double clamped_log(double p) { return std::log(std::clamp(p, kProbabilityEps, 1.0 - kProbabilityEps)); }

namespace detail {

/// Gradient of weight * sum_n log(d_n) (sign +1) or weight * sum_n log(1 - d_n)
/// (sign -1) with respect to the patch map, where d_n is the patch mean.
template <typename S>
nn::Tensor<S> patch_gradient(const nn::Tensor<S>& patches, const nn::Vec<S>& mean_prob, double weight, int sign) {
  nn::Tensor<S> g(patches.batch, 1, patches.height, patches.width);
  const double per_patch = 1.0 / static_cast<double>(patches.plane());
  for (nn::Index n = 0; n < patches.batch; ++n) {
    const double d = mean_prob(n);
    double dlog = 0.0;
    if (d > kProbabilityEps && d < 1.0 - kProbabilityEps) dlog = sign > 0 ? 1.0 / d : -1.0 / (1.0 - d);
    g.sample(n).setConstant(static_cast<S>(weight * dlog * per_patch));
  }
  return g;
}

}  // namespace detail

/// Batch mean of log D(real) + log(1 - D(fake)).
template <typename S>
double discriminator_objective(const PatchDiscriminator<S>& disc, const nn::Tensor<S>& real_in,
                               const nn::Tensor<S>& fake_in) {
  const nn::Vec<S> d_real = PatchDiscriminator<S>::mean_probability(disc.apply(real_in));
  const nn::Vec<S> d_fake = PatchDiscriminator<S>::mean_probability(disc.apply(fake_in));
  double sum = 0.0;
  for (nn::Index i = 0; i < d_real.size(); ++i) sum += clamped_log(d_real(i)) + clamped_log(1.0 - d_fake(i));
  return sum / static_cast<double>(d_real.size());
}

/// One optimizer step ascending the discriminator objective (binary cross-entropy
/// with real label 1, fake label 0). Returns the batch-summed objective before the step.
template <typename S>
double discriminator_step(PatchDiscriminator<S>& disc, nn::RmsProp<S>& opt, const nn::ParameterList<S>& params,
                          const nn::Tensor<S>& real_in, const nn::Tensor<S>& fake_in) {
  const double inv_n = 1.0 / static_cast<double>(real_in.batch);
  nn::zero_grad(params);
  const nn::Tensor<S> p_real = disc.forward(real_in);
  const nn::Vec<S> d_real = PatchDiscriminator<S>::mean_probability(p_real);
  disc.backward(detail::patch_gradient(p_real, d_real, -inv_n, +1));
  const nn::Tensor<S> p_fake = disc.forward(fake_in);
  const nn::Vec<S> d_fake = PatchDiscriminator<S>::mean_probability(p_fake);
  disc.backward(detail::patch_gradient(p_fake, d_fake, -inv_n, -1));
  opt.step();
  double objective = 0.0;
  for (nn::Index i = 0; i < d_real.size(); ++i) objective += clamped_log(d_real(i)) + clamped_log(1.0 - d_fake(i));
  return objective;
}

/// Squared Frobenius norm ||H - H_hat||^2.
double l2_loss(const ChannelMatrix& h, const ChannelMatrix& h_hat);
/// Batch mean of squared Frobenius norms.
double l2_loss(const std::vector<ChannelMatrix>& h, const std::vector<ChannelMatrix>& h_hat);

/// Observer invoked after every epoch.
using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains a model of the descriptor's kind on the training split. cGAN models
/// alternate a discriminator ascent step and a generator descent step per batch;
/// the other kinds minimise the L2 loss alone.
TrainedEstimator train(const PairedDataset& data, const ModelDescriptor& descriptor, const TrainConfig& config,
                       const EpochCallback& on_epoch = {});

/// The discriminator input: channel image concatenated with the pilot image
/// resized (nearest) to M x K.
nn::Tensor<float> pilot_plane(const PilotMatrix& pilots, const Dims& dims);

std::string config_fingerprint(const ModelDescriptor& descriptor, const TrainConfig& config,
                               const SystemConfig& system, int dataset_size);

}  // namespace onebit

#include "onebit/baselines.hpp"

namespace onebit {

namespace {

ModelDescriptor descriptor_for(ModelKind kind, const PairedDataset& data) {
  ModelDescriptor d;
  d.kind = kind;
  d.dims = {data.system.antennas, data.system.users, data.system.pilot_length};
  return d;
}

}  // namespace

TrainedEstimator train_unet_l2(const PairedDataset& data, const GeneratorSpec& spec, const TrainConfig& config,
                               const EpochCallback& on_epoch) {
  ModelDescriptor d = descriptor_for(ModelKind::unet, data);
  d.generator = spec;
  d.generator.skip_connections = true;
  return train(data, d, config, on_epoch);
}

TrainedEstimator train_cnn(const PairedDataset& data, const GeneratorSpec& spec, const TrainConfig& config,
                           const EpochCallback& on_epoch) {
  ModelDescriptor d = descriptor_for(ModelKind::cnn, data);
  d.generator = spec;
  d.generator.skip_connections = false;
  return train(data, d, config, on_epoch);
}

TrainedEstimator train_mlp(const PairedDataset& data, const MlpSpec& spec, const TrainConfig& config,
                           const EpochCallback& on_epoch) {
  ModelDescriptor d = descriptor_for(ModelKind::mlp, data);
  d.mlp = spec;
  return train(data, d, config, on_epoch);
}

TrainedEstimator train_cgan(const PairedDataset& data, const GeneratorSpec& generator,
                            const DiscriminatorSpec& discriminator, const TrainConfig& config,
                            const EpochCallback& on_epoch) {
  ModelDescriptor d = descriptor_for(ModelKind::cgan, data);
  d.generator = generator;
  d.generator.skip_connections = true;
  d.discriminator = discriminator;
  return train(data, d, config, on_epoch);
}

}  // namespace onebit

#pragma once

#include "onebit/cgan.hpp"
#include "onebit/gamp.hpp"

namespace onebit {

/// The cGAN generator architecture trained with the L2 loss alone.
TrainedEstimator train_unet_l2(const PairedDataset& data, const GeneratorSpec& spec, const TrainConfig& config,
                               const EpochCallback& on_epoch = {});

/// The generator's layer stack without skip connections, trained with the L2 loss.
TrainedEstimator train_cnn(const PairedDataset& data, const GeneratorSpec& spec, const TrainConfig& config,
                           const EpochCallback& on_epoch = {});

/// Fully connected network with the generator's layer count, trained with the L2 loss.
TrainedEstimator train_mlp(const PairedDataset& data, const MlpSpec& spec, const TrainConfig& config,
                           const EpochCallback& on_epoch = {});

/// The conditional GAN itself.
TrainedEstimator train_cgan(const PairedDataset& data, const GeneratorSpec& generator,
                            const DiscriminatorSpec& discriminator, const TrainConfig& config,
                            const EpochCallback& on_epoch = {});

}  // namespace onebit

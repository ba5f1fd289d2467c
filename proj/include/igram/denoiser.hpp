#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "igram/net.hpp"
#include "igram/preprocess.hpp"
#include "igram/raster.hpp"

namespace igram {

// Convolutional autoencoder for interferogram denoising. Input and output
// are two-channel (real, imaginary) maps in [0, 2].
struct DenoiserModel {
    LayerStack stack;
};

// Canonical denoiser structure:
// conv2-8:relu, conv8-16:relu, pool3, conv16-16:relu, up3,
// conv16-8:relu, conv8-2:relu
DenoiserModel build_denoiser(std::uint64_t seed);

struct TrainConfig {
    int patch_size = 60;
    int patches_per_image = 500;
    int epochs = 50;
    int batch_size = 32;
    std::uint64_t seed = 1;
    AdamConfig adam;
};

// Random square patches (channels-first tensors) cut from a normalized
// interferogram; positions are uniform and reproducible from the seed.
std::vector<NetTensor> extract_patches(const NormalizedPair& normalized, int size,
                                       int count, std::uint64_t seed);

using EpochCallback = std::function<void(int epoch, double loss)>;

struct DenoiserTraining {
    DenoiserModel model;
    std::vector<double> loss_history;  // mean per-patch loss, one entry per epoch
};

// Unsupervised training: every patch is its own target. Patch order is
// reshuffled each epoch from the config seed; updates use Adam on mean
// minibatch loss. Strictly sequential so results depend only on the seed.
DenoiserTraining train_denoiser(const std::vector<NetTensor>& patches,
                                const TrainConfig& config,
                                const EpochCallback& on_epoch = nullptr);

// Full-raster denoising: preprocess, mirror-pad so the pooling factor
// divides both extents, run the network, clamp to [0, 2], crop, and map back
// to complex samples.
ComplexRaster denoise(const DenoiserModel& model, const ComplexRaster& igram);

}  // namespace igram

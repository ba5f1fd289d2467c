#include "igram/denoiser.hpp"

#include <algorithm>
#include <stdexcept>

#include "igram/rng.hpp"

namespace igram {

DenoiserModel build_denoiser(std::uint64_t seed) {
    Rng rng(seed);
    DenoiserModel model;
    auto& items = model.stack.items;
    items.push_back(StackItem::make_conv(make_conv_layer(2, 8, Activation::Relu, rng)));
    items.push_back(StackItem::make_conv(make_conv_layer(8, 16, Activation::Relu, rng)));
    items.push_back(StackItem::make_pool(3));
    items.push_back(StackItem::make_conv(make_conv_layer(16, 16, Activation::Relu, rng)));
    items.push_back(StackItem::make_upsample(3));
    items.push_back(StackItem::make_conv(make_conv_layer(16, 8, Activation::Relu, rng)));
    items.push_back(StackItem::make_conv(make_conv_layer(8, 2, Activation::Relu, rng)));
    return model;
}

std::vector<NetTensor> extract_patches(const NormalizedPair& normalized, int size,
                                       int count, std::uint64_t seed) {
    const NetTensor& src = normalized.channels;
    if (src.rank() != 3) throw std::invalid_argument("expected a (C, H, W) tensor");
    const int c_count = src.extent(0);
    const int h = src.extent(1);
    const int w = src.extent(2);
    if (size < 1 || size > h || size > w) {
        throw std::invalid_argument("patch size exceeds the raster extents");
    }
    if (count < 0) throw std::invalid_argument("patch count must be non-negative");

    Rng rng(seed);
    std::vector<NetTensor> patches;
    patches.reserve(static_cast<std::size_t>(count));
    for (int p = 0; p < count; ++p) {
        const int y0 = rng.uniform_int(0, h - size);
        const int x0 = rng.uniform_int(0, w - size);
        NetTensor patch({c_count, size, size});
        for (int c = 0; c < c_count; ++c) {
            for (int y = 0; y < size; ++y) {
                const double* row = src.values.data() +
                                    (static_cast<std::size_t>(c) * h + (y0 + y)) * w + x0;
                double* dst =
                    patch.values.data() + (static_cast<std::size_t>(c) * size + y) * size;
                std::copy(row, row + size, dst);
            }
        }
        patches.push_back(std::move(patch));
    }
    return patches;
}

DenoiserTraining train_denoiser(const std::vector<NetTensor>& patches,
                                const TrainConfig& config, const EpochCallback& on_epoch) {
    DenoiserTraining result;
    result.model = build_denoiser(config.seed);
    result.loss_history =
        train_stack(result.model.stack, patches, patches, config.epochs, config.batch_size,
                    config.seed, config.adam, 0.0, on_epoch);
    return result;
}

ComplexRaster denoise(const DenoiserModel& model, const ComplexRaster& igram) {
    const NormalizedPair pre = preprocess_interferogram(igram);
    const int h = igram.height;
    const int w = igram.width;

    // The pool3/up3 pair needs extents divisible by 3; mirror-pad on the
    // bottom/right and crop afterwards.
    const int ph = (h + 2) / 3 * 3;
    const int pw = (w + 2) / 3 * 3;
    NetTensor input({2, ph, pw});
    for (int c = 0; c < 2; ++c) {
        for (int y = 0; y < ph; ++y) {
            const int sy = mirror_index(y, h);
            const double* src =
                pre.channels.values.data() + (static_cast<std::size_t>(c) * h + sy) * w;
            double* dst = input.values.data() + (static_cast<std::size_t>(c) * ph + y) * pw;
            for (int x = 0; x < pw; ++x) dst[x] = src[mirror_index(x, w)];
        }
    }

    NetTensor out = stack_forward(model.stack, input);
    for (double& v : out.values) v = std::clamp(v, 0.0, 2.0);

    NetTensor cropped({2, h, w});
    for (int c = 0; c < 2; ++c) {
        for (int y = 0; y < h; ++y) {
            const double* src = out.values.data() + (static_cast<std::size_t>(c) * ph + y) * pw;
            double* dst = cropped.values.data() + (static_cast<std::size_t>(c) * h + y) * w;
            std::copy(src, src + w, dst);
        }
    }
    return denormalize(cropped, pre.scale);
}

}  // namespace igram

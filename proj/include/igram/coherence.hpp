#pragma once

#include <cstdint>
#include <vector>

#include "igram/net.hpp"
#include "igram/preprocess.hpp"
#include "igram/raster.hpp"

namespace igram {

// Windowed complex cross-correlation magnitude:
//   |sum u1 * conj(u2)| / sqrt(sum |u1|^2 * sum |u2|^2)
// over a centered window x window neighbourhood with mirrored borders.
// Windows with zero energy in either input map to 0; results are clamped to
// [0, 1]. The compensation phase is taken as zero.
CoherenceMap raw_coherence(const ComplexRaster& u1, const ComplexRaster& u2,
                           int window = 11);

struct ChanVeseParams {
    double mu_scale = 0.1;   // boundary weight = mu_scale * (value range)^2
    double lambda1 = 1.0;    // data term weight, class 1
    double lambda2 = 1.0;    // data term weight, class 2
    double flip_tolerance = 1e-4;  // stop when flipped fraction drops below
    int max_iters = 500;
};

// Two-phase segmentation result: per-pixel region ids over the 4-connected
// components of the binary labeling, plus a coherent flag per region.
struct LabelMap {
    int height = 0;
    int width = 0;
    std::vector<std::int32_t> region_ids;
    std::vector<std::uint8_t> region_coherent;

    int region_count() const { return static_cast<int>(region_coherent.size()); }
    std::int32_t region_at(int y, int x) const {
        return region_ids[static_cast<std::size_t>(y) * width + x];
    }
    bool coherent_at(int y, int x) const {
        return region_coherent[static_cast<std::size_t>(region_at(y, x))] != 0;
    }
};

// Piecewise-constant two-phase Chan-Vese minimization, run as deterministic
// label flips over raster sweeps with class means refreshed between sweeps.
// Initial labels follow the checkerboard sign of sin(pi*x/5)*sin(pi*y/5).
// The class with the higher mean value is flagged coherent. When
// energy_trace is non-null it receives the energy of the initial labeling
// and of the labeling after each sweep (computed from scratch with the
// labeling's own class means); the sequence is non-increasing.
LabelMap chan_vese_segment(const CoherenceMap& map, const ChanVeseParams& params = {},
                           std::vector<double>* energy_trace = nullptr);

// Training targets: coherent pixels become 1.0; each incoherent component is
// set uniformly to clamp(mean - population std, 0, 1) of its raw values.
CoherenceMap preprocess_targets(const CoherenceMap& raw, const LabelMap& labels);

// CNN estimating coherence directly from the normalized interferogram.
struct CoherenceModel {
    LayerStack stack;
    double lambda = 1e-3;  // weight-std penalty weight for the regularized layer
};

// conv2-8:relu, conv8-16:relu, conv16-8:relu (weight-std regularized),
// conv8-1:sigmoid. No pooling or upsampling.
CoherenceModel build_coherence_model(std::uint64_t seed);

struct CoherenceTrainConfig {
    int patch_size = 64;
    int patches_per_image = 500;
    int epochs = 100;
    int batch_size = 32;
    double lambda = 1e-3;
    std::uint64_t seed = 1;
    AdamConfig adam;
};

// Aligned random patches cut from a normalized interferogram and its target
// coherence map: inputs are (2, size, size), targets are (1, size, size).
void extract_patch_pairs(const NormalizedPair& normalized, const CoherenceMap& target,
                         int size, int count, std::uint64_t seed,
                         std::vector<NetTensor>& inputs_out,
                         std::vector<NetTensor>& targets_out);

struct CoherenceTraining {
    CoherenceModel model;
    std::vector<double> loss_history;
};

// Supervised training of the coherence CNN: MSE against the target patches
// plus the weight-std penalty on the regularized layer.
CoherenceTraining train_coherence(const std::vector<NetTensor>& noisy_patches,
                                  const std::vector<NetTensor>& target_patches,
                                  const CoherenceTrainConfig& config,
                                  const EpochCallback& on_epoch = nullptr);

// Whole-raster inference: preprocess, forward (sizes are preserved — the
// stack has no resampling), return the single-channel map.
CoherenceMap estimate_coherence(const CoherenceModel& model, const ComplexRaster& raster);

}  // namespace igram

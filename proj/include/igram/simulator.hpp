#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "igram/raster.hpp"

namespace igram {

// Scene composition parameters. All ranges are sampled uniformly; counts are
// inclusive integer ranges. Phase features are expressed in radians.
struct SceneConfig {
    int height = 256;
    int width = 256;

    int bubbles_min = 1;
    int bubbles_max = 5;
    double bubble_amplitude = 6.0 * 3.14159265358979323846;  // +/- range
    double bubble_sigma_min = 8.0;
    double bubble_sigma_max = 40.0;

    int roads_min = 0;
    int roads_max = 3;
    double road_width_min = 3.0;
    double road_width_max = 8.0;
    double road_slope_min = 0.05;  // rad per pixel along the road
    double road_slope_max = 0.3;

    int buildings_min = 0;
    int buildings_max = 5;
    double building_extent_min = 10.0;
    double building_extent_max = 40.0;
    double building_offset = 3.14159265358979323846;  // +/- range

    double sigma_min = 0.2;  // noise standard deviation field bounds
    double sigma_max = 2.0;
    int sigma_grid_step = 32;  // coarse-grid spacing of the smooth sigma field

    std::uint64_t seed = 1;  // default master seed for dataset generation
};

struct SimulatedScene {
    PhaseRaster clean_phase;     // unwrapped radians
    ComplexRaster noisy;         // e^{j phi} + circular complex noise
    CoherenceMap true_coherence;  // (1 + sigma^2)^(-1/2)
    std::vector<float> sigma;    // per-pixel noise standard deviation
};

// Clean unwrapped phase: Gaussian bubbles plus road ramps confined to strips
// plus constant offsets inside building rectangles. Deterministic per seed.
PhaseRaster simulate_clean(const SceneConfig& config, std::uint64_t seed);

// Unit-amplitude signal e^{j phi} plus circular complex Gaussian noise whose
// per-pixel standard deviation sigma comes from a smooth random field
// (bilinear upsampling of a coarse uniform grid in [sigma_min, sigma_max]).
// The total noise variance sigma^2 is split evenly between the real and
// imaginary components. gamma_true = (1 + sigma^2)^(-1/2).
SimulatedScene add_noise(const PhaseRaster& clean, const SceneConfig& config,
                         std::uint64_t seed);

struct DatasetEntry {
    int index = 0;
    std::uint64_t seed = 0;  // per-scene seed, derived from the master seed
    std::string phase_path;
    std::string igram_path;
    std::string coherence_path;
};

struct DatasetManifest {
    std::string directory;  // directory the relative paths resolve against
    std::vector<DatasetEntry> entries;

    std::string resolve(const std::string& relative) const;
};

// Generates n scenes and writes clean phase (PHSE), noisy interferogram
// (IGRM) and true coherence (COHR) per scene plus a manifest file
// ("manifest.txt": one line per scene with index, seed, and the three file
// names). Per-scene seeds derive from the master seed by index, so any
// subset regenerates bit-identically.
DatasetManifest make_dataset(int count, const SceneConfig& config, std::uint64_t seed,
                             const std::string& out_dir);

DatasetManifest read_manifest(const std::string& path);

}  // namespace igram

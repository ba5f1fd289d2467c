#pragma once

#include "igram/raster.hpp"

namespace igram {

// Complex moving average over a k x k mirror-extended neighbourhood.
ComplexRaster boxcar_filter(const ComplexRaster& raster, int k);

struct GoldsteinParams {
    double alpha = 0.5;     // spectrum exponent, >= 0
    int patch_size = 32;    // power of two
    int overlap = 16;       // < patch_size
    int smooth_kernel = 3;  // odd, spectrum magnitude smoothing
};

// Patch-FFT filter: each overlapping tile's spectrum S is replaced by
// S * (smoothed |S|)^alpha and the tiles are recombined with a raised-cosine
// (periodic Hann) blend normalized so constant inputs reconstruct exactly.
// alpha = 0 reduces to the identity up to round-off.
ComplexRaster goldstein_filter(const ComplexRaster& raster,
                               const GoldsteinParams& params = {});

// Windowed coherence with the same machinery as raw_coherence; provided as a
// baseline entry point with window k.
CoherenceMap baseline_coherence(const ComplexRaster& u1, const ComplexRaster& u2, int k);

}  // namespace igram

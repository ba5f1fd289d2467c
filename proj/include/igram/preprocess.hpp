#pragma once

#include <cstdint>
#include <vector>

#include "igram/raster.hpp"
#include "igram/tensor.hpp"

namespace igram {

// Per-pixel outlier flags for amplitude saturation.
struct OutlierMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> flags;  // 1 = outlier

    OutlierMask() = default;
    OutlierMask(int h, int w)
        : height(h), width(w), flags(ComplexRaster::checked_area(h, w), 0) {}

    std::size_t count() const;
};

// Interferogram mapped to network inputs: two channels (real, imaginary)
// shifted into [0, 2], plus the amplitude scale needed to undo the mapping.
struct NormalizedPair {
    NetTensor channels;  // shape (2, H, W)
    float scale = 1.0f;  // max inlier amplitude used for normalization
};

// Flags amplitude outliers with the modified z-score rule: a pixel is an
// outlier when |0.6745 * (a - median) / MAD| exceeds 3.5. When the MAD is
// zero the fallback score 0.7979 * (a - median) / meanAD is used; if both
// spreads are zero nothing is flagged.
OutlierMask detect_outliers(const ComplexRaster& igram);

// Clamps flagged pixels to the largest non-flagged amplitude while keeping
// their phase. Zero-amplitude pixels are left untouched.
ComplexRaster saturate_amplitudes(const ComplexRaster& igram, const OutlierMask& mask);

// Divides by the maximum amplitude (shared across both channels) and adds 1,
// mapping real and imaginary parts into [0, 2]. A raster that is entirely
// zero has no usable scale and is rejected.
NormalizedPair normalize_shift(const ComplexRaster& igram);

// Inverse of normalize_shift: subtract 1, multiply by the stored scale.
ComplexRaster denormalize(const NetTensor& channels, float scale);

// detect + saturate + normalize in one call.
NormalizedPair preprocess_interferogram(const ComplexRaster& igram);

}  // namespace igram

#include "igram/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace igram {

namespace {

// Conventional median: mean of the two central order statistics for even n.
double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double hi = v[mid];
    if (n % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid) - 1,
                     v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (v[mid - 1] + hi);
}

}  // namespace

std::size_t OutlierMask::count() const {
    std::size_t n = 0;
    for (std::uint8_t f : flags) n += f;
    return n;
}

OutlierMask detect_outliers(const ComplexRaster& igram) {
    const std::size_t n = igram.area();
    std::vector<double> amp(n);
    for (std::size_t i = 0; i < n; ++i) amp[i] = std::abs(igram.samples[i]);

    const double med = median_of(amp);
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) dev[i] = std::abs(amp[i] - med);
    const double mad = median_of(dev);

    OutlierMask mask(igram.height, igram.width);
    constexpr double kThreshold = 3.5;
    if (mad > 0.0) {
        const double scale = 0.6745 / mad;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(scale * (amp[i] - med)) > kThreshold) mask.flags[i] = 1;
        }
        return mask;
    }
    double mean_ad = 0.0;
    for (double d : dev) mean_ad += d;
    mean_ad /= static_cast<double>(n);
    if (mean_ad > 0.0) {
        const double scale = 0.7979 / mean_ad;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(scale * (amp[i] - med)) > kThreshold) mask.flags[i] = 1;
        }
    }
    // Both spread estimates zero: every amplitude equals the median, nothing
    // to flag.
    return mask;
}

ComplexRaster saturate_amplitudes(const ComplexRaster& igram, const OutlierMask& mask) {
    if (mask.height != igram.height || mask.width != igram.width) {
        throw std::invalid_argument("outlier mask shape mismatch");
    }
    double max_inlier = 0.0;
    bool has_inlier = false;
    for (std::size_t i = 0; i < igram.area(); ++i) {
        if (mask.flags[i]) continue;
        has_inlier = true;
        max_inlier = std::max(max_inlier, static_cast<double>(std::abs(igram.samples[i])));
    }
    ComplexRaster out = igram;
    if (!has_inlier) return out;
    for (std::size_t i = 0; i < out.area(); ++i) {
        if (!mask.flags[i]) continue;
        const double a = std::abs(out.samples[i]);
        if (a <= 0.0) continue;  // zero stays zero, no phase to preserve
        const float f = static_cast<float>(max_inlier / a);
        out.samples[i] *= f;
    }
    return out;
}

NormalizedPair normalize_shift(const ComplexRaster& igram) {
    double max_amp = 0.0;
    for (const auto& z : igram.samples) {
        max_amp = std::max(max_amp, static_cast<double>(std::abs(z)));
    }
    if (max_amp <= 0.0) {
        throw std::invalid_argument("cannot normalize an all-zero raster: scale undefined");
    }
    NormalizedPair out;
    out.scale = static_cast<float>(max_amp);
    out.channels = NetTensor({2, igram.height, igram.width});
    const double inv = 1.0 / static_cast<double>(out.scale);
    const std::size_t plane = igram.area();
    for (std::size_t i = 0; i < plane; ++i) {
        out.channels.values[i] = static_cast<double>(igram.samples[i].real()) * inv + 1.0;
        out.channels.values[plane + i] =
            static_cast<double>(igram.samples[i].imag()) * inv + 1.0;
    }
    return out;
}

ComplexRaster denormalize(const NetTensor& channels, float scale) {
    if (channels.rank() != 3 || channels.extent(0) != 2) {
        throw std::invalid_argument("denormalize expects a (2, H, W) tensor");
    }
    ComplexRaster out(channels.extent(1), channels.extent(2));
    const std::size_t plane = out.area();
    for (std::size_t i = 0; i < plane; ++i) {
        const double re = (channels.values[i] - 1.0) * scale;
        const double im = (channels.values[plane + i] - 1.0) * scale;
        out.samples[i] = std::complex<float>(static_cast<float>(re), static_cast<float>(im));
    }
    return out;
}

NormalizedPair preprocess_interferogram(const ComplexRaster& igram) {
    const OutlierMask mask = detect_outliers(igram);
    const ComplexRaster saturated = saturate_amplitudes(igram, mask);
    return normalize_shift(saturated);
}

}  // namespace igram

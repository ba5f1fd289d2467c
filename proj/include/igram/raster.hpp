#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace igram {

// Single-look complex interferogram: row-major complex samples.
struct ComplexRaster {
    int height = 0;
    int width = 0;
    std::vector<std::complex<float>> samples;

    ComplexRaster() = default;
    ComplexRaster(int h, int w)
        : height(h), width(w),
          samples(checked_area(h, w), std::complex<float>(0.0f, 0.0f)) {}

    std::size_t area() const { return samples.size(); }
    std::complex<float>& at(int y, int x) {
        return samples[static_cast<std::size_t>(y) * width + x];
    }
    std::complex<float> at(int y, int x) const {
        return samples[static_cast<std::size_t>(y) * width + x];
    }

    static std::size_t checked_area(int h, int w) {
        if (h < 1 || w < 1) throw std::invalid_argument("raster extents must be positive");
        return static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    }
};

// Scalar raster in [0, 1]; the container itself does not re-check the range,
// readers and producers enforce it at the boundaries.
struct CoherenceMap {
    int height = 0;
    int width = 0;
    std::vector<float> values;

    CoherenceMap() = default;
    CoherenceMap(int h, int w)
        : height(h), width(w), values(ComplexRaster::checked_area(h, w), 0.0f) {}

    float& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
    float at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

// Scalar phase raster in radians (wrapped or unwrapped depending on context).
struct PhaseRaster {
    int height = 0;
    int width = 0;
    std::vector<float> values;

    PhaseRaster() = default;
    PhaseRaster(int h, int w)
        : height(h), width(w), values(ComplexRaster::checked_area(h, w), 0.0f) {}

    float& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
    float at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

// Mirror (reflect-without-repeat) index into [0, n): ... 2 1 | 0 1 2 | 1 0 ...
inline int mirror_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - m;
}

inline PhaseRaster phase_of(const ComplexRaster& z) {
    PhaseRaster out(z.height, z.width);
    for (std::size_t i = 0; i < z.samples.size(); ++i) {
        out.values[i] = std::arg(z.samples[i]);
    }
    return out;
}

}  // namespace igram

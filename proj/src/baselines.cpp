#include "igram/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "igram/coherence.hpp"
#include "igram/fft.hpp"
#include "igram/parallel.hpp"

namespace igram {

ComplexRaster boxcar_filter(const ComplexRaster& raster, int k) {
    if (k < 1 || k % 2 == 0) {
        throw std::invalid_argument("boxcar window must be odd and positive");
    }
    const int h = raster.height;
    const int w = raster.width;
    const int r = k / 2;
    const int eh = h + 2 * r;
    const int ew = w + 2 * r;

    // Mirror-extended component fields with inclusive prefix sums.
    std::vector<double> re(static_cast<std::size_t>(eh) * ew);
    std::vector<double> im(re.size());
    for (int y = 0; y < eh; ++y) {
        const int sy = mirror_index(y - r, h);
        for (int x = 0; x < ew; ++x) {
            const int sx = mirror_index(x - r, w);
            const std::complex<float> z = raster.at(sy, sx);
            re[static_cast<std::size_t>(y) * ew + x] = z.real();
            im[static_cast<std::size_t>(y) * ew + x] = z.imag();
        }
    }
    const int sw = ew + 1;
    const auto prefix = [eh, ew, sw](std::vector<double>& f) {
        std::vector<double> s(static_cast<std::size_t>(eh + 1) * sw, 0.0);
        for (int y = 0; y < eh; ++y) {
            double row = 0.0;
            for (int x = 0; x < ew; ++x) {
                row += f[static_cast<std::size_t>(y) * ew + x];
                s[static_cast<std::size_t>(y + 1) * sw + x + 1] =
                    s[static_cast<std::size_t>(y) * sw + x + 1] + row;
            }
        }
        return s;
    };
    const std::vector<double> sre = prefix(re);
    const std::vector<double> sim = prefix(im);
    const double inv_area = 1.0 / (static_cast<double>(k) * k);

    ComplexRaster out(h, w);
    parallel_chunks(h, [&](int y_begin, int y_end) {
        for (int y = y_begin; y < y_end; ++y) {
            const std::size_t top = static_cast<std::size_t>(y) * sw;
            const std::size_t bot = static_cast<std::size_t>(y + k) * sw;
            for (int x = 0; x < w; ++x) {
                const double zr =
                    sre[bot + x + k] - sre[bot + x] - sre[top + x + k] + sre[top + x];
                const double zi =
                    sim[bot + x + k] - sim[bot + x] - sim[top + x + k] + sim[top + x];
                out.at(y, x) = std::complex<float>(static_cast<float>(zr * inv_area),
                                                   static_cast<float>(zi * inv_area));
            }
        }
    });
    return out;
}

ComplexRaster goldstein_filter(const ComplexRaster& raster, const GoldsteinParams& params) {
    if (!is_power_of_two(params.patch_size)) {
        throw std::invalid_argument("goldstein patch size must be a power of two");
    }
    if (params.overlap < 1 || params.overlap >= params.patch_size) {
        throw std::invalid_argument("goldstein overlap must be in [1, patch_size)");
    }
    if (params.alpha < 0.0) {
        throw std::invalid_argument("goldstein alpha must be non-negative");
    }
    if (params.smooth_kernel < 1 || params.smooth_kernel % 2 == 0) {
        throw std::invalid_argument("goldstein smoothing kernel must be odd");
    }
    const int h = raster.height;
    const int w = raster.width;
    const int p = params.patch_size;
    const int hop = p - params.overlap;

    // Mirror padding: a full overlap on the top/left, and enough on the
    // bottom/right that tiles stepping by hop land exactly on the far edge.
    const auto pad_after = [&](int extent) {
        int pad = params.overlap;
        while ((extent + params.overlap + pad - p) % hop != 0 ||
               extent + params.overlap + pad < p) {
            ++pad;
        }
        return pad;
    };
    const int pad_top = params.overlap;
    const int pad_left = params.overlap;
    const int pad_bottom = pad_after(h);
    const int pad_right = pad_after(w);
    const int ph = h + pad_top + pad_bottom;
    const int pw = w + pad_left + pad_right;

    std::vector<std::complex<double>> padded(static_cast<std::size_t>(ph) * pw);
    for (int y = 0; y < ph; ++y) {
        const int sy = mirror_index(y - pad_top, h);
        for (int x = 0; x < pw; ++x) {
            padded[static_cast<std::size_t>(y) * pw + x] = raster.at(sy, mirror_index(x - pad_left, w));
        }
    }

    // Periodic Hann taper; overlapping tapers are renormalized by their
    // accumulated sum, which is exactly constant where tile spacing divides
    // the patch, so constants reconstruct exactly.
    std::vector<double> taper(static_cast<std::size_t>(p));
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    for (int i = 0; i < p; ++i) taper[static_cast<std::size_t>(i)] = 0.5 * (1.0 - std::cos(kTwoPi * i / p));

    std::vector<std::complex<double>> acc(padded.size(), {0.0, 0.0});
    std::vector<double> weight(padded.size(), 0.0);

    const int tiles_y = (ph - p) / hop + 1;
    const int tiles_x = (pw - p) / hop + 1;
    const int s = params.smooth_kernel;
    const int sr = s / 2;

    std::vector<std::complex<double>> tile(static_cast<std::size_t>(p) * p);
    std::vector<double> mag(tile.size());
    std::vector<double> smooth(tile.size());
    for (int ty = 0; ty < tiles_y; ++ty) {
        for (int tx = 0; tx < tiles_x; ++tx) {
            const int y0 = ty * hop;
            const int x0 = tx * hop;
            for (int y = 0; y < p; ++y) {
                const std::complex<double>* src =
                    padded.data() + static_cast<std::size_t>(y0 + y) * pw + x0;
                std::copy(src, src + p, tile.data() + static_cast<std::size_t>(y) * p);
            }
            fft_2d(tile, p, p, false);
            if (params.alpha > 0.0) {
                for (std::size_t i = 0; i < tile.size(); ++i) mag[i] = std::abs(tile[i]);
                // 3x3 (or s x s) uniform smoothing with periodic wrap: the
                // spectrum is cyclic in both axes.
                const double inv_area = 1.0 / (static_cast<double>(s) * s);
                for (int y = 0; y < p; ++y) {
                    for (int x = 0; x < p; ++x) {
                        double sum = 0.0;
                        for (int dy = -sr; dy <= sr; ++dy) {
                            const int yy = (y + dy + p) % p;
                            for (int dx = -sr; dx <= sr; ++dx) {
                                const int xx = (x + dx + p) % p;
                                sum += mag[static_cast<std::size_t>(yy) * p + xx];
                            }
                        }
                        smooth[static_cast<std::size_t>(y) * p + x] = sum * inv_area;
                    }
                }
                for (std::size_t i = 0; i < tile.size(); ++i) {
                    tile[i] *= std::pow(smooth[i], params.alpha);
                }
            }
            fft_2d(tile, p, p, true);
            for (int y = 0; y < p; ++y) {
                const double wy = taper[static_cast<std::size_t>(y)];
                std::complex<double>* dst =
                    acc.data() + static_cast<std::size_t>(y0 + y) * pw + x0;
                double* wdst = weight.data() + static_cast<std::size_t>(y0 + y) * pw + x0;
                const std::complex<double>* src = tile.data() + static_cast<std::size_t>(y) * p;
                for (int x = 0; x < p; ++x) {
                    const double wxy = wy * taper[static_cast<std::size_t>(x)];
                    dst[x] += wxy * src[x];
                    wdst[x] += wxy;
                }
            }
        }
    }

    ComplexRaster out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i =
                static_cast<std::size_t>(y + pad_top) * pw + (x + pad_left);
            const double ww = weight[i];
            const std::complex<double> v = ww > 1e-12 ? acc[i] / ww : std::complex<double>(0.0, 0.0);
            out.at(y, x) = std::complex<float>(static_cast<float>(v.real()),
                                               static_cast<float>(v.imag()));
        }
    }
    return out;
}

CoherenceMap baseline_coherence(const ComplexRaster& u1, const ComplexRaster& u2, int k) {
    return raw_coherence(u1, u2, k);
}

}  // namespace igram

#include "igram/fft.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace igram {

void fft_1d(std::complex<double>* data, int n, bool inverse) {
    if (!is_power_of_two(n)) {
        throw std::invalid_argument("fft size must be a power of two");
    }
    // Bit-reversal permutation.
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    for (int len = 2; len <= n; len <<= 1) {
        const double angle = (inverse ? kTwoPi : -kTwoPi) / len;
        const std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (int i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (int k = 0; k < len / 2; ++k) {
                const std::complex<double> even = data[i + k];
                const std::complex<double> odd = data[i + k + len / 2] * w;
                data[i + k] = even + odd;
                data[i + k + len / 2] = even - odd;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / n;
        for (int i = 0; i < n; ++i) data[i] *= inv;
    }
}

void fft_2d(std::vector<std::complex<double>>& data, int rows, int cols, bool inverse) {
    if (static_cast<std::size_t>(rows) * cols != data.size()) {
        throw std::invalid_argument("fft_2d buffer does not match the extents");
    }
    for (int y = 0; y < rows; ++y) {
        fft_1d(data.data() + static_cast<std::size_t>(y) * cols, cols, inverse);
    }
    std::vector<std::complex<double>> column(static_cast<std::size_t>(rows));
    for (int x = 0; x < cols; ++x) {
        for (int y = 0; y < rows; ++y) {
            column[static_cast<std::size_t>(y)] = data[static_cast<std::size_t>(y) * cols + x];
        }
        fft_1d(column.data(), rows, inverse);
        for (int y = 0; y < rows; ++y) {
            data[static_cast<std::size_t>(y) * cols + x] = column[static_cast<std::size_t>(y)];
        }
    }
}

}  // namespace igram

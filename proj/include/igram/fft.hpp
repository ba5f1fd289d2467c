#pragma once

#include <complex>
#include <vector>

namespace igram {

// In-place iterative radix-2 complex FFT. n must be a power of two. The
// forward transform is unscaled; the inverse divides by n, so applying
// forward then inverse returns the input.
void fft_1d(std::complex<double>* data, int n, bool inverse);

// Row-column 2D FFT over a row-major rows x cols buffer; both extents must
// be powers of two.
void fft_2d(std::vector<std::complex<double>>& data, int rows, int cols, bool inverse);

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace igram

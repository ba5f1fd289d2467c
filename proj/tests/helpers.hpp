#pragma once

// Shared fixtures and independent reference implementations ("oracles") for
// the unit and acceptance suites. Everything here is deliberately written
// with different algorithms than the library (direct summation, quadruple
// loops) so agreement between the two is meaningful.

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "igram/net.hpp"
#include "igram/raster.hpp"
#include "igram/rng.hpp"
#include "igram/tensor.hpp"

namespace testutil {

// Relative error with an absolute floor so comparisons of near-zero
// gradients stay meaningful: FD noise is ~1e-8 on O(1) values.
inline double rel_err(double a, double b) {
    const double scale = std::max({std::fabs(a), std::fabs(b), 1e-4});
    return std::fabs(a - b) / scale;
}

inline igram::NetTensor random_tensor(std::vector<int> shape, std::uint64_t seed,
                                      double lo = -1.0, double hi = 1.0) {
    igram::NetTensor t(std::move(shape));
    igram::Rng rng(seed);
    for (double& v : t.values) v = rng.uniform(lo, hi);
    return t;
}

// Complex raster with uniform random phases and amplitudes in [amp_lo, amp_hi].
inline igram::ComplexRaster random_raster(int h, int w, std::uint64_t seed,
                                          double amp_lo = 0.5, double amp_hi = 1.5) {
    igram::ComplexRaster out(h, w);
    igram::Rng rng(seed);
    constexpr double kPi = 3.14159265358979323846;
    for (auto& z : out.samples) {
        const double a = rng.uniform(amp_lo, amp_hi);
        const double p = rng.uniform(-kPi, kPi);
        z = std::complex<float>(static_cast<float>(a * std::cos(p)),
                                static_cast<float>(a * std::sin(p)));
    }
    return out;
}

// Direct-summation convolution: quadruple loop over output pixel and kernel
// tap, zero padding of one, activation applied at the end. Independent of
// conv2d_forward's padded-buffer/saxpy implementation.
inline igram::NetTensor conv_reference(const igram::NetTensor& input,
                                       const igram::ConvLayer& layer) {
    const int c_count = input.extent(0);
    const int h = input.extent(1);
    const int w = input.extent(2);
    const int o_count = layer.out_channels();
    igram::NetTensor out({o_count, h, w});
    for (int o = 0; o < o_count; ++o) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = layer.bias.values[static_cast<std::size_t>(o)];
                for (int c = 0; c < c_count; ++c) {
                    for (int ky = 0; ky < 3; ++ky) {
                        for (int kx = 0; kx < 3; ++kx) {
                            const int sy = y + ky - 1;
                            const int sx = x + kx - 1;
                            if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
                            const double kv =
                                layer.kernels
                                    .values[((static_cast<std::size_t>(o) * c_count + c) * 3 +
                                             ky) *
                                                3 +
                                            kx];
                            const double iv =
                                input.values[(static_cast<std::size_t>(c) * h + sy) * w + sx];
                            acc += kv * iv;
                        }
                    }
                }
                out.values[(static_cast<std::size_t>(o) * h + y) * w + x] =
                    igram::activation_apply(acc, layer.activation);
            }
        }
    }
    return out;
}

// Scalar objective over a stack: a fixed pseudo-random weighting of the
// outputs. Smooth in every parameter, so central differences apply.
struct WeightedSumLoss {
    igram::NetTensor weights;

    explicit WeightedSumLoss(const std::vector<int>& out_shape, std::uint64_t seed)
        : weights(random_tensor(out_shape, seed, -1.0, 1.0)) {}

    double value(const igram::NetTensor& out) const {
        double s = 0.0;
        for (std::size_t i = 0; i < out.values.size(); ++i) {
            s += weights.values[i] * out.values[i];
        }
        return s;
    }
};

struct FdReport {
    double max_rel_err = 0.0;
    int checked = 0;
};

// Central finite differences of loss(stack(input)) against the analytic
// gradients from stack_backward, sweeping the input tensor and every
// parameter tensor. step 1e-4.
inline FdReport fd_check_stack(igram::LayerStack& stack, const igram::NetTensor& input,
                               std::uint64_t loss_seed) {
    const double step = 1e-4;
    igram::StackTrace trace;
    const igram::NetTensor out0 = igram::stack_forward(stack, input, &trace);
    const WeightedSumLoss loss(out0.shape, loss_seed);

    stack.zero_grads();
    igram::NetTensor upstream(out0.shape);
    upstream.values = loss.weights.values;
    const igram::NetTensor input_grad = igram::stack_backward(stack, trace, upstream);

    FdReport report;
    const auto probe = [&](double* slot, double analytic) {
        const double saved = *slot;
        *slot = saved + step;
        const double up = loss.value(igram::stack_forward(stack, input));
        *slot = saved - step;
        const double down = loss.value(igram::stack_forward(stack, input));
        *slot = saved;
        const double numeric = (up - down) / (2.0 * step);
        report.max_rel_err = std::max(report.max_rel_err, rel_err(analytic, numeric));
        ++report.checked;
    };

    igram::NetTensor mutable_input = input;
    for (std::size_t i = 0; i < mutable_input.values.size(); ++i) {
        const double saved = mutable_input.values[i];
        mutable_input.values[i] = saved + step;
        const double up = loss.value(igram::stack_forward(stack, mutable_input));
        mutable_input.values[i] = saved - step;
        const double down = loss.value(igram::stack_forward(stack, mutable_input));
        mutable_input.values[i] = saved;
        const double numeric = (up - down) / (2.0 * step);
        report.max_rel_err =
            std::max(report.max_rel_err, rel_err(input_grad.values[i], numeric));
        ++report.checked;
    }

    for (igram::NetTensor* param : stack.params()) {
        for (std::size_t i = 0; i < param->values.size(); ++i) {
            probe(&param->values[i], param->grad[i]);
        }
    }
    return report;
}

// ReLU kinks and pool ties are non-differentiable points; reject inputs where
// a finite-difference step could cross one. Returns true when every conv
// pre-activation is at least `margin` away from zero and every pool window
// has a unique max with at least `margin` separation.
inline bool fd_safe(const igram::LayerStack& stack, const igram::NetTensor& input,
                    double margin = 1e-2) {
    igram::NetTensor x = input;
    for (const igram::StackItem& item : stack.items) {
        switch (item.kind) {
            case igram::StackItem::Kind::Conv: {
                igram::NetTensor pre;
                x = igram::conv2d_forward(x, item.conv, &pre);
                if (item.conv.activation == igram::Activation::Relu) {
                    for (double v : pre.values) {
                        if (std::fabs(v) < margin) return false;
                    }
                }
                break;
            }
            case igram::StackItem::Kind::Pool: {
                const int f = item.factor;
                const int c_count = x.extent(0);
                const int h = x.extent(1);
                const int w = x.extent(2);
                for (int c = 0; c < c_count; ++c) {
                    for (int oy = 0; oy < h / f; ++oy) {
                        for (int ox = 0; ox < w / f; ++ox) {
                            double best = -1e300, second = -1e300;
                            for (int dy = 0; dy < f; ++dy) {
                                for (int dx = 0; dx < f; ++dx) {
                                    const double v =
                                        x.values[(static_cast<std::size_t>(c) * h +
                                                  oy * f + dy) *
                                                     w +
                                                 ox * f + dx];
                                    if (v > best) {
                                        second = best;
                                        best = v;
                                    } else if (v > second) {
                                        second = v;
                                    }
                                }
                            }
                            if (f > 1 && best - second < margin) return false;
                        }
                    }
                }
                auto [pooled, idx] = igram::maxpool_forward(x, f);
                x = std::move(pooled);
                break;
            }
            case igram::StackItem::Kind::Upsample:
                x = igram::upsample_nearest(x, item.factor);
                break;
        }
    }
    return true;
}

// Draws inputs until fd_safe accepts one; the seed sweep is deterministic.
inline igram::NetTensor fd_safe_input(const igram::LayerStack& stack,
                                      std::vector<int> shape, std::uint64_t seed) {
    for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
        igram::NetTensor candidate =
            random_tensor(shape, igram::derive_seed(seed, attempt), 0.1, 1.9);
        if (fd_safe(stack, candidate)) return candidate;
    }
    // Fall back to the last candidate; the check will reveal any issue.
    return random_tensor(std::move(shape), igram::derive_seed(seed, 63), 0.1, 1.9);
}

// Unique temporary directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        const auto base = std::filesystem::temp_directory_path();
        for (int i = 0; i < 10000; ++i) {
            auto candidate = base / (tag + "-" + std::to_string(::getpid()) + "-" +
                                     std::to_string(counter_++));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate.string();
                return;
            }
        }
        path_ = (base / (tag + "-fallback")).string();
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::string& path() const { return path_; }
    std::string file(const std::string& name) const {
        return (std::filesystem::path(path_) / name).string();
    }

private:
    static inline int counter_ = 0;
    std::string path_;
};

}  // namespace testutil

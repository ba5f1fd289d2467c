// Micro-benchmark for the convolution kernels: reports forward and backward
// throughput in GMAC/s on denoiser-shaped workloads. Development aid only.
#include <chrono>
#include <cstdio>

#include "igram/denoiser.hpp"
#include "igram/net.hpp"
#include "igram/rng.hpp"

using namespace igram;

int main() {
    const int size = 60;
    DenoiserModel model = build_denoiser(7);
    Rng rng(11);
    NetTensor input({2, size, size});
    for (double& v : input.values) v = rng.uniform(0.0, 2.0);

    // MACs per forward pass of the denoiser stack on a size x size patch.
    const double feature_pixels = static_cast<double>(size) * size;
    const double pooled_pixels = feature_pixels / 9.0;
    const double fwd_mac = 9.0 * (2 * 8 * feature_pixels + 8 * 16 * feature_pixels +
                                  16 * 16 * pooled_pixels + 16 * 8 * feature_pixels +
                                  8 * 2 * feature_pixels);

    const int warmup = 3;
    const int reps = 30;
    StackTrace trace;
    NetTensor out;
    for (int i = 0; i < warmup; ++i) out = stack_forward(model.stack, input, &trace);

    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) out = stack_forward(model.stack, input, &trace);
    auto t1 = std::chrono::steady_clock::now();
    const double fwd_s = std::chrono::duration<double>(t1 - t0).count() / reps;

    LossResult loss = mse_loss(out, input);
    t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) {
        model.stack.zero_grads();
        stack_backward(model.stack, trace, loss.grad);
    }
    t1 = std::chrono::steady_clock::now();
    const double bwd_s = std::chrono::duration<double>(t1 - t0).count() / reps;

    std::printf("forward : %8.3f ms  %6.2f GMAC/s\n", fwd_s * 1e3, fwd_mac / fwd_s / 1e9);
    std::printf("backward: %8.3f ms  %6.2f GMAC/s\n", bwd_s * 1e3,
                2.0 * fwd_mac / bwd_s / 1e9);
    std::printf("train pass (fwd+bwd): %8.3f ms -> %.0f s for 80k patch passes\n",
                (fwd_s + bwd_s) * 1e3, (fwd_s + bwd_s) * 80000.0);
    return 0;
}

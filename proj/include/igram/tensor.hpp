#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "igram/rng.hpp"

namespace igram {

// Dense real tensor with an optional gradient buffer of the same shape.
// Values and gradients are stored in double precision; every reduction in the
// engine accumulates in double with a fixed order, so results are
// reproducible bit for bit on a given build. The gradient buffer starts empty
// and is allocated on first use (zero_grad / ensure_grad); intermediate
// activations never pay for one.
struct NetTensor {
    std::vector<int> shape;
    std::vector<double> values;
    std::vector<double> grad;

    NetTensor() = default;
    explicit NetTensor(std::vector<int> shape_in);

    static NetTensor zeros(std::vector<int> shape_in) { return NetTensor(std::move(shape_in)); }
    static NetTensor full(std::vector<int> shape_in, double v);

    int size() const { return static_cast<int>(values.size()); }
    int rank() const { return static_cast<int>(shape.size()); }
    int extent(int axis) const { return shape[static_cast<std::size_t>(axis)]; }
    // Clears the gradient buffer, allocating it if this tensor has none yet.
    void zero_grad();
    // Allocates a zeroed gradient buffer if there is none; keeps an existing one.
    void ensure_grad();
};

enum class Activation { None, Relu, Sigmoid };

std::string activation_name(Activation kind);
Activation activation_from_name(const std::string& name);

double activation_apply(double x, Activation kind);
// Derivative with respect to the pre-activation value.
double activation_derivative(double pre, Activation kind);

// A 3x3 same-size convolution layer (zero padding of one pixel per side)
// with one bias per output channel and an elementwise activation.
struct ConvLayer {
    NetTensor kernels;  // shape (out_channels, in_channels, 3, 3)
    NetTensor bias;     // shape (out_channels)
    Activation activation = Activation::None;

    int out_channels() const { return kernels.extent(0); }
    int in_channels() const { return kernels.extent(1); }
    int param_count() const { return kernels.size() + bias.size(); }
};

// Xavier-uniform kernels (bounds +/- sqrt(6/(fan_in+fan_out))), zero biases.
ConvLayer make_conv_layer(int in_channels, int out_channels, Activation act, Rng& rng);

// Fills an existing tensor with Xavier-uniform samples drawn from rng.
// fan_in/fan_out follow the tensor rank: rank 4 (O,C,kh,kw) uses C*kh*kw and
// O*kh*kw; rank 2 (O,I) uses I and O; rank 1 uses the length for both.
void xavier_fill(NetTensor& t, Rng& rng);

// Fresh tensor initialised from a dedicated seed.
NetTensor xavier_init(std::vector<int> shape, std::uint64_t seed);

// Forward convolution. input has shape (C, H, W); the result has shape
// (O, H, W). When pre_activation is non-null it receives the linear response
// before the activation (needed by the backward pass).
NetTensor conv2d_forward(const NetTensor& input, const ConvLayer& layer,
                         NetTensor* pre_activation = nullptr);

struct ConvGrads {
    NetTensor input;    // dLoss/dInput, shape of the forward input
    NetTensor kernels;  // dLoss/dKernels, values carry the gradient
    NetTensor bias;     // dLoss/dBias
};

// Reverse-mode gradients for conv2d_forward. upstream is dLoss/dOutput.
// pre_activation may be the buffer captured during the forward pass; when
// null it is recomputed.
ConvGrads conv2d_backward(const NetTensor& input, const ConvLayer& layer,
                          const NetTensor& upstream,
                          const NetTensor* pre_activation = nullptr);

// Max pooling bookkeeping: flat argmax per output cell plus the input shape,
// enough to route gradients back without the input tensor.
struct PoolIndices {
    std::vector<int> input_shape;
    std::vector<std::int32_t> argmax;  // flat index into the pooling input
};

// Non-overlapping factor x factor max pooling. Spatial extents must be
// divisible by the factor. Ties resolve to the first maximum in row-major
// order within the window.
std::pair<NetTensor, PoolIndices> maxpool_forward(const NetTensor& input, int factor);

// Routes upstream gradients to the recorded argmax positions; all other
// positions receive zero.
NetTensor maxpool_backward(const PoolIndices& indices, const NetTensor& upstream);

// Nearest-neighbour upsampling by an integer factor.
NetTensor upsample_nearest(const NetTensor& input, int factor);

// Adjoint of upsample_nearest: sums each factor x factor block of the
// upstream gradient.
NetTensor upsample_nearest_backward(const NetTensor& upstream, int factor);

struct LossResult {
    double value = 0.0;
    NetTensor grad;  // dLoss/dPrediction in .values
};

// Mean squared error over all elements: mean((pred - target)^2).
LossResult mse_loss(const NetTensor& pred, const NetTensor& target);

// Penalty lambda * std(kernels) using the population standard deviation over
// every kernel element of the layer (biases excluded). The gradient
// lambda * (w - mean) / (N * std) is accumulated into layer.kernels.grad and
// the penalty value is returned. A perfectly uniform kernel tensor has zero
// gradient and zero penalty.
double weight_std_penalty(ConvLayer& layer, double lambda);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// First and second moment estimates, one slot per parameter tensor.
struct AdamState {
    AdamConfig config;
    long step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;

    void init(const std::vector<NetTensor*>& params);
    bool matches(const std::vector<NetTensor*>& params) const;
};

// One Adam update with bias correction. Reads each parameter's grad buffer
// and updates values in place; gradients are left untouched so the caller
// decides when to clear them.
void adam_step(const std::vector<NetTensor*>& params, AdamState& state);

}  // namespace igram

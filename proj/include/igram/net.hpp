#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "igram/tensor.hpp"

namespace igram {

// One stage of a sequential network: a convolution, a max pool, or a
// nearest-neighbour upsample.
struct StackItem {
    enum class Kind { Conv, Pool, Upsample };
    Kind kind = Kind::Conv;
    ConvLayer conv;          // valid when kind == Conv
    int factor = 0;          // valid when kind == Pool or Upsample
    bool regularized = false;  // Conv only: weight-std penalty applies

    static StackItem make_conv(ConvLayer layer, bool regularized = false);
    static StackItem make_pool(int factor);
    static StackItem make_upsample(int factor);
};

// A plain sequential network. The descriptor string is the canonical
// structural encoding used by checkpoints:
//   conv<IN>-<OUT>:<activation>[:reg]  |  pool<F>  |  up<F>
// joined with commas, e.g. "conv2-8:relu,pool3,up3,conv8-1:sigmoid".
struct LayerStack {
    std::vector<StackItem> items;

    std::string descriptor() const;
    // Builds the structure described by the string with zero-valued weights.
    static LayerStack from_descriptor(const std::string& text);

    std::vector<NetTensor*> params();
    std::vector<const NetTensor*> params() const;
    int param_count() const;
    void zero_grads();
};

// Everything the backward pass needs, captured during the forward pass:
// the input each item saw, conv pre-activations, and pool argmax maps.
struct StackTrace {
    std::vector<NetTensor> inputs;      // one per item
    std::vector<NetTensor> pre_acts;    // one per item (empty for non-conv)
    std::vector<PoolIndices> pools;     // one per item (empty for non-pool)
};

// Runs the stack on input. When trace is non-null the intermediate state is
// captured for stack_backward.
NetTensor stack_forward(const LayerStack& stack, const NetTensor& input,
                        StackTrace* trace = nullptr);

// Propagates loss_grad back through the stack, accumulating parameter
// gradients in place, and returns dLoss/dInput. The trace must come from a
// stack_forward call on the same stack with unchanged parameters.
NetTensor stack_backward(LayerStack& stack, const StackTrace& trace,
                         const NetTensor& loss_grad);

// Sum of the weight-std penalties of every regularized conv item; gradients
// are accumulated into the corresponding kernel grads.
double stack_regularization(LayerStack& stack, double lambda);

using EpochCallback = std::function<void(int epoch, double loss)>;

// Shared supervised training loop: minimizes mean minibatch MSE between
// stack(inputs[i]) and targets[i] with Adam, plus an optional weight-std
// penalty (reg_lambda > 0) on regularized conv items. Samples are reshuffled
// each epoch from the seed; execution is strictly sequential so results
// depend only on the seed. Returns one mean per-sample loss per epoch.
std::vector<double> train_stack(LayerStack& stack, const std::vector<NetTensor>& inputs,
                                const std::vector<NetTensor>& targets, int epochs,
                                int batch_size, std::uint64_t seed, const AdamConfig& adam,
                                double reg_lambda,
                                const EpochCallback& on_epoch = nullptr);

}  // namespace igram

#include "igram/net.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "igram/rng.hpp"

namespace igram {

StackItem StackItem::make_conv(ConvLayer layer, bool regularized) {
    StackItem item;
    item.kind = Kind::Conv;
    item.conv = std::move(layer);
    item.regularized = regularized;
    return item;
}

StackItem StackItem::make_pool(int factor) {
    StackItem item;
    item.kind = Kind::Pool;
    item.factor = factor;
    return item;
}

StackItem StackItem::make_upsample(int factor) {
    StackItem item;
    item.kind = Kind::Upsample;
    item.factor = factor;
    return item;
}

std::string LayerStack::descriptor() const {
    std::ostringstream out;
    bool first = true;
    for (const StackItem& item : items) {
        if (!first) out << ',';
        first = false;
        switch (item.kind) {
            case StackItem::Kind::Conv:
                out << "conv" << item.conv.in_channels() << '-' << item.conv.out_channels()
                    << ':' << activation_name(item.conv.activation);
                if (item.regularized) out << ":reg";
                break;
            case StackItem::Kind::Pool:
                out << "pool" << item.factor;
                break;
            case StackItem::Kind::Upsample:
                out << "up" << item.factor;
                break;
        }
    }
    return out.str();
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, sep)) parts.push_back(token);
    return parts;
}

int parse_positive_int(const std::string& text, const std::string& context) {
    std::size_t pos = 0;
    int value = 0;
    try {
        value = std::stoi(text, &pos);
    } catch (...) {
        throw std::invalid_argument("bad integer in descriptor item: " + context);
    }
    if (pos != text.size() || value < 1) {
        throw std::invalid_argument("bad integer in descriptor item: " + context);
    }
    return value;
}

StackItem parse_item(const std::string& item) {
    if (item.rfind("conv", 0) == 0) {
        const std::string body = item.substr(4);
        const auto fields = split(body, ':');
        if (fields.size() < 2 || fields.size() > 3) {
            throw std::invalid_argument("bad conv descriptor item: " + item);
        }
        const auto channels = split(fields[0], '-');
        if (channels.size() != 2) {
            throw std::invalid_argument("bad conv channel spec: " + item);
        }
        const int in_ch = parse_positive_int(channels[0], item);
        const int out_ch = parse_positive_int(channels[1], item);
        bool regularized = false;
        if (fields.size() == 3) {
            if (fields[2] != "reg") {
                throw std::invalid_argument("bad conv flag in descriptor item: " + item);
            }
            regularized = true;
        }
        ConvLayer layer;
        layer.kernels = NetTensor({out_ch, in_ch, 3, 3});
        layer.bias = NetTensor({out_ch});
        layer.activation = activation_from_name(fields[1]);
        return StackItem::make_conv(std::move(layer), regularized);
    }
    if (item.rfind("pool", 0) == 0) {
        return StackItem::make_pool(parse_positive_int(item.substr(4), item));
    }
    if (item.rfind("up", 0) == 0) {
        return StackItem::make_upsample(parse_positive_int(item.substr(2), item));
    }
    throw std::invalid_argument("unknown descriptor item: " + item);
}

}  // namespace

LayerStack LayerStack::from_descriptor(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty network descriptor");
    LayerStack stack;
    for (const std::string& item : split(text, ',')) {
        if (item.empty()) throw std::invalid_argument("empty descriptor item");
        stack.items.push_back(parse_item(item));
    }
    return stack;
}

std::vector<NetTensor*> LayerStack::params() {
    std::vector<NetTensor*> out;
    for (StackItem& item : items) {
        if (item.kind != StackItem::Kind::Conv) continue;
        out.push_back(&item.conv.kernels);
        out.push_back(&item.conv.bias);
    }
    return out;
}

std::vector<const NetTensor*> LayerStack::params() const {
    std::vector<const NetTensor*> out;
    for (const StackItem& item : items) {
        if (item.kind != StackItem::Kind::Conv) continue;
        out.push_back(&item.conv.kernels);
        out.push_back(&item.conv.bias);
    }
    return out;
}

int LayerStack::param_count() const {
    int n = 0;
    for (const NetTensor* p : params()) n += p->size();
    return n;
}

void LayerStack::zero_grads() {
    for (NetTensor* p : params()) p->zero_grad();
}

NetTensor stack_forward(const LayerStack& stack, const NetTensor& input, StackTrace* trace) {
    if (trace != nullptr) {
        trace->inputs.resize(stack.items.size());
        trace->pre_acts.resize(stack.items.size());
        trace->pools.resize(stack.items.size());
    }
    NetTensor x = input;
    for (std::size_t i = 0; i < stack.items.size(); ++i) {
        const StackItem& item = stack.items[i];
        NetTensor next;
        switch (item.kind) {
            case StackItem::Kind::Conv:
                next = conv2d_forward(x, item.conv,
                                      trace != nullptr ? &trace->pre_acts[i] : nullptr);
                break;
            case StackItem::Kind::Pool: {
                auto [pooled, indices] = maxpool_forward(x, item.factor);
                next = std::move(pooled);
                if (trace != nullptr) trace->pools[i] = std::move(indices);
                break;
            }
            case StackItem::Kind::Upsample:
                next = upsample_nearest(x, item.factor);
                break;
        }
        // The layer input moves into the trace once its output exists, so a
        // traced forward pass never deep-copies an activation tensor.
        if (trace != nullptr) trace->inputs[i] = std::move(x);
        x = std::move(next);
    }
    return x;
}

NetTensor stack_backward(LayerStack& stack, const StackTrace& trace,
                         const NetTensor& loss_grad) {
    if (trace.inputs.size() != stack.items.size()) {
        throw std::invalid_argument("trace does not match the stack");
    }
    NetTensor g = loss_grad;
    for (std::size_t idx = stack.items.size(); idx-- > 0;) {
        StackItem& item = stack.items[idx];
        switch (item.kind) {
            case StackItem::Kind::Conv: {
                ConvGrads grads = conv2d_backward(trace.inputs[idx], item.conv, g,
                                                  &trace.pre_acts[idx]);
                item.conv.kernels.ensure_grad();
                item.conv.bias.ensure_grad();
                for (std::size_t i = 0; i < grads.kernels.values.size(); ++i) {
                    item.conv.kernels.grad[i] += grads.kernels.values[i];
                }
                for (std::size_t i = 0; i < grads.bias.values.size(); ++i) {
                    item.conv.bias.grad[i] += grads.bias.values[i];
                }
                g = std::move(grads.input);
                break;
            }
            case StackItem::Kind::Pool:
                g = maxpool_backward(trace.pools[idx], g);
                break;
            case StackItem::Kind::Upsample:
                g = upsample_nearest_backward(g, item.factor);
                break;
        }
    }
    return g;
}

double stack_regularization(LayerStack& stack, double lambda) {
    double total = 0.0;
    for (StackItem& item : stack.items) {
        if (item.kind == StackItem::Kind::Conv && item.regularized) {
            total += weight_std_penalty(item.conv, lambda);
        }
    }
    return total;
}

std::vector<double> train_stack(LayerStack& stack, const std::vector<NetTensor>& inputs,
                                const std::vector<NetTensor>& targets, int epochs,
                                int batch_size, std::uint64_t seed, const AdamConfig& adam,
                                double reg_lambda, const EpochCallback& on_epoch) {
    if (inputs.empty()) throw std::invalid_argument("training needs at least one sample");
    if (inputs.size() != targets.size()) {
        throw std::invalid_argument("inputs and targets differ in count");
    }
    if (epochs < 0 || batch_size < 1) {
        throw std::invalid_argument("epochs must be non-negative and batch size positive");
    }

    std::vector<NetTensor*> params = stack.params();
    AdamState state;
    state.config = adam;
    state.init(params);

    const std::size_t n = inputs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(epochs));
    StackTrace trace;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        // Fisher-Yates with a per-epoch derived seed.
        constexpr std::uint64_t kShuffleSalt = 0x73687566ULL;
        Rng shuffle_rng(derive_seed(seed, kShuffleSalt + static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = n; i > 1; --i) {
            const int j = shuffle_rng.uniform_int(0, static_cast<int>(i) - 1);
            std::swap(order[i - 1], order[static_cast<std::size_t>(j)]);
        }

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
            const std::size_t end = std::min(n, start + static_cast<std::size_t>(batch_size));
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            stack.zero_grads();
            for (std::size_t k = start; k < end; ++k) {
                const NetTensor& input = inputs[order[k]];
                const NetTensor& target = targets[order[k]];
                const NetTensor out = stack_forward(stack, input, &trace);
                LossResult loss = mse_loss(out, target);
                epoch_loss += loss.value;
                for (double& gv : loss.grad.values) gv *= inv_batch;
                stack_backward(stack, trace, loss.grad);
            }
            if (reg_lambda > 0.0) stack_regularization(stack, reg_lambda);
            adam_step(params, state);
        }
        epoch_loss /= static_cast<double>(n);
        history.push_back(epoch_loss);
        if (on_epoch) on_epoch(epoch, epoch_loss);
    }
    return history;
}

}  // namespace igram

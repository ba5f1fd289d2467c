#include "igram/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace igram {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::size_t shape_product(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int e : shape) {
        if (e < 1) throw std::invalid_argument("tensor extents must be positive");
        n *= static_cast<std::size_t>(e);
    }
    return n;
}

}  // namespace

NetTensor::NetTensor(std::vector<int> shape_in) : shape(std::move(shape_in)) {
    require(!shape.empty(), "tensor rank must be at least 1");
    values.assign(shape_product(shape), 0.0);
}

NetTensor NetTensor::full(std::vector<int> shape_in, double v) {
    NetTensor t(std::move(shape_in));
    std::fill(t.values.begin(), t.values.end(), v);
    return t;
}

void NetTensor::zero_grad() { grad.assign(values.size(), 0.0); }

void NetTensor::ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
}

std::string activation_name(Activation kind) {
    switch (kind) {
        case Activation::None: return "none";
        case Activation::Relu: return "relu";
        case Activation::Sigmoid: return "sigmoid";
    }
    throw std::invalid_argument("unknown activation");
}

Activation activation_from_name(const std::string& name) {
    if (name == "none") return Activation::None;
    if (name == "relu") return Activation::Relu;
    if (name == "sigmoid") return Activation::Sigmoid;
    throw std::invalid_argument("unknown activation name: " + name);
}

double activation_apply(double x, Activation kind) {
    switch (kind) {
        case Activation::None: return x;
        case Activation::Relu: return x > 0.0 ? x : 0.0;
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
    }
    throw std::invalid_argument("unknown activation");
}

double activation_derivative(double pre, Activation kind) {
    switch (kind) {
        case Activation::None: return 1.0;
        case Activation::Relu: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::Sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-pre));
            return s * (1.0 - s);
        }
    }
    throw std::invalid_argument("unknown activation");
}

void xavier_fill(NetTensor& t, Rng& rng) {
    int fan_in = 0;
    int fan_out = 0;
    if (t.rank() == 4) {
        fan_in = t.extent(1) * t.extent(2) * t.extent(3);
        fan_out = t.extent(0) * t.extent(2) * t.extent(3);
    } else if (t.rank() == 2) {
        fan_in = t.extent(1);
        fan_out = t.extent(0);
    } else if (t.rank() == 1) {
        fan_in = fan_out = t.extent(0);
    } else {
        throw std::invalid_argument("xavier_fill expects rank 1, 2 or 4");
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : t.values) v = rng.uniform(-bound, bound);
}

NetTensor xavier_init(std::vector<int> shape, std::uint64_t seed) {
    NetTensor t(std::move(shape));
    Rng rng(seed);
    xavier_fill(t, rng);
    return t;
}

ConvLayer make_conv_layer(int in_channels, int out_channels, Activation act, Rng& rng) {
    require(in_channels >= 1 && out_channels >= 1, "channel counts must be positive");
    ConvLayer layer;
    layer.kernels = NetTensor({out_channels, in_channels, 3, 3});
    layer.bias = NetTensor({out_channels});
    layer.activation = act;
    xavier_fill(layer.kernels, rng);
    return layer;
}

namespace {

// Zero-padded copy of a (C, H, W) tensor with a one-pixel border, written
// into a reusable scratch buffer (assign keeps capacity between calls).
void pad_input(const NetTensor& input, std::vector<double>& pad) {
    const int c_count = input.extent(0);
    const int h = input.extent(1);
    const int w = input.extent(2);
    const int ph = h + 2;
    const int pw = w + 2;
    pad.assign(static_cast<std::size_t>(c_count) * ph * pw, 0.0);
    for (int c = 0; c < c_count; ++c) {
        const double* src = input.values.data() + static_cast<std::size_t>(c) * h * w;
        double* dst = pad.data() + static_cast<std::size_t>(c) * ph * pw;
        for (int y = 0; y < h; ++y) {
            std::copy(src + static_cast<std::size_t>(y) * w,
                      src + static_cast<std::size_t>(y + 1) * w,
                      dst + static_cast<std::size_t>(y + 1) * pw + 1);
        }
    }
}

}  // namespace

NetTensor conv2d_forward(const NetTensor& input, const ConvLayer& layer,
                         NetTensor* pre_activation) {
    require(input.rank() == 3, "conv2d_forward expects a (C, H, W) input");
    require(input.extent(0) == layer.in_channels(), "input channel count mismatch");
    const int c_count = input.extent(0);
    const int h = input.extent(1);
    const int w = input.extent(2);
    const int o_count = layer.out_channels();
    const int pw = w + 2;

    thread_local std::vector<double> pad;
    thread_local std::vector<double> acc;
    pad_input(input, pad);
    NetTensor out({o_count, h, w});
    if (pre_activation != nullptr && pre_activation->shape != out.shape) {
        *pre_activation = NetTensor({o_count, h, w});
    }

    acc.resize(static_cast<std::size_t>(h) * w);
    for (int o = 0; o < o_count; ++o) {
        std::fill(acc.begin(), acc.end(), layer.bias.values[static_cast<std::size_t>(o)]);
        for (int c = 0; c < c_count; ++c) {
            const double* k =
                layer.kernels.values.data() + (static_cast<std::size_t>(o) * c_count + c) * 9;
            const double k0 = k[0], k1 = k[1], k2 = k[2];
            const double k3 = k[3], k4 = k[4], k5 = k[5];
            const double k6 = k[6], k7 = k[7], k8 = k[8];
            const double* base = pad.data() + static_cast<std::size_t>(c) * (h + 2) * pw;
            for (int y = 0; y < h; ++y) {
                const double* __restrict r0 = base + static_cast<std::size_t>(y) * pw;
                const double* __restrict r1 = r0 + pw;
                const double* __restrict r2 = r1 + pw;
                double* __restrict a = acc.data() + static_cast<std::size_t>(y) * w;
                for (int x = 0; x < w; ++x) {
                    a[x] += k0 * r0[x] + k1 * r0[x + 1] + k2 * r0[x + 2] +
                            k3 * r1[x] + k4 * r1[x + 1] + k5 * r1[x + 2] +
                            k6 * r2[x] + k7 * r2[x + 1] + k8 * r2[x + 2];
                }
            }
        }
        double* dst = out.values.data() + static_cast<std::size_t>(o) * h * w;
        const std::size_t plane = static_cast<std::size_t>(h) * w;
        if (pre_activation != nullptr) {
            std::copy(acc.begin(), acc.end(),
                      pre_activation->values.data() + static_cast<std::size_t>(o) * plane);
        }
        // One branch per plane instead of one per pixel keeps these loops
        // vectorisable.
        switch (layer.activation) {
            case Activation::None:
                std::copy(acc.begin(), acc.end(), dst);
                break;
            case Activation::Relu:
                for (std::size_t i = 0; i < plane; ++i) dst[i] = acc[i] > 0.0 ? acc[i] : 0.0;
                break;
            case Activation::Sigmoid:
                for (std::size_t i = 0; i < plane; ++i) dst[i] = 1.0 / (1.0 + std::exp(-acc[i]));
                break;
        }
    }
    return out;
}

ConvGrads conv2d_backward(const NetTensor& input, const ConvLayer& layer,
                          const NetTensor& upstream, const NetTensor* pre_activation) {
    require(input.rank() == 3, "conv2d_backward expects a (C, H, W) input");
    require(input.extent(0) == layer.in_channels(), "input channel count mismatch");
    const int c_count = input.extent(0);
    const int h = input.extent(1);
    const int w = input.extent(2);
    const int o_count = layer.out_channels();
    require(upstream.rank() == 3 && upstream.extent(0) == o_count &&
                upstream.extent(1) == h && upstream.extent(2) == w,
            "upstream gradient shape mismatch");

    NetTensor recomputed_pre;
    if (pre_activation == nullptr) {
        conv2d_forward(input, layer, &recomputed_pre);
        pre_activation = &recomputed_pre;
    }
    require(pre_activation->shape == upstream.shape, "pre-activation shape mismatch");

    const int ph = h + 2;
    const int pw = w + 2;
    thread_local std::vector<double> pad;
    thread_local std::vector<double> g;
    thread_local std::vector<double> dpad;
    pad_input(input, pad);
    const std::size_t plane = static_cast<std::size_t>(h) * w;

    // Chain through the activation once (branch hoisted out of the loop).
    g.resize(static_cast<std::size_t>(o_count) * plane);
    {
        const double* pv = pre_activation->values.data();
        const double* uv = upstream.values.data();
        const std::size_t n = g.size();
        switch (layer.activation) {
            case Activation::None:
                std::copy(uv, uv + n, g.data());
                break;
            case Activation::Relu:
                for (std::size_t i = 0; i < n; ++i) g[i] = pv[i] > 0.0 ? uv[i] : 0.0;
                break;
            case Activation::Sigmoid:
                for (std::size_t i = 0; i < n; ++i) {
                    const double s = 1.0 / (1.0 + std::exp(-pv[i]));
                    g[i] = uv[i] * s * (1.0 - s);
                }
                break;
        }
    }

    ConvGrads grads;
    grads.input = NetTensor(input.shape);
    grads.kernels = NetTensor(layer.kernels.shape);
    grads.bias = NetTensor(layer.bias.shape);

    // Bias: sums over each output plane with eight vector lanes, collapsed in
    // a fixed order.
    for (int o = 0; o < o_count; ++o) {
        const double* __restrict go = g.data() + static_cast<std::size_t>(o) * plane;
        alignas(64) double lanes[8] = {};
        double tail = 0.0;
        std::size_t i = 0;
        for (; i + 8 <= plane; i += 8) {
            for (int l = 0; l < 8; ++l) lanes[l] += go[i + static_cast<std::size_t>(l)];
        }
        for (; i < plane; ++i) tail += go[i];
        grads.bias.values[static_cast<std::size_t>(o)] =
            (((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) +
             ((lanes[4] + lanes[5]) + (lanes[6] + lanes[7]))) +
            tail;
    }

    // Kernels: each tap keeps eight partial sums so the x loop vectorises;
    // the partials collapse in a fixed order at the end, which keeps results
    // build-stable without fast-math reassociation.
    for (int o = 0; o < o_count; ++o) {
        const double* go = g.data() + static_cast<std::size_t>(o) * plane;
        for (int c = 0; c < c_count; ++c) {
            const double* base = pad.data() + static_cast<std::size_t>(c) * ph * pw;
            alignas(64) double lanes[9][8] = {};
            double tail[9] = {};
            for (int y = 0; y < h; ++y) {
                const double* __restrict gr = go + static_cast<std::size_t>(y) * w;
                const double* rows[3] = {base + static_cast<std::size_t>(y) * pw,
                                         base + static_cast<std::size_t>(y + 1) * pw,
                                         base + static_cast<std::size_t>(y + 2) * pw};
                int x = 0;
                for (; x + 8 <= w; x += 8) {
                    for (int j = 0; j < 9; ++j) {
                        const double* __restrict rp = rows[j / 3] + (j % 3) + x;
                        const double* __restrict gp = gr + x;
                        for (int l = 0; l < 8; ++l) lanes[j][l] += gp[l] * rp[l];
                    }
                }
                for (; x < w; ++x) {
                    const double gv = gr[x];
                    for (int j = 0; j < 9; ++j) tail[j] += gv * rows[j / 3][(j % 3) + x];
                }
            }
            double* dk =
                grads.kernels.values.data() + (static_cast<std::size_t>(o) * c_count + c) * 9;
            for (int j = 0; j < 9; ++j) {
                const double* v = lanes[j];
                dk[j] = (((v[0] + v[1]) + (v[2] + v[3])) +
                         ((v[4] + v[5]) + (v[6] + v[7]))) +
                        tail[j];
            }
        }
    }

    // Input: scatter each weight's contribution with shifted row updates.
    dpad.assign(static_cast<std::size_t>(c_count) * ph * pw, 0.0);
    for (int o = 0; o < o_count; ++o) {
        const double* go = g.data() + static_cast<std::size_t>(o) * plane;
        for (int c = 0; c < c_count; ++c) {
            const double* k =
                layer.kernels.values.data() + (static_cast<std::size_t>(o) * c_count + c) * 9;
            double* base = dpad.data() + static_cast<std::size_t>(c) * ph * pw;
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    const double kv = k[ky * 3 + kx];
                    if (kv == 0.0) continue;
                    for (int y = 0; y < h; ++y) {
                        const double* __restrict gr = go + static_cast<std::size_t>(y) * w;
                        double* __restrict d = base + static_cast<std::size_t>(y + ky) * pw + kx;
                        for (int x = 0; x < w; ++x) d[x] += kv * gr[x];
                    }
                }
            }
        }
    }
    for (int c = 0; c < c_count; ++c) {
        const double* src = dpad.data() + static_cast<std::size_t>(c) * ph * pw;
        double* dst = grads.input.values.data() + static_cast<std::size_t>(c) * plane;
        for (int y = 0; y < h; ++y) {
            std::copy(src + static_cast<std::size_t>(y + 1) * pw + 1,
                      src + static_cast<std::size_t>(y + 1) * pw + 1 + w,
                      dst + static_cast<std::size_t>(y) * w);
        }
    }
    return grads;
}

std::pair<NetTensor, PoolIndices> maxpool_forward(const NetTensor& input, int factor) {
    require(input.rank() == 3, "maxpool_forward expects a (C, H, W) input");
    require(factor >= 1, "pool factor must be positive");
    const int c_count = input.extent(0);
    const int h = input.extent(1);
    const int w = input.extent(2);
    require(h % factor == 0 && w % factor == 0,
            "spatial extents must be divisible by the pool factor");
    const int oh = h / factor;
    const int ow = w / factor;

    NetTensor out({c_count, oh, ow});
    PoolIndices indices;
    indices.input_shape = input.shape;
    indices.argmax.resize(out.values.size());

    for (int c = 0; c < c_count; ++c) {
        const std::size_t in_base = static_cast<std::size_t>(c) * h * w;
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                std::int32_t best_idx = -1;
                double best = 0.0;
                for (int dy = 0; dy < factor; ++dy) {
                    const int y = oy * factor + dy;
                    for (int dx = 0; dx < factor; ++dx) {
                        const int x = ox * factor + dx;
                        const std::size_t idx = in_base + static_cast<std::size_t>(y) * w + x;
                        const double v = input.values[idx];
                        if (best_idx < 0 || v > best) {
                            best = v;
                            best_idx = static_cast<std::int32_t>(idx);
                        }
                    }
                }
                const std::size_t out_idx =
                    (static_cast<std::size_t>(c) * oh + oy) * ow + ox;
                out.values[out_idx] = best;
                indices.argmax[out_idx] = best_idx;
            }
        }
    }
    return {std::move(out), std::move(indices)};
}

NetTensor maxpool_backward(const PoolIndices& indices, const NetTensor& upstream) {
    require(indices.argmax.size() == upstream.values.size(),
            "argmax map and upstream gradient disagree in size");
    NetTensor grad_in(indices.input_shape);
    for (std::size_t i = 0; i < indices.argmax.size(); ++i) {
        grad_in.values[static_cast<std::size_t>(indices.argmax[i])] += upstream.values[i];
    }
    return grad_in;
}

NetTensor upsample_nearest(const NetTensor& input, int factor) {
    require(input.rank() == 3, "upsample_nearest expects a (C, H, W) input");
    require(factor >= 1, "upsample factor must be positive");
    const int c_count = input.extent(0);
    const int h = input.extent(1);
    const int w = input.extent(2);
    NetTensor out({c_count, h * factor, w * factor});
    const int ow = w * factor;
    for (int c = 0; c < c_count; ++c) {
        for (int y = 0; y < h * factor; ++y) {
            const double* src =
                input.values.data() + (static_cast<std::size_t>(c) * h + y / factor) * w;
            double* dst =
                out.values.data() + (static_cast<std::size_t>(c) * h * factor + y) * ow;
            for (int x = 0; x < ow; ++x) dst[x] = src[x / factor];
        }
    }
    return out;
}

NetTensor upsample_nearest_backward(const NetTensor& upstream, int factor) {
    require(upstream.rank() == 3, "upsample_nearest_backward expects a (C, H, W) gradient");
    require(factor >= 1, "upsample factor must be positive");
    const int c_count = upstream.extent(0);
    const int uh = upstream.extent(1);
    const int uw = upstream.extent(2);
    require(uh % factor == 0 && uw % factor == 0,
            "upstream extents must be divisible by the upsample factor");
    const int h = uh / factor;
    const int w = uw / factor;
    NetTensor grad_in({c_count, h, w});
    for (int c = 0; c < c_count; ++c) {
        for (int y = 0; y < uh; ++y) {
            const double* src =
                upstream.values.data() + (static_cast<std::size_t>(c) * uh + y) * uw;
            double* dst =
                grad_in.values.data() + (static_cast<std::size_t>(c) * h + y / factor) * w;
            for (int x = 0; x < uw; ++x) dst[x / factor] += src[x];
        }
    }
    return grad_in;
}

LossResult mse_loss(const NetTensor& pred, const NetTensor& target) {
    require(pred.shape == target.shape, "mse_loss shapes must match");
    const std::size_t n = pred.values.size();
    LossResult result;
    result.grad = NetTensor(pred.shape);
    double sum = 0.0;
    const double scale = 2.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = pred.values[i] - target.values[i];
        sum += d * d;
        result.grad.values[i] = scale * d;
    }
    result.value = sum / static_cast<double>(n);
    return result;
}

double weight_std_penalty(ConvLayer& layer, double lambda) {
    const std::size_t n = layer.kernels.values.size();
    double mean = 0.0;
    for (double v : layer.kernels.values) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : layer.kernels.values) {
        const double d = v - mean;
        var += d * d;
    }
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    if (sd == 0.0) return 0.0;
    layer.kernels.ensure_grad();
    const double scale = lambda / (static_cast<double>(n) * sd);
    for (std::size_t i = 0; i < n; ++i) {
        layer.kernels.grad[i] += scale * (layer.kernels.values[i] - mean);
    }
    return lambda * sd;
}

void AdamState::init(const std::vector<NetTensor*>& params) {
    step = 0;
    m.clear();
    v.clear();
    m.reserve(params.size());
    v.reserve(params.size());
    for (const NetTensor* p : params) {
        m.emplace_back(p->values.size(), 0.0);
        v.emplace_back(p->values.size(), 0.0);
    }
}

bool AdamState::matches(const std::vector<NetTensor*>& params) const {
    if (m.size() != params.size() || v.size() != params.size()) return false;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (m[i].size() != params[i]->values.size()) return false;
        if (v[i].size() != params[i]->values.size()) return false;
    }
    return true;
}

void adam_step(const std::vector<NetTensor*>& params, AdamState& state) {
    if (!state.matches(params)) {
        throw std::invalid_argument("Adam state does not match the parameter list");
    }
    state.step += 1;
    const double b1 = state.config.beta1;
    const double b2 = state.config.beta2;
    const double bias1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    for (std::size_t p = 0; p < params.size(); ++p) {
        NetTensor& t = *params[p];
        require(t.grad.size() == t.values.size(),
                "parameter gradient buffer not initialised before adam_step");
        std::vector<double>& mp = state.m[p];
        std::vector<double>& vp = state.v[p];
        for (std::size_t i = 0; i < t.values.size(); ++i) {
            const double g = t.grad[i];
            mp[i] = b1 * mp[i] + (1.0 - b1) * g;
            vp[i] = b2 * vp[i] + (1.0 - b2) * g * g;
            const double m_hat = mp[i] / bias1;
            const double v_hat = vp[i] / bias2;
            t.values[i] -= state.config.learning_rate * m_hat /
                           (std::sqrt(v_hat) + state.config.epsilon);
        }
    }
}

}  // namespace igram

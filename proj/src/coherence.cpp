#include "igram/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "igram/parallel.hpp"
#include "igram/rng.hpp"

namespace igram {

CoherenceMap raw_coherence(const ComplexRaster& u1, const ComplexRaster& u2, int window) {
    if (u1.height != u2.height || u1.width != u2.width) {
        throw std::invalid_argument("raw_coherence inputs must have equal dimensions");
    }
    if (window < 1 || window % 2 == 0) {
        throw std::invalid_argument("raw_coherence window must be odd and positive");
    }
    const int h = u1.height;
    const int w = u1.width;
    const int r = window / 2;
    const int eh = h + 2 * r;
    const int ew = w + 2 * r;

    // Mirrored component fields: cross-correlation (re, im) and the two
    // window energies, extended by the window radius on every side.
    std::vector<double> cr(static_cast<std::size_t>(eh) * ew);
    std::vector<double> ci(cr.size());
    std::vector<double> p1(cr.size());
    std::vector<double> p2(cr.size());
    for (int y = 0; y < eh; ++y) {
        const int sy = mirror_index(y - r, h);
        for (int x = 0; x < ew; ++x) {
            const int sx = mirror_index(x - r, w);
            const std::complex<float> a = u1.at(sy, sx);
            const std::complex<float> b = u2.at(sy, sx);
            const double ar = a.real(), ai = a.imag();
            const double br = b.real(), bi = b.imag();
            const std::size_t i = static_cast<std::size_t>(y) * ew + x;
            cr[i] = ar * br + ai * bi;   // Re(a * conj(b))
            ci[i] = ai * br - ar * bi;   // Im(a * conj(b))
            p1[i] = ar * ar + ai * ai;
            p2[i] = br * br + bi * bi;
        }
    }

    // Inclusive 2D prefix sums with a zero border row/column.
    const int sw = ew + 1;
    const auto prefix = [eh, ew, sw](const std::vector<double>& f) {
        std::vector<double> s(static_cast<std::size_t>(eh + 1) * sw, 0.0);
        for (int y = 0; y < eh; ++y) {
            double row = 0.0;
            const double* src = f.data() + static_cast<std::size_t>(y) * ew;
            const double* above = s.data() + static_cast<std::size_t>(y) * sw;
            double* out = s.data() + static_cast<std::size_t>(y + 1) * sw;
            for (int x = 0; x < ew; ++x) {
                row += src[x];
                out[x + 1] = above[x + 1] + row;
            }
        }
        return s;
    };
    const std::vector<double> scr = prefix(cr);
    const std::vector<double> sci = prefix(ci);
    const std::vector<double> sp1 = prefix(p1);
    const std::vector<double> sp2 = prefix(p2);

    const auto box = [sw, window](const std::vector<double>& s, int y, int x) {
        // Window rows y..y+window-1, cols x..x+window-1 in extended coords.
        const std::size_t top = static_cast<std::size_t>(y) * sw;
        const std::size_t bot = static_cast<std::size_t>(y + window) * sw;
        return s[bot + x + window] - s[bot + x] - s[top + x + window] + s[top + x];
    };

    CoherenceMap out(h, w);
    parallel_chunks(h, [&](int y_begin, int y_end) {
        for (int y = y_begin; y < y_end; ++y) {
            for (int x = 0; x < w; ++x) {
                const double num = std::hypot(box(scr, y, x), box(sci, y, x));
                const double e1 = box(sp1, y, x);
                const double e2 = box(sp2, y, x);
                double value = 0.0;
                if (e1 > 0.0 && e2 > 0.0) value = num / std::sqrt(e1 * e2);
                out.at(y, x) = static_cast<float>(std::clamp(value, 0.0, 1.0));
            }
        }
    });
    return out;
}

namespace {

struct ClassMeans {
    double c1 = 0.0;  // label 1
    double c2 = 0.0;  // label 0
    std::size_t n1 = 0;
    std::size_t n2 = 0;
};

ClassMeans class_means(const std::vector<double>& u, const std::vector<std::uint8_t>& labels) {
    ClassMeans m;
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (labels[i]) {
            s1 += u[i];
            ++m.n1;
        } else {
            s2 += u[i];
            ++m.n2;
        }
    }
    double overall = 0.0;
    for (double v : u) overall += v;
    overall /= static_cast<double>(u.size());
    m.c1 = m.n1 > 0 ? s1 / static_cast<double>(m.n1) : overall;
    m.c2 = m.n2 > 0 ? s2 / static_cast<double>(m.n2) : overall;
    return m;
}

// Full Chan-Vese energy of a labeling with its own optimal (mean) constants:
// mu * boundary length (4-neighbour disagreements) + class variances.
double labeling_energy(const std::vector<double>& u, const std::vector<std::uint8_t>& labels,
                       int h, int w, double mu, double lambda1, double lambda2) {
    const ClassMeans m = class_means(u, labels);
    double data = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double c = labels[i] ? m.c1 : m.c2;
        const double d = u[i] - c;
        data += (labels[i] ? lambda1 : lambda2) * d * d;
    }
    std::size_t boundary = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (x + 1 < w && labels[i] != labels[i + 1]) ++boundary;
            if (y + 1 < h && labels[i] != labels[i + static_cast<std::size_t>(w)]) ++boundary;
        }
    }
    return mu * static_cast<double>(boundary) + data;
}

}  // namespace

LabelMap chan_vese_segment(const CoherenceMap& map, const ChanVeseParams& params,
                           std::vector<double>* energy_trace) {
    const int h = map.height;
    const int w = map.width;
    const std::size_t n = static_cast<std::size_t>(h) * w;
    if (n == 0) throw std::invalid_argument("chan_vese_segment needs a non-empty map");
    if (energy_trace != nullptr) energy_trace->clear();

    std::vector<double> u(n);
    double vmin = map.values[0], vmax = map.values[0];
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = map.values[i];
        vmin = std::min(vmin, u[i]);
        vmax = std::max(vmax, u[i]);
    }
    const double range = vmax - vmin;

    LabelMap result;
    result.height = h;
    result.width = w;
    result.region_ids.assign(n, 0);

    if (range == 0.0) {
        // Constant map: one region, coherent iff the level is at least 0.5.
        result.region_coherent.assign(1, u[0] >= 0.5 ? 1 : 0);
        if (energy_trace != nullptr) energy_trace->push_back(0.0);
        return result;
    }

    const double mu = params.mu_scale * range * range;
    std::vector<std::uint8_t> labels(n);
    constexpr double kPi = 3.14159265358979323846;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double s = std::sin(kPi * x / 5.0) * std::sin(kPi * y / 5.0);
            labels[static_cast<std::size_t>(y) * w + x] = s > 0.0 ? 1 : 0;
        }
    }

    if (energy_trace != nullptr) {
        energy_trace->push_back(
            labeling_energy(u, labels, h, w, mu, params.lambda1, params.lambda2));
    }

    for (int iter = 0; iter < params.max_iters; ++iter) {
        const ClassMeans m = class_means(u, labels);
        std::size_t flips = 0;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                const std::uint8_t cur = labels[i];
                int neighbours = 0;
                int disagree = 0;
                if (y > 0) { ++neighbours; disagree += labels[i - static_cast<std::size_t>(w)] != cur; }
                if (y + 1 < h) { ++neighbours; disagree += labels[i + static_cast<std::size_t>(w)] != cur; }
                if (x > 0) { ++neighbours; disagree += labels[i - 1] != cur; }
                if (x + 1 < w) { ++neighbours; disagree += labels[i + 1] != cur; }

                const double d1 = u[i] - m.c1;
                const double d2 = u[i] - m.c2;
                const double data_cur = cur ? params.lambda1 * d1 * d1 : params.lambda2 * d2 * d2;
                const double data_new = cur ? params.lambda2 * d2 * d2 : params.lambda1 * d1 * d1;
                const double length_delta =
                    mu * static_cast<double>((neighbours - disagree) - disagree);
                if (data_new - data_cur + length_delta < 0.0) {
                    labels[i] = cur ? 0 : 1;
                    ++flips;
                }
            }
        }
        if (energy_trace != nullptr) {
            energy_trace->push_back(
                labeling_energy(u, labels, h, w, mu, params.lambda1, params.lambda2));
        }
        if (static_cast<double>(flips) <
            params.flip_tolerance * static_cast<double>(n)) {
            break;
        }
    }

    // Decide which binary class is coherent.
    const ClassMeans final_means = class_means(u, labels);
    std::uint8_t coherent_class;
    if (final_means.n1 == 0) {
        coherent_class = final_means.c2 >= 0.5 ? 0 : 2;  // 2 = nothing coherent
    } else if (final_means.n2 == 0) {
        coherent_class = final_means.c1 >= 0.5 ? 1 : 2;
    } else {
        coherent_class = final_means.c1 >= final_means.c2 ? 1 : 0;
    }

    // 4-connected components of the binary labeling, in scan order.
    std::fill(result.region_ids.begin(), result.region_ids.end(), -1);
    std::int32_t next_region = 0;
    std::deque<std::size_t> queue;
    for (std::size_t start = 0; start < n; ++start) {
        if (result.region_ids[start] >= 0) continue;
        const std::uint8_t cls = labels[start];
        result.region_ids[start] = next_region;
        queue.push_back(start);
        while (!queue.empty()) {
            const std::size_t i = queue.front();
            queue.pop_front();
            const int y = static_cast<int>(i) / w;
            const int x = static_cast<int>(i) % w;
            const auto visit = [&](std::size_t j) {
                if (result.region_ids[j] < 0 && labels[j] == cls) {
                    result.region_ids[j] = next_region;
                    queue.push_back(j);
                }
            };
            if (y > 0) visit(i - static_cast<std::size_t>(w));
            if (y + 1 < h) visit(i + static_cast<std::size_t>(w));
            if (x > 0) visit(i - 1);
            if (x + 1 < w) visit(i + 1);
        }
        result.region_coherent.push_back(cls == coherent_class ? 1 : 0);
        ++next_region;
    }
    return result;
}

CoherenceMap preprocess_targets(const CoherenceMap& raw, const LabelMap& labels) {
    if (labels.height != raw.height || labels.width != raw.width) {
        throw std::invalid_argument("label map does not match the coherence map");
    }
    const std::size_t n = raw.values.size();
    const std::size_t regions = static_cast<std::size_t>(labels.region_count());
    std::vector<double> sum(regions, 0.0);
    std::vector<double> sum_sq(regions, 0.0);
    std::vector<std::size_t> count(regions, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>(labels.region_ids[i]);
        const double v = raw.values[i];
        sum[r] += v;
        sum_sq[r] += v * v;
        ++count[r];
    }
    std::vector<double> target(regions, 1.0);
    for (std::size_t r = 0; r < regions; ++r) {
        if (labels.region_coherent[r] || count[r] == 0) continue;
        const double mean = sum[r] / static_cast<double>(count[r]);
        const double var = std::max(0.0, sum_sq[r] / static_cast<double>(count[r]) - mean * mean);
        target[r] = std::clamp(mean - std::sqrt(var), 0.0, 1.0);
    }
    CoherenceMap out(raw.height, raw.width);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = static_cast<float>(target[static_cast<std::size_t>(labels.region_ids[i])]);
    }
    return out;
}

CoherenceModel build_coherence_model(std::uint64_t seed) {
    Rng rng(seed);
    CoherenceModel model;
    auto& items = model.stack.items;
    items.push_back(StackItem::make_conv(make_conv_layer(2, 8, Activation::Relu, rng)));
    items.push_back(StackItem::make_conv(make_conv_layer(8, 16, Activation::Relu, rng)));
    items.push_back(
        StackItem::make_conv(make_conv_layer(16, 8, Activation::Relu, rng), true));
    items.push_back(StackItem::make_conv(make_conv_layer(8, 1, Activation::Sigmoid, rng)));
    return model;
}

void extract_patch_pairs(const NormalizedPair& normalized, const CoherenceMap& target,
                         int size, int count, std::uint64_t seed,
                         std::vector<NetTensor>& inputs_out,
                         std::vector<NetTensor>& targets_out) {
    const NetTensor& src = normalized.channels;
    if (src.rank() != 3 || src.extent(0) != 2) {
        throw std::invalid_argument("expected a (2, H, W) normalized tensor");
    }
    const int h = src.extent(1);
    const int w = src.extent(2);
    if (target.height != h || target.width != w) {
        throw std::invalid_argument("target map does not match the interferogram");
    }
    if (size < 1 || size > h || size > w) {
        throw std::invalid_argument("patch size exceeds the raster extents");
    }
    Rng rng(seed);
    for (int p = 0; p < count; ++p) {
        const int y0 = rng.uniform_int(0, h - size);
        const int x0 = rng.uniform_int(0, w - size);
        NetTensor input({2, size, size});
        for (int c = 0; c < 2; ++c) {
            for (int y = 0; y < size; ++y) {
                const double* row = src.values.data() +
                                    (static_cast<std::size_t>(c) * h + (y0 + y)) * w + x0;
                std::copy(row, row + size,
                          input.values.data() +
                              (static_cast<std::size_t>(c) * size + y) * size);
            }
        }
        NetTensor tgt({1, size, size});
        for (int y = 0; y < size; ++y) {
            const float* row = target.values.data() + static_cast<std::size_t>(y0 + y) * w + x0;
            double* dst = tgt.values.data() + static_cast<std::size_t>(y) * size;
            for (int x = 0; x < size; ++x) dst[x] = row[x];
        }
        inputs_out.push_back(std::move(input));
        targets_out.push_back(std::move(tgt));
    }
}

CoherenceTraining train_coherence(const std::vector<NetTensor>& noisy_patches,
                                  const std::vector<NetTensor>& target_patches,
                                  const CoherenceTrainConfig& config,
                                  const EpochCallback& on_epoch) {
    CoherenceTraining result;
    result.model = build_coherence_model(config.seed);
    result.model.lambda = config.lambda;
    result.loss_history =
        train_stack(result.model.stack, noisy_patches, target_patches, config.epochs,
                    config.batch_size, config.seed, config.adam, config.lambda, on_epoch);
    return result;
}

CoherenceMap estimate_coherence(const CoherenceModel& model, const ComplexRaster& raster) {
    bool any_nonzero = false;
    for (const auto& z : raster.samples) {
        if (z != std::complex<float>(0.0f, 0.0f)) {
            any_nonzero = true;
            break;
        }
    }
    if (!any_nonzero) {
        throw std::invalid_argument("all-zero raster carries no coherence information");
    }
    const NormalizedPair pre = preprocess_interferogram(raster);
    const NetTensor out = stack_forward(model.stack, pre.channels);
    CoherenceMap map(raster.height, raster.width);
    for (std::size_t i = 0; i < map.values.size(); ++i) {
        map.values[i] = static_cast<float>(std::clamp(out.values[i], 0.0, 1.0));
    }
    return map;
}

}  // namespace igram

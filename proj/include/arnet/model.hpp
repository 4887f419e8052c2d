#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "arnet/errors.hpp"
#include "arnet/ops.hpp"
#include "arnet/rng.hpp"
#include "arnet/tensor.hpp"

// Encoder-decoder restoration network: four 2x-downsampling encoder stages
// over a stem, a same-width bottleneck, and a mirrored decoder whose inputs
// concatenate the upsampled path with the matching encoder activation.
// Every conv is 3x3/pad 1 followed by relu, except the output conv, which
// uses tanh to stay inside the [-1, 1] pixel range.

namespace arnet {

struct ArchConfig {
    int in_channels = 1;        // channels after erasing
    int out_channels = 1;       // channels of the restoration target
    double width_multiplier = 1.0;
    int input_size = 32;        // H = W, divisible by 16

    // Stage widths: fractions of the 64/128/256/512 base, floored at 1.
    std::array<int, 4> widths() const {
        std::array<int, 4> w{};
        const int base[4] = {64, 128, 256, 512};
        for (int i = 0; i < 4; ++i)
            w[i] = std::max(1, static_cast<int>(std::lround(base[i] * width_multiplier)));
        return w;
    }

    void validate() const {
        if (in_channels < 1 || out_channels < 1)
            throw ConfigError("arch: channel counts must be >= 1");
        if (width_multiplier <= 0.0)
            throw ConfigError("arch: width multiplier must be positive");
        if (input_size < 16 || input_size % 16 != 0)
            throw ConfigError("arch: input size must be a positive multiple of 16, got " +
                              std::to_string(input_size));
    }
};

// One conv layer's shape in the fixed topology.
struct LayerSpec {
    std::string name;
    int c_in;
    int c_out;
};

// 19 convs: 2 per encoder stage (stem + 3 + bottleneck), 2 per decoder
// stage, one output conv.
inline std::vector<LayerSpec> layer_specs(const ArchConfig& cfg) {
    const auto w = cfg.widths();
    const int c0 = w[0], c1 = w[1], c2 = w[2], c3 = w[3];
    std::vector<LayerSpec> specs;
    specs.push_back({"enc0.conv1", cfg.in_channels, c0});
    specs.push_back({"enc0.conv2", c0, c0});
    specs.push_back({"enc1.conv1", c0, c1});
    specs.push_back({"enc1.conv2", c1, c1});
    specs.push_back({"enc2.conv1", c1, c2});
    specs.push_back({"enc2.conv2", c2, c2});
    specs.push_back({"enc3.conv1", c2, c3});
    specs.push_back({"enc3.conv2", c3, c3});
    specs.push_back({"enc4.conv1", c3, c3});
    specs.push_back({"enc4.conv2", c3, c3});
    specs.push_back({"dec3.conv1", c3 + c3, c2});
    specs.push_back({"dec3.conv2", c2, c2});
    specs.push_back({"dec2.conv1", c2 + c2, c1});
    specs.push_back({"dec2.conv2", c1, c1});
    specs.push_back({"dec1.conv1", c1 + c1, c0});
    specs.push_back({"dec1.conv2", c0, c0});
    specs.push_back({"dec0.conv1", c0 + c0, c0});
    specs.push_back({"dec0.conv2", c0, c0});
    specs.push_back({"out", c0, cfg.out_channels});
    return specs;
}

template <typename T>
struct ConvLayerT {
    std::string name;
    TensorT<T> w;  // C_out x C_in x 3 x 3
    TensorT<T> b;  // C_out
};

template <typename T>
struct ModelParamsT {
    ArchConfig cfg;
    std::vector<ConvLayerT<T>> layers;

    std::size_t param_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.w.numel() + l.b.numel();
        return n;
    }

    static ModelParamsT zeros(const ArchConfig& cfg) {
        cfg.validate();
        ModelParamsT p;
        p.cfg = cfg;
        for (const auto& s : layer_specs(cfg)) {
            ConvLayerT<T> l;
            l.name = s.name;
            l.w = TensorT<T>({static_cast<std::size_t>(s.c_out), static_cast<std::size_t>(s.c_in), 3, 3});
            l.b = TensorT<T>({static_cast<std::size_t>(s.c_out)});
            p.layers.push_back(std::move(l));
        }
        return p;
    }
};

using ModelParams = ModelParamsT<float>;

// Fan-in-scaled uniform init, U(-b, b) with b = sqrt(6 / (C_in * 9));
// biases zero. Each layer draws from its own stream keyed by (seed, layer).
template <typename T>
ModelParamsT<T> init_params(const ArchConfig& cfg, std::uint64_t seed) {
    ModelParamsT<T> p = ModelParamsT<T>::zeros(cfg);
    for (std::size_t li = 0; li < p.layers.size(); ++li) {
        auto& l = p.layers[li];
        const double bound = std::sqrt(6.0 / (static_cast<double>(l.w.dim(1)) * 9.0));
        Rng rng = make_rng({seed, 0x696e6974ULL, li});
        for (auto& v : l.w.data) v = static_cast<T>(uniform_range(rng, -bound, bound));
    }
    return p;
}

template <typename To, typename From>
ModelParamsT<To> cast_params(const ModelParamsT<From>& p) {
    ModelParamsT<To> out;
    out.cfg = p.cfg;
    out.layers.reserve(p.layers.size());
    for (const auto& l : p.layers)
        out.layers.push_back({l.name, tensor_cast<To>(l.w), tensor_cast<To>(l.b)});
    return out;
}

// Per-parameter gradients, shape-matched with the layer list.
template <typename T>
struct GradientsT {
    std::vector<TensorT<T>> gw, gb;

    static GradientsT zeros_like(const ModelParamsT<T>& p) {
        GradientsT g;
        g.gw.reserve(p.layers.size());
        g.gb.reserve(p.layers.size());
        for (const auto& l : p.layers) {
            g.gw.emplace_back(l.w.shape);
            g.gb.emplace_back(l.b.shape);
        }
        return g;
    }

    void add(const GradientsT& o) {
        for (std::size_t i = 0; i < gw.size(); ++i) {
            for (std::size_t j = 0; j < gw[i].numel(); ++j) gw[i].data[j] += o.gw[i].data[j];
            for (std::size_t j = 0; j < gb[i].numel(); ++j) gb[i].data[j] += o.gb[i].data[j];
        }
    }

    void scale(T s) {
        for (auto& t : gw)
            for (auto& v : t.data) v *= s;
        for (auto& t : gb)
            for (auto& v : t.data) v *= s;
    }
};

using Gradients = GradientsT<float>;

// Cached activations of one forward pass, reused by the backward pass.
template <typename T>
struct ForwardTrace {
    TensorT<T> input;
    std::array<TensorT<T>, 5> enc_a1, enc_a2;  // post-relu, index 4 = bottleneck
    std::array<TensorT<T>, 4> pooled;          // input to encoder stage b+1
    std::array<TensorT<T>, 4> up, cat, dec_a1, dec_a2;  // indexed by spatial level 3..0
    TensorT<T> output;                         // tanh output
};

template <typename T>
TensorT<T> forward(const ModelParamsT<T>& p, const TensorT<T>& x, ForwardTrace<T>* trace = nullptr) {
    const auto& cfg = p.cfg;
    require(x.rank() == 3 && x.dim(0) == static_cast<std::size_t>(cfg.in_channels) &&
                x.dim(1) == static_cast<std::size_t>(cfg.input_size) &&
                x.dim(2) == static_cast<std::size_t>(cfg.input_size),
            "forward: input shape does not match architecture");
    ForwardTrace<T> local;
    ForwardTrace<T>& t = trace ? *trace : local;
    t.input = x;

    TensorT<T> cur = x;
    for (int b = 0; b < 5; ++b) {
        const auto& conv1 = p.layers[2 * b];
        const auto& conv2 = p.layers[2 * b + 1];
        t.enc_a1[b] = relu(conv3x3(cur, conv1.w, conv1.b));
        t.enc_a2[b] = relu(conv3x3(t.enc_a1[b], conv2.w, conv2.b));
        if (b < 4) {
            t.pooled[b] = maxpool2(t.enc_a2[b]);
            cur = t.pooled[b];
        } else {
            cur = t.enc_a2[b];
        }
    }
    for (int level = 3; level >= 0; --level) {
        const std::size_t base = 10 + 2 * static_cast<std::size_t>(3 - level);
        const auto& conv1 = p.layers[base];
        const auto& conv2 = p.layers[base + 1];
        t.up[level] = upsample2(cur);
        t.cat[level] = concat_channels(t.up[level], t.enc_a2[level]);
        t.dec_a1[level] = relu(conv3x3(t.cat[level], conv1.w, conv1.b));
        t.dec_a2[level] = relu(conv3x3(t.dec_a1[level], conv2.w, conv2.b));
        cur = t.dec_a2[level];
    }
    const auto& out_conv = p.layers[18];
    t.output = tanh(conv3x3(cur, out_conv.w, out_conv.b));
    return t.output;
}

// Restoration loss (sum of squared differences against the target) plus
// gradients for every parameter.
template <typename T>
double backward(const ModelParamsT<T>& p, const TensorT<T>& x, const TensorT<T>& target,
                GradientsT<T>& grads) {
    require(target.rank() == 3 && target.dim(0) == static_cast<std::size_t>(p.cfg.out_channels) &&
                target.dim(1) == x.dim(1) && target.dim(2) == x.dim(2),
            "backward: target shape does not match architecture");
    ForwardTrace<T> t;
    forward(p, x, &t);

    TensorT<T> gloss;
    const double loss = l2_loss(t.output, target, &gloss);
    if (!std::isfinite(loss)) throw TrainingDivergence("restoration loss is not finite");

    grads = GradientsT<T>::zeros_like(p);

    // Output conv.
    TensorT<T> g = tanh_backward(t.output, gloss);
    TensorT<T> g_prev;
    conv3x3_backward(t.dec_a2[0], p.layers[18].w, g, g_prev, grads.gw[18], grads.gb[18]);

    // Decoder stages, shallowest first; collect the skip-path gradients.
    std::array<TensorT<T>, 4> g_skip;
    for (int level = 0; level <= 3; ++level) {
        const std::size_t base = 10 + 2 * static_cast<std::size_t>(3 - level);
        const auto& conv1 = p.layers[base];
        const auto& conv2 = p.layers[base + 1];
        TensorT<T> g2 = relu_backward(t.dec_a2[level], g_prev);
        TensorT<T> g_d1;
        conv3x3_backward(t.dec_a1[level], conv2.w, g2, g_d1, grads.gw[base + 1], grads.gb[base + 1]);
        TensorT<T> g1 = relu_backward(t.dec_a1[level], g_d1);
        TensorT<T> g_cat;
        conv3x3_backward(t.cat[level], conv1.w, g1, g_cat, grads.gw[base], grads.gb[base]);
        TensorT<T> g_up;
        split_channels(g_cat, t.up[level].dim(0), g_up, g_skip[level]);
        g_prev = upsample2_backward(g_up);
    }

    // Encoder stages, deepest first. Each stage output below the bottleneck
    // feeds both the pool and a skip, so its gradient is the sum of the two.
    TensorT<T> g_a2 = g_prev;  // gradient at bottleneck output
    for (int b = 4; b >= 0; --b) {
        const auto& conv1 = p.layers[2 * b];
        const auto& conv2 = p.layers[2 * b + 1];
        TensorT<T> g2 = relu_backward(t.enc_a2[b], g_a2);
        TensorT<T> g_a1;
        conv3x3_backward(t.enc_a1[b], conv2.w, g2, g_a1, grads.gw[2 * b + 1], grads.gb[2 * b + 1]);
        TensorT<T> g1 = relu_backward(t.enc_a1[b], g_a1);
        const TensorT<T>& conv1_in = (b == 0) ? t.input : t.pooled[b - 1];
        TensorT<T> g_in;
        conv3x3_backward(conv1_in, conv1.w, g1, g_in, grads.gw[2 * b], grads.gb[2 * b]);
        if (b > 0) {
            TensorT<T> pooled_g = maxpool2_backward(t.enc_a2[b - 1], g_in);
            for (std::size_t i = 0; i < pooled_g.numel(); ++i)
                pooled_g.data[i] += g_skip[b - 1].data[i];
            g_a2 = std::move(pooled_g);
        }
    }
    return loss;
}

// theta <- theta - lr * g for every parameter. Plain SGD.
template <typename T>
void sgd_step(ModelParamsT<T>& p, const GradientsT<T>& grads, T lr) {
    require(grads.gw.size() == p.layers.size(), "sgd_step: gradient/parameter count mismatch");
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        if (!grads.gw[i].all_finite() || !grads.gb[i].all_finite())
            throw TrainingDivergence("non-finite gradient in layer " + p.layers[i].name);
        sgd_update(p.layers[i].w, grads.gw[i], lr);
        sgd_update(p.layers[i].b, grads.gb[i], lr);
    }
}

}  // namespace arnet

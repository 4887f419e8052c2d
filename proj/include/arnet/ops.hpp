#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "arnet/errors.hpp"
#include "arnet/tensor.hpp"

// Forward/backward pairs for every layer the restoration network needs.
// All ops are pure functions of their inputs and deterministic; convolutions
// are straightforward loops ordered so the innermost stride is contiguous.

namespace arnet {

// ---------------------------------------------------------------------------
// 3x3 convolution, zero padding 1, stride 1. Spatial dims are preserved.
// ---------------------------------------------------------------------------

template <typename T>
TensorT<T> conv3x3(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b) {
    require(x.rank() == 3, "conv3x3: input must be C_in x H x W");
    require(w.rank() == 4 && w.dim(2) == 3 && w.dim(3) == 3,
            "conv3x3: weight must be C_out x C_in x 3 x 3");
    require(w.dim(1) == x.dim(0), "conv3x3: weight C_in does not match input channels");
    require(b.rank() == 1 && b.dim(0) == w.dim(0), "conv3x3: bias length must equal C_out");
    const std::size_t cin = x.dim(0), H = x.dim(1), W = x.dim(2), cout = w.dim(0);
    TensorT<T> out({cout, H, W});
    for (std::size_t co = 0; co < cout; ++co) {
        T* op = out.plane(co);
        const T bias = b.data[co];
        for (std::size_t i = 0; i < H * W; ++i) op[i] = bias;
        for (std::size_t ci = 0; ci < cin; ++ci) {
            const T* xp = x.plane(ci);
            const T* wp = &w.data[(co * cin + ci) * 9];
            for (int ky = 0; ky < 3; ++ky) {
                const int dy = ky - 1;
                const std::size_t y0 = dy < 0 ? 1 : 0;
                const std::size_t y1 = dy > 0 ? H - 1 : H;
                for (int kx = 0; kx < 3; ++kx) {
                    const int dx = kx - 1;
                    const T wv = wp[ky * 3 + kx];
                    const std::size_t x0 = dx < 0 ? 1 : 0;
                    const std::size_t x1 = dx > 0 ? W - 1 : W;
                    for (std::size_t y = y0; y < y1; ++y) {
                        T* orow = op + y * W;
                        const T* xrow = xp + (y + dy) * W + dx;
                        for (std::size_t xi = x0; xi < x1; ++xi) orow[xi] += wv * xrow[xi];
                    }
                }
            }
        }
    }
    return out;
}

// Gradients w.r.t. input, weight and bias given the upstream gradient.
// Output tensors are overwritten.
template <typename T>
void conv3x3_backward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& gout,
                      TensorT<T>& gx, TensorT<T>& gw, TensorT<T>& gb) {
    const std::size_t cin = x.dim(0), H = x.dim(1), W = x.dim(2), cout = w.dim(0);
    require(gout.rank() == 3 && gout.dim(0) == cout && gout.dim(1) == H && gout.dim(2) == W,
            "conv3x3_backward: upstream gradient shape mismatch");
    gx = TensorT<T>(x.shape);
    gw = TensorT<T>(w.shape);
    gb = TensorT<T>({cout});
    for (std::size_t co = 0; co < cout; ++co) {
        const T* gp = gout.plane(co);
        T bsum = 0;
        for (std::size_t i = 0; i < H * W; ++i) bsum += gp[i];
        gb.data[co] = bsum;
        for (std::size_t ci = 0; ci < cin; ++ci) {
            const T* xp = x.plane(ci);
            T* gxp = gx.plane(ci);
            const T* wp = &w.data[(co * cin + ci) * 9];
            T* gwp = &gw.data[(co * cin + ci) * 9];
            for (int ky = 0; ky < 3; ++ky) {
                const int dy = ky - 1;
                const std::size_t y0 = dy < 0 ? 1 : 0;
                const std::size_t y1 = dy > 0 ? H - 1 : H;
                for (int kx = 0; kx < 3; ++kx) {
                    const int dx = kx - 1;
                    const T wv = wp[ky * 3 + kx];
                    const std::size_t x0 = dx < 0 ? 1 : 0;
                    const std::size_t x1 = dx > 0 ? W - 1 : W;
                    T wsum = 0;
                    for (std::size_t y = y0; y < y1; ++y) {
                        const T* grow = gp + y * W;
                        const T* xrow = xp + (y + dy) * W + dx;
                        T* gxrow = gxp + (y + dy) * W + dx;
                        for (std::size_t xi = x0; xi < x1; ++xi) {
                            wsum += grow[xi] * xrow[xi];
                            gxrow[xi] += wv * grow[xi];
                        }
                    }
                    gwp[ky * 3 + kx] = wsum;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// 2x2 max pooling, stride 2. Ties go to the first element in scan order.
// ---------------------------------------------------------------------------

template <typename T>
TensorT<T> maxpool2(const TensorT<T>& x) {
    require(x.rank() == 3, "maxpool2: input must be C x H x W");
    const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    require(H % 2 == 0 && W % 2 == 0, "maxpool2: spatial dims must be even");
    TensorT<T> out({C, H / 2, W / 2});
    for (std::size_t c = 0; c < C; ++c) {
        const T* xp = x.plane(c);
        T* op = out.plane(c);
        for (std::size_t y = 0; y < H; y += 2) {
            for (std::size_t xi = 0; xi < W; xi += 2) {
                const T* r0 = xp + y * W + xi;
                const T* r1 = r0 + W;
                T best = r0[0];
                if (r0[1] > best) best = r0[1];
                if (r1[0] > best) best = r1[0];
                if (r1[1] > best) best = r1[1];
                op[(y / 2) * (W / 2) + xi / 2] = best;
            }
        }
    }
    return out;
}

// Routes each upstream gradient entry to the argmax of its 2x2 window
// (first occurrence in scan order on ties).
template <typename T>
TensorT<T> maxpool2_backward(const TensorT<T>& x, const TensorT<T>& gout) {
    const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    require(gout.rank() == 3 && gout.dim(0) == C && gout.dim(1) == H / 2 && gout.dim(2) == W / 2,
            "maxpool2_backward: upstream gradient shape mismatch");
    TensorT<T> gx(x.shape);
    for (std::size_t c = 0; c < C; ++c) {
        const T* xp = x.plane(c);
        T* gp = gx.plane(c);
        const T* up = gout.plane(c);
        for (std::size_t y = 0; y < H; y += 2) {
            for (std::size_t xi = 0; xi < W; xi += 2) {
                const std::size_t o00 = y * W + xi;
                std::size_t best = o00;
                if (xp[o00 + 1] > xp[best]) best = o00 + 1;
                if (xp[o00 + W] > xp[best]) best = o00 + W;
                if (xp[o00 + W + 1] > xp[best]) best = o00 + W + 1;
                gp[best] += up[(y / 2) * (W / 2) + xi / 2];
            }
        }
    }
    return gx;
}

// ---------------------------------------------------------------------------
// Nearest-neighbor 2x upsampling.
// ---------------------------------------------------------------------------

template <typename T>
TensorT<T> upsample2(const TensorT<T>& x) {
    require(x.rank() == 3, "upsample2: input must be C x H x W");
    const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    TensorT<T> out({C, H * 2, W * 2});
    for (std::size_t c = 0; c < C; ++c) {
        const T* xp = x.plane(c);
        T* op = out.plane(c);
        for (std::size_t y = 0; y < 2 * H; ++y) {
            const T* xrow = xp + (y / 2) * W;
            T* orow = op + y * 2 * W;
            for (std::size_t xi = 0; xi < 2 * W; ++xi) orow[xi] = xrow[xi / 2];
        }
    }
    return out;
}

// Each input position receives the sum of its four replicas' gradients.
template <typename T>
TensorT<T> upsample2_backward(const TensorT<T>& gout) {
    require(gout.rank() == 3 && gout.dim(1) % 2 == 0 && gout.dim(2) % 2 == 0,
            "upsample2_backward: gradient dims must be even");
    const std::size_t C = gout.dim(0), H = gout.dim(1) / 2, W = gout.dim(2) / 2;
    TensorT<T> gx({C, H, W});
    for (std::size_t c = 0; c < C; ++c) {
        const T* gp = gout.plane(c);
        T* op = gx.plane(c);
        for (std::size_t y = 0; y < H; ++y) {
            const T* r0 = gp + (2 * y) * 2 * W;
            const T* r1 = r0 + 2 * W;
            T* orow = op + y * W;
            for (std::size_t xi = 0; xi < W; ++xi)
                orow[xi] = r0[2 * xi] + r0[2 * xi + 1] + r1[2 * xi] + r1[2 * xi + 1];
        }
    }
    return gx;
}

// ---------------------------------------------------------------------------
// Channel concatenation (skip connections): a's channels first, then b's.
// ---------------------------------------------------------------------------

template <typename T>
TensorT<T> concat_channels(const TensorT<T>& a, const TensorT<T>& b) {
    require(a.rank() == 3 && b.rank() == 3, "concat_channels: inputs must be C x H x W");
    require(b.dim(0) == 0 || (a.dim(1) == b.dim(1) && a.dim(2) == b.dim(2)),
            "concat_channels: spatial dims must match");
    TensorT<T> out({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
    std::copy(a.data.begin(), a.data.end(), out.data.begin());
    std::copy(b.data.begin(), b.data.end(), out.data.begin() + a.numel());
    return out;
}

// Splits an upstream gradient back into the two concatenated parts.
template <typename T>
void split_channels(const TensorT<T>& g, std::size_t c_first, TensorT<T>& ga, TensorT<T>& gb) {
    require(g.rank() == 3 && c_first <= g.dim(0), "split_channels: bad split point");
    const std::size_t H = g.dim(1), W = g.dim(2);
    ga = TensorT<T>({c_first, H, W});
    gb = TensorT<T>({g.dim(0) - c_first, H, W});
    std::copy(g.data.begin(), g.data.begin() + ga.numel(), ga.data.begin());
    std::copy(g.data.begin() + ga.numel(), g.data.end(), gb.data.begin());
}

// ---------------------------------------------------------------------------
// Activations. relu backward uses subgradient 0 at 0; tanh backward is
// computed from the cached forward output.
// ---------------------------------------------------------------------------

template <typename T>
TensorT<T> relu(const TensorT<T>& x) {
    TensorT<T> out(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i) out.data[i] = x.data[i] > T(0) ? x.data[i] : T(0);
    return out;
}

template <typename T>
TensorT<T> relu_backward(const TensorT<T>& x, const TensorT<T>& gout) {
    require(x.same_shape(gout), "relu_backward: shape mismatch");
    TensorT<T> gx(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i) gx.data[i] = x.data[i] > T(0) ? gout.data[i] : T(0);
    return gx;
}

template <typename T>
TensorT<T> tanh(const TensorT<T>& x) {
    TensorT<T> out(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i) out.data[i] = std::tanh(x.data[i]);
    return out;
}

template <typename T>
TensorT<T> tanh_backward(const TensorT<T>& y, const TensorT<T>& gout) {
    require(y.same_shape(gout), "tanh_backward: shape mismatch");
    TensorT<T> gx(y.shape);
    for (std::size_t i = 0; i < y.numel(); ++i)
        gx.data[i] = gout.data[i] * (T(1) - y.data[i] * y.data[i]);
    return gx;
}

// ---------------------------------------------------------------------------
// Losses. Training minimizes the sum of squared differences; test-time
// errors use the sum of absolute differences. Accumulation runs in double
// regardless of the tensor precision.
// ---------------------------------------------------------------------------

template <typename T>
double l2_loss(const TensorT<T>& pred, const TensorT<T>& target, TensorT<T>* grad = nullptr) {
    require(pred.same_shape(target), "l2_loss: shape mismatch");
    double sum = 0.0;
    if (grad) *grad = TensorT<T>(pred.shape);
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        const double d = static_cast<double>(pred.data[i]) - static_cast<double>(target.data[i]);
        sum += d * d;
        if (grad) grad->data[i] = T(2) * (pred.data[i] - target.data[i]);
    }
    return sum;
}

template <typename T>
double l1_error(const TensorT<T>& pred, const TensorT<T>& target) {
    require(pred.same_shape(target), "l1_error: shape mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.numel(); ++i)
        sum += std::abs(static_cast<double>(pred.data[i]) - static_cast<double>(target.data[i]));
    return sum;
}

// ---------------------------------------------------------------------------
// Plain SGD update on one parameter tensor: theta <- theta - lr * g.
// No momentum, no weight decay.
// ---------------------------------------------------------------------------

template <typename T>
void sgd_update(TensorT<T>& param, const TensorT<T>& grad, T lr) {
    require(lr > T(0), "sgd_update: learning rate must be positive");
    require(param.same_shape(grad), "sgd_update: shape mismatch");
    for (std::size_t i = 0; i < param.numel(); ++i) param.data[i] -= lr * grad.data[i];
}

}  // namespace arnet

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arnet/errors.hpp"
#include "arnet/rng.hpp"
#include "arnet/tensor.hpp"

// Attribute erasing: operators that strip a chosen attribute (color,
// orientation, resolution) from an image before restoration. An operator
// set enumerates into N concrete selections, one per combination of
// per-operator choices.

namespace arnet {

enum class ErasingKind { Graying, Rotation, ScaleHalf };

struct ErasingOp {
    ErasingKind kind;
    int selection_count;  // Graying 1, Rotation 4 (0/90/180/270 deg), ScaleHalf 1

    static ErasingOp graying() { return {ErasingKind::Graying, 1}; }
    static ErasingOp rotation() { return {ErasingKind::Rotation, 4}; }
    static ErasingOp scale_half() { return {ErasingKind::ScaleHalf, 1}; }
};

inline const char* erasing_name(ErasingKind k) {
    switch (k) {
        case ErasingKind::Graying: return "gray";
        case ErasingKind::Rotation: return "rot90";
        case ErasingKind::ScaleHalf: return "scale_half";
    }
    return "?";
}

// One concrete choice of parameters for every operator in the set.
struct Selection {
    std::size_t index = 0;      // position in the enumeration, [0, N)
    std::vector<int> choices;   // per-op choice, choices[k] in [0, m_k)
};

// Ordered list of erasing operators, applied first-to-last. May be empty,
// in which case the pipeline degenerates to plain reconstruction (N = 1).
struct ErasingOpSet {
    std::vector<ErasingOp> ops;

    std::size_t selection_count() const {
        std::size_t n = 1;
        for (const auto& op : ops) n *= static_cast<std::size_t>(op.selection_count);
        return n;
    }

    bool has(ErasingKind k) const {
        for (const auto& op : ops)
            if (op.kind == k) return true;
        return false;
    }

    // Channel count of the erased image given the original count.
    std::size_t output_channels(std::size_t c) const {
        return has(ErasingKind::Graying) ? 1 : c;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& op : ops) out.emplace_back(erasing_name(op.kind));
        return out;
    }

    static ErasingOpSet from_names(const std::vector<std::string>& names) {
        ErasingOpSet set;
        for (const auto& n : names) {
            if (n == "gray") {
                set.ops.push_back(ErasingOp::graying());
            } else if (n == "rot90") {
                set.ops.push_back(ErasingOp::rotation());
            } else if (n == "scale_half") {
                set.ops.push_back(ErasingOp::scale_half());
            } else {
                throw ConfigError("unknown erasing operator \"" + n +
                                  "\" (known: gray, rot90, scale_half)");
            }
        }
        return set;
    }

    // Rotation inside an enumerated pipeline needs square images; callers
    // must resize beforehand.
    void validate_for(std::size_t h, std::size_t w) const {
        if (has(ErasingKind::Rotation) && h != w)
            throw ConfigError("rotation erasing requires square images, got " +
                              std::to_string(h) + "x" + std::to_string(w));
        if (has(ErasingKind::ScaleHalf) && (h % 2 != 0 || w % 2 != 0))
            throw ConfigError("scale_half erasing requires even image dims");
    }
};

// Mixed-radix decode of a selection index; the last operator's choice
// varies fastest.
inline Selection selection_from_index(const ErasingOpSet& set, std::size_t index) {
    Selection sel;
    sel.index = index;
    sel.choices.resize(set.ops.size());
    for (std::size_t k = set.ops.size(); k-- > 0;) {
        const std::size_t m = static_cast<std::size_t>(set.ops[k].selection_count);
        sel.choices[k] = static_cast<int>(index % m);
        index /= m;
    }
    return sel;
}

inline std::vector<Selection> enumerate_selections(const ErasingOpSet& set) {
    std::vector<Selection> out;
    const std::size_t n = set.selection_count();
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(selection_from_index(set, i));
    return out;
}

// Uniform draw over the N selections from an explicit RNG stream.
inline Selection sample_selection(const ErasingOpSet& set, Rng& rng) {
    return selection_from_index(set, uniform_index(rng, set.selection_count()));
}

// ---------------------------------------------------------------------------
// The operators themselves.
// ---------------------------------------------------------------------------

// Channel-mean grayscale. Single-channel input passes through unchanged.
template <typename T>
TensorT<T> gray(const TensorT<T>& x) {
    require(x.rank() == 3 && x.dim(0) >= 1, "gray: input must be C x H x W with C >= 1");
    const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    if (C == 1) return x;
    TensorT<T> out({1, H, W});
    const T inv = T(1) / static_cast<T>(C);
    for (std::size_t c = 0; c < C; ++c) {
        const T* xp = x.plane(c);
        for (std::size_t i = 0; i < H * W; ++i) out.data[i] += xp[i];
    }
    for (std::size_t i = 0; i < H * W; ++i) out.data[i] *= inv;
    return out;
}

// Anticlockwise rotation by k*90 degrees; a pure pixel permutation.
// Source (r, c) lands at (W-1-c, r).
template <typename T>
TensorT<T> rotate90(const TensorT<T>& x, int k) {
    require(x.rank() == 3, "rotate90: input must be C x H x W");
    const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    k = ((k % 4) + 4) % 4;
    if (k == 0) return x;
    const bool swap = (k % 2) == 1;
    TensorT<T> out({C, swap ? W : H, swap ? H : W});
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t r = 0; r < H; ++r) {
            for (std::size_t col = 0; col < W; ++col) {
                const T v = x.at(c, r, col);
                switch (k) {
                    case 1: out.at(c, W - 1 - col, r) = v; break;
                    case 2: out.at(c, H - 1 - r, W - 1 - col) = v; break;
                    default: out.at(c, col, H - 1 - r) = v; break;
                }
            }
        }
    }
    return out;
}

// 2x2 mean downsample.
template <typename T>
TensorT<T> scale_half_down(const TensorT<T>& x) {
    require(x.rank() == 3, "scale_half: input must be C x H x W");
    const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    require(H % 2 == 0 && W % 2 == 0, "scale_half: spatial dims must be even");
    TensorT<T> out({C, H / 2, W / 2});
    for (std::size_t c = 0; c < C; ++c) {
        const T* xp = x.plane(c);
        T* op = out.plane(c);
        for (std::size_t y = 0; y < H; y += 2)
            for (std::size_t xi = 0; xi < W; xi += 2) {
                const T* r0 = xp + y * W + xi;
                const T* r1 = r0 + W;
                op[(y / 2) * (W / 2) + xi / 2] = (r0[0] + r0[1] + r1[0] + r1[1]) * T(0.25);
            }
    }
    return out;
}

// Resolution erasing: mean-pool down, then nearest re-expansion so the
// network input keeps the supervision target's spatial dims.
template <typename T>
TensorT<T> scale_half(const TensorT<T>& x) {
    TensorT<T> down = scale_half_down(x);
    TensorT<T> out({x.dim(0), x.dim(1), x.dim(2)});
    const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    for (std::size_t c = 0; c < C; ++c) {
        const T* dp = down.plane(c);
        T* op = out.plane(c);
        for (std::size_t y = 0; y < H; ++y) {
            const T* drow = dp + (y / 2) * (W / 2);
            T* orow = op + y * W;
            for (std::size_t xi = 0; xi < W; ++xi) orow[xi] = drow[xi / 2];
        }
    }
    return out;
}

// Applies every operator with its selected choice, in declared order.
template <typename T>
TensorT<T> apply(const TensorT<T>& image, const ErasingOpSet& set, const Selection& sel) {
    require(sel.choices.size() == set.ops.size(), "apply: selection does not match operator set");
    TensorT<T> cur = image;
    for (std::size_t k = 0; k < set.ops.size(); ++k) {
        switch (set.ops[k].kind) {
            case ErasingKind::Graying: cur = gray(cur); break;
            case ErasingKind::Rotation: cur = rotate90(cur, sel.choices[k]); break;
            case ErasingKind::ScaleHalf: cur = scale_half(cur); break;
        }
    }
    return cur;
}

}  // namespace arnet

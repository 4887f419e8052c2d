#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "arnet/errors.hpp"

namespace arnet {

// Dense row-major tensor of dynamic rank. Activations are C×H×W, conv
// kernels C_out×C_in×3×3, biases C. Storage is contiguous; data.size()
// always equals the product of the dims.
template <typename T>
struct TensorT {
    std::vector<std::size_t> shape;
    std::vector<T> data;

    TensorT() = default;
    explicit TensorT(std::vector<std::size_t> dims)
        : shape(std::move(dims)), data(numel_of(shape), T(0)) {}
    TensorT(std::vector<std::size_t> dims, std::vector<T> values)
        : shape(std::move(dims)), data(std::move(values)) {
        require(data.size() == numel_of(shape), "tensor: data length does not match shape");
    }

    static std::size_t numel_of(const std::vector<std::size_t>& dims) {
        std::size_t n = 1;
        for (std::size_t d : dims) n *= d;
        return n;
    }

    std::size_t numel() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const { return shape[i]; }
    bool same_shape(const TensorT& other) const { return shape == other.shape; }

    // Rank-3 access (c, y, x).
    T& at(std::size_t c, std::size_t y, std::size_t x) {
        return data[(c * shape[1] + y) * shape[2] + x];
    }
    T at(std::size_t c, std::size_t y, std::size_t x) const {
        return data[(c * shape[1] + y) * shape[2] + x];
    }

    // Pointer to the start of channel plane c of a rank-3 tensor.
    T* plane(std::size_t c) { return data.data() + c * shape[1] * shape[2]; }
    const T* plane(std::size_t c) const { return data.data() + c * shape[1] * shape[2]; }

    void fill(T v) {
        for (T& x : data) x = v;
    }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

using Tensor = TensorT<float>;

template <typename To, typename From>
TensorT<To> tensor_cast(const TensorT<From>& t) {
    TensorT<To> out(t.shape);
    for (std::size_t i = 0; i < t.data.size(); ++i)
        out.data[i] = static_cast<To>(t.data[i]);
    return out;
}

}  // namespace arnet

#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "latentclean/errors.hpp"

namespace latentclean {

/// Dense n-dimensional array, row-major. The scalar type is a template
/// parameter so the same layer code runs in float for training and in double
/// for finite-difference verification.
template <typename T>
struct TensorT {
    std::vector<size_t> shape;
    std::vector<T> data;

    TensorT() = default;

    explicit TensorT(std::vector<size_t> s) : shape(std::move(s)) {
        data.assign(count(shape), T(0));
    }

    TensorT(std::vector<size_t> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != count(shape)) {
            throw ShapeError("tensor data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str());
        }
    }

    static size_t count(const std::vector<size_t>& s) {
        size_t n = 1;
        for (size_t d : s) n *= d;
        return n;
    }

    static TensorT full(std::vector<size_t> s, T v) {
        TensorT t(std::move(s));
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }

    size_t size() const { return data.size(); }
    size_t ndim() const { return shape.size(); }
    size_t dim(size_t i) const { return shape.at(i); }

    T* ptr() { return data.data(); }
    const T* ptr() const { return data.data(); }

    T& operator[](size_t i) { return data[i]; }
    const T& operator[](size_t i) const { return data[i]; }

    /// Reshape in place; element count must be preserved.
    void reshape(std::vector<size_t> s) {
        if (count(s) != data.size()) {
            throw ShapeError("reshape from " + shape_str() + " would change element count");
        }
        shape = std::move(s);
    }

    bool same_shape(const TensorT& o) const { return shape == o.shape; }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    std::string shape_str() const {
        std::ostringstream ss;
        ss << "[";
        for (size_t i = 0; i < shape.size(); ++i) ss << (i ? "x" : "") << shape[i];
        ss << "]";
        return ss.str();
    }

    bool all_finite() const {
        for (T v : data) {
            if (!std::isfinite(static_cast<double>(v))) return false;
        }
        return true;
    }
};

using Tensor = TensorT<float>;

template <typename T>
void require_same_shape(const TensorT<T>& a, const TensorT<T>& b, const char* where) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(where) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    }
}

template <typename T>
void require_finite(const TensorT<T>& t, const char* where) {
    if (!t.all_finite()) throw NumericError(std::string(where) + ": tensor contains NaN or Inf");
}

/// Convert element type (float <-> double), preserving shape.
template <typename To, typename From>
TensorT<To> tensor_cast(const TensorT<From>& t) {
    TensorT<To> out(t.shape);
    for (size_t i = 0; i < t.size(); ++i) out.data[i] = static_cast<To>(t.data[i]);
    return out;
}

} // namespace latentclean

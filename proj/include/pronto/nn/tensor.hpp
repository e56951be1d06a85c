#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <vector>

#include "pronto/error.hpp"

namespace pronto::nn {

// Dense row-major tensor. Storage is S (float in production, double in numerical tests);
// every reduction over elements accumulates in 64-bit regardless of S.
template <class S>
struct Tensor {
    std::vector<int> shape;
    std::vector<S> data;

    Tensor() = default;

    static Tensor zeros(std::vector<int> shp) {
        Tensor t;
        t.shape = std::move(shp);
        t.data.assign(static_cast<std::size_t>(numel_of(t.shape)), S(0));
        return t;
    }

    static std::int64_t numel_of(const std::vector<int>& shp) {
        std::int64_t n = 1;
        for (int d : shp) {
            if (d <= 0) throw ShapeError("tensor dimensions must be positive");
            n *= d;
        }
        return n;
    }

    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }

    void reshape(std::vector<int> shp) {
        if (numel_of(shp) != numel()) throw ShapeError("reshape changes element count");
        shape = std::move(shp);
    }

    // Row-major offset; the rightmost index varies fastest.
    std::int64_t offset(std::span<const int> idx) const {
        if (idx.size() != shape.size()) throw ShapeError("index rank mismatch");
        std::int64_t off = 0;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] < 0 || idx[i] >= shape[i]) throw ShapeError("index out of bounds");
            off = off * shape[i] + idx[i];
        }
        return off;
    }

    S& at(std::initializer_list<int> idx) {
        return data[static_cast<std::size_t>(offset(std::span<const int>(idx.begin(), idx.size())))];
    }
    const S& at(std::initializer_list<int> idx) const {
        return data[static_cast<std::size_t>(offset(std::span<const int>(idx.begin(), idx.size())))];
    }

    double sum() const {
        double acc = 0.0;
        for (const S& v : data) acc += static_cast<double>(v);
        return acc;
    }

    bool all_finite() const {
        for (const S& v : data) {
            if (!std::isfinite(static_cast<double>(v))) return false;
        }
        return true;
    }

    template <class T>
    Tensor<T> cast() const {
        Tensor<T> out;
        out.shape = shape;
        out.data.reserve(data.size());
        for (const S& v : data) out.data.push_back(static_cast<T>(v));
        return out;
    }
};

}  // namespace pronto::nn

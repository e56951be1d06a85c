#pragma once

#include <span>
#include <vector>

#include "pronto/iq.hpp"

namespace pronto {

// The augment stage emits (L, 2) row-major float examples; the engine wants channel-major
// (2, L). These two shims are the only place the layouts meet.
inline void feed_rowmajor(std::span<const float> iq, std::vector<float>& input) {
    const std::size_t len = iq.size() / 2;
    input.resize(iq.size());
    for (std::size_t t = 0; t < len; ++t) {
        input[t] = iq[2 * t];
        input[len + t] = iq[2 * t + 1];
    }
}

inline void feed_complex(std::span<const cdouble> x, std::vector<float>& input) {
    const std::size_t len = x.size();
    input.resize(2 * len);
    for (std::size_t t = 0; t < len; ++t) {
        input[t] = static_cast<float>(x[t].real());
        input[len + t] = static_cast<float>(x[t].imag());
    }
}

}  // namespace pronto

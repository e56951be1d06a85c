#pragma once

#include <complex>
#include <vector>

namespace pronto {

using cdouble = std::complex<double>;

// Complex baseband samples plus the rate they were taken at.
struct IqBuffer {
    std::vector<cdouble> samples;
    double sample_rate = 0.0;

    std::size_t size() const { return samples.size(); }
};

}  // namespace pronto

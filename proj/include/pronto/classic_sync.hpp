#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pronto/iq.hpp"

namespace pronto {

// Delay-and-correlate packet detector over the short training field.
struct DetectConfig {
    double beta = 0.8;        // threshold on the normalized metric
    int eta = 16;             // short-symbol length (N/4)
    // The raw metric crosses beta up to two lags before the true start (the correlation
    // window already overlaps the field almost fully there), so the reported start is
    // refined to the first lag within start_ratio of the local run maximum. 0.92 sits
    // between the worst single-sample partial (0.835 on the clean field) and the plateau.
    double start_ratio = 0.92;
};

struct DetectionResult {
    // 0-based index of the first short-field sample, absent when validation fails.
    std::optional<int> start_index;
    int peak_count = 0;             // lags whose metric exceeds beta
    // Plateau lags recorded 1-based (reference-receiver bookkeeping), so that
    // start_index == peak_indices[0] - 1 whenever detection succeeds.
    std::vector<int> peak_indices;
};

// rho_norm(tau) = |sum_{i<eta} x(tau+i) conj(x(tau+i+eta))|^2 / (sum_{i<eta} |x(tau+i+eta)|^2)^2
// for tau in [0, len - 2 eta]. A zero-energy delayed window yields 0, not NaN.
std::vector<double> normalized_autocorrelation(std::span<const cdouble> x, int eta);

// Detection requires at least 1.5*eta threshold crossings whose first eta+1 entries span
// fewer than 3*eta lags (a run of nearby peaks, not isolated spikes).
DetectionResult detect_packet(std::span<const cdouble> x, const DetectConfig& cfg);

// Coarse CFO from the short field: correlate two 8*eta-sample windows offset by one symbol,
// starting 3/4 of a symbol in. Unambiguous up to +/- fs / (2 eta). Input must be one full
// short field (10 eta samples).
double coarse_cfo_stf(std::span<const cdouble> lstf, int eta, double fs);

// Fine CFO from the long field: correlate the two repeated symbols (offsets N/2 and 3N/2).
// Unambiguous up to +/- fs / (2N). Input must be one full long field (2.5 N samples).
double fine_cfo_lltf(std::span<const cdouble> lltf, int fft_len, double fs);

// Per-sample noise power from the difference of the two repeated long-field symbols.
// Assumes the buffer is CFO-compensated; residual rotation leaks signal into the estimate.
double noise_power_estimate(std::span<const cdouble> lltf, int fft_len);

}  // namespace pronto

#include "pronto/classic_sync.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pronto/error.hpp"

namespace pronto {
namespace {

void check_eta(int eta) {
    if (eta < 2) throw ConfigError("eta must be at least 2");
}

}  // namespace

std::vector<double> normalized_autocorrelation(std::span<const cdouble> x, int eta) {
    check_eta(eta);
    if (x.size() < static_cast<std::size_t>(10 * eta)) {
        throw ConfigError("normalized_autocorrelation: need at least 10*eta samples");
    }
    const int n = static_cast<int>(x.size()) - 2 * eta + 1;
    std::vector<double> out(n);
    for (int t = 0; t < n; ++t) {
        cdouble num = 0.0;
        double den = 0.0;
        for (int i = 0; i < eta; ++i) {
            num += x[t + i] * std::conj(x[t + i + eta]);
            den += std::norm(x[t + i + eta]);
        }
        out[t] = den == 0.0 ? 0.0 : std::norm(num) / (den * den);
    }
    return out;
}

DetectionResult detect_packet(std::span<const cdouble> x, const DetectConfig& cfg) {
    if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) throw ConfigError("beta must sit in (0, 1)");
    const std::vector<double> rho = normalized_autocorrelation(x, cfg.eta);

    DetectionResult res;
    std::vector<int> crossings;
    for (int t = 0; t < static_cast<int>(rho.size()); ++t) {
        if (rho[t] > cfg.beta) crossings.push_back(t);
    }
    res.peak_count = static_cast<int>(crossings.size());

    const int min_peaks = (3 * cfg.eta + 1) / 2;  // 1.5 eta, rounded up
    if (res.peak_count < min_peaks) return res;
    const int span_at = std::min(cfg.eta, res.peak_count - 1);
    if (crossings[span_at] - crossings[0] >= 3 * cfg.eta) return res;

    // Refine within the validated run: the first lag close enough to the run maximum is
    // the start of the full-correlation plateau (partial-overlap lags sit well below it).
    const int lo = crossings[0];
    const int hi = std::min(lo + 3 * cfg.eta, static_cast<int>(rho.size()));
    double peak = 0.0;
    for (int t = lo; t < hi; ++t) peak = std::max(peak, rho[t]);
    int start = lo;
    while (start < hi - 1 && rho[start] < cfg.start_ratio * peak) ++start;

    res.start_index = start;
    for (int t = start; t < hi; ++t) {
        if (rho[t] > cfg.beta) res.peak_indices.push_back(t + 1);
    }
    return res;
}

double coarse_cfo_stf(std::span<const cdouble> lstf, int eta, double fs) {
    check_eta(eta);
    if (lstf.size() != static_cast<std::size_t>(10 * eta)) {
        throw ConfigError("coarse_cfo_stf: expected one full short field (10*eta samples)");
    }
    const int g = 3 * eta / 4;
    cdouble acc = 0.0;
    for (int i = 0; i < 8 * eta; ++i) {
        acc += std::conj(lstf[g + i]) * lstf[g + eta + i];
    }
    return std::arg(acc) * fs / (2.0 * std::numbers::pi * eta);
}

double fine_cfo_lltf(std::span<const cdouble> lltf, int fft_len, double fs) {
    const int n = fft_len;
    if (lltf.size() != static_cast<std::size_t>(n / 2 + 2 * n)) {
        throw ConfigError("fine_cfo_lltf: expected one full long field (2.5*N samples)");
    }
    cdouble acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += std::conj(lltf[n / 2 + i]) * lltf[3 * n / 2 + i];
    }
    return std::arg(acc) * fs / (2.0 * std::numbers::pi * n);
}

double noise_power_estimate(std::span<const cdouble> lltf, int fft_len) {
    const int n = fft_len;
    if (lltf.size() != static_cast<std::size_t>(n / 2 + 2 * n)) {
        throw ConfigError("noise_power_estimate: expected one full long field (2.5*N samples)");
    }
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += std::norm(lltf[n / 2 + i] - lltf[3 * n / 2 + i]);
    }
    return acc / (2.0 * n);
}

}  // namespace pronto

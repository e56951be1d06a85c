#include "pronto/waveform.hpp"

#include <cmath>
#include <numbers>

#include "pronto/error.hpp"

namespace pronto {
namespace {

// Legacy 20 MHz subcarrier maps, indexed k = -26..26. The short-field map occupies only
// multiples of 4, which is what makes the time waveform N/4-periodic.
constexpr int kMapHalfSpan = 26;

struct Tone {
    int k;
    double re;
    double im;
};

constexpr Tone kShortMap[] = {
    {-24, 1, 1},  {-20, -1, -1}, {-16, 1, 1}, {-12, -1, -1}, {-8, -1, -1}, {-4, 1, 1},
    {4, -1, -1},  {8, -1, -1},   {12, 1, 1},  {16, 1, 1},    {20, 1, 1},   {24, 1, 1},
};

constexpr int kLongMap[2 * kMapHalfSpan + 1] = {
    1, 1, -1, -1, 1,  1, -1, 1, -1, 1, 1, 1,  1,  1, 1, -1, -1, 1,  1,  -1, 1, -1, 1, 1, 1, 1, 0,
    1, -1, -1, 1, 1, -1, 1, -1, 1, -1, -1, -1, -1, -1, 1, 1, -1, -1, 1, -1, 1, -1, 1, 1, 1, 1,
};

// Direct inverse DFT of a sparse spectrum over sample indices [0, count). The spectra here
// have at most 52 tones and count <= N, so the straight sum is cheap, pure, and exact enough.
std::vector<cdouble> idft(const std::vector<std::pair<int, cdouble>>& tones, int fft_len,
                          int count) {
    std::vector<cdouble> out(count);
    for (int n = 0; n < count; ++n) {
        cdouble acc = 0.0;
        for (const auto& [k, v] : tones) {
            const double ph = 2.0 * std::numbers::pi * k * n / fft_len;
            acc += v * cdouble(std::cos(ph), std::sin(ph));
        }
        out[n] = acc / static_cast<double>(fft_len);
    }
    return out;
}

void scale_to_unit_power(std::vector<cdouble>& x) {
    double acc = 0.0;
    for (const auto& s : x) acc += std::norm(s);
    const double mean = acc / static_cast<double>(x.size());
    if (mean <= 0.0) throw NumericError("waveform has zero power");
    const double g = 1.0 / std::sqrt(mean);
    for (auto& s : x) s *= g;
}

// Tones that fit the chosen FFT length: zero-padded for N > 64, truncated to the available
// bins for small N (the multiples-of-4 structure of the short map survives truncation).
std::vector<std::pair<int, cdouble>> short_tones(int fft_len) {
    std::vector<std::pair<int, cdouble>> tones;
    const double amp = std::sqrt(13.0 / 6.0);
    for (const auto& t : kShortMap) {
        if (std::abs(t.k) <= fft_len / 2 - 1) {
            tones.emplace_back(t.k, amp * cdouble(t.re, t.im));
        }
    }
    return tones;
}

std::vector<std::pair<int, cdouble>> long_tones(int fft_len) {
    std::vector<std::pair<int, cdouble>> tones;
    for (int k = -kMapHalfSpan; k <= kMapHalfSpan; ++k) {
        const int v = kLongMap[k + kMapHalfSpan];
        if (v != 0 && std::abs(k) <= fft_len / 2 - 1) {
            tones.emplace_back(k, cdouble(v, 0.0));
        }
    }
    return tones;
}

}  // namespace

void WaveformConfig::validate() const {
    if (fft_len < 16 || (fft_len & (fft_len - 1)) != 0) {
        throw ConfigError("fft_len must be a power of two >= 16");
    }
    if (!(sample_rate > 0.0)) {
        throw ConfigError("sample_rate must be positive");
    }
}

IqBuffer generate_lstf(const WaveformConfig& cfg) {
    cfg.validate();
    const int period = cfg.eta();
    std::vector<cdouble> one = idft(short_tones(cfg.fft_len), cfg.fft_len, period);
    std::vector<cdouble> field;
    field.reserve(cfg.lstf_len());
    for (int rep = 0; rep < 10; ++rep) field.insert(field.end(), one.begin(), one.end());
    scale_to_unit_power(field);
    return {std::move(field), cfg.sample_rate};
}

IqBuffer generate_lltf(const WaveformConfig& cfg) {
    cfg.validate();
    const int n = cfg.fft_len;
    std::vector<cdouble> sym = idft(long_tones(n), n, n);
    std::vector<cdouble> field;
    field.reserve(cfg.lltf_len());
    field.insert(field.end(), sym.begin() + n / 2, sym.end());  // cyclic prefix
    field.insert(field.end(), sym.begin(), sym.end());
    field.insert(field.end(), sym.begin(), sym.end());
    scale_to_unit_power(field);
    return {std::move(field), cfg.sample_rate};
}

IqBuffer generate_standard_preamble(const WaveformConfig& cfg) {
    IqBuffer out = generate_lstf(cfg);
    const IqBuffer lltf = generate_lltf(cfg);
    out.samples.insert(out.samples.end(), lltf.samples.begin(), lltf.samples.end());
    return out;
}

IqBuffer generate_pronto_preamble(const WaveformConfig& cfg) { return generate_lltf(cfg); }

}  // namespace pronto

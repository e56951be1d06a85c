#pragma once

#include "pronto/iq.hpp"

namespace pronto {

// Geometry of the legacy preamble fields. With the defaults (N=64 at 5 MHz) the short
// training field is 10 repetitions of a 16-sample symbol and the long training field is
// a 32-sample cyclic prefix followed by two identical 64-sample symbols; both span 160
// samples, so a full standard preamble is 320.
struct WaveformConfig {
    int fft_len = 64;           // N; power of two, at least 16
    double sample_rate = 5e6;   // f_s in Hz

    int eta() const { return fft_len / 4; }                 // short-symbol length
    int lstf_len() const { return 10 * eta(); }             // 2.5 N
    int lltf_len() const { return fft_len / 2 + 2 * fft_len; }  // 2.5 N
    int preamble_len() const { return lstf_len() + lltf_len(); }
    double subcarrier_spacing() const { return sample_rate / fft_len; }
    // Shift classes for the detector: start offsets 0..K plus the non-detectable class,
    // where K = lltf_len - fft_len.
    int num_classes() const { return lltf_len() - fft_len + 2; }

    void validate() const;  // throws ConfigError

    bool operator==(const WaveformConfig&) const = default;
};

// All generators are pure functions of cfg (no hidden state), normalized to unit average
// power per field. Symbol repetitions are produced by tiling one synthesized period, so
// the periodicity invariants hold bit-exactly.
IqBuffer generate_lstf(const WaveformConfig& cfg);
IqBuffer generate_lltf(const WaveformConfig& cfg);

// Standard packet preamble: short field then long field.
IqBuffer generate_standard_preamble(const WaveformConfig& cfg);

// Preamble of the short-format packet: the long training field alone.
IqBuffer generate_pronto_preamble(const WaveformConfig& cfg);

}  // namespace pronto

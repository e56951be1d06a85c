#pragma once

#include <cstdint>
#include <limits>

#include "pronto/iq.hpp"
#include "pronto/rng.hpp"
#include "pronto/waveform.hpp"

namespace pronto {

enum class PacketFormat { kStandard, kPronto };

// Impairments applied around one synthesized packet. snr_db may be +infinity, which is the
// noiseless sentinel (noise power exactly zero, no RNG consumed for noise).
struct ChannelProfile {
    double snr_db = std::numeric_limits<double>::infinity();
    double cfo_hz = 0.0;
    int lead_len = 0;
    int trail_len = 0;
    // Length of a data-like gaussian chunk (power P_X) ending right where the packet
    // starts, emulating the tail of a previous transmission. Clamped to lead_len.
    int lead_data_len = 0;
    PacketFormat format = PacketFormat::kStandard;
    std::uint64_t seed = 1;
};

struct Capture {
    IqBuffer buf;
    int truth_start = 0;   // index of the first preamble sample
    double truth_cfo = 0.0;
    double p_signal = 1.0;  // preamble fields are unit average power by construction
    double p_noise = 0.0;   // zero when noiseless
};

// y[i] = x[i] * exp(+j 2 pi f (t0 + i) / fs). t0 anchors the phase ramp so that separately
// rotated segments of one transmission line up exactly.
IqBuffer apply_cfo(const IqBuffer& x, double f_hz, std::int64_t t0);

// Adds circularly symmetric white gaussian noise sized against the measured average power
// of x. Returns the per-sample noise power used; +inf SNR adds nothing and returns 0.
double add_awgn(IqBuffer& x, double snr_db, Rng& rng);

// [lead filler | rotated preamble + noise | trail filler]; filler is noise at the same
// P_N, with the optional data-like chunk adjacent to the packet.
Capture make_capture(const WaveformConfig& cfg, const ChannelProfile& profile);

}  // namespace pronto

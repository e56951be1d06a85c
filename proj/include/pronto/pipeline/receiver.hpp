#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pronto/channel.hpp"
#include "pronto/classic_sync.hpp"
#include "pronto/iq.hpp"
#include "pronto/nn/net.hpp"
#include "pronto/nn/spec.hpp"
#include "pronto/waveform.hpp"

namespace pronto {

// A synthetic on-air trace: packets of either format at configured offsets and gaps over
// a constant noise floor (packets are unit power, so one snr_db fixes the floor; +inf
// means noiseless). Gaps are noise-only stretches before each packet.
struct StreamItem {
    PacketFormat format = PacketFormat::kStandard;
    double cfo_hz = 0.0;
    int gap_before = 0;
};

struct StreamSpec {
    WaveformConfig cfg;
    double snr_db = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 1;
    int tail_gap = 0;
    std::vector<StreamItem> items;

    void validate() const;  // throws ConfigError
};

struct StreamTruth {
    std::int64_t start = 0;  // first preamble sample
    PacketFormat format = PacketFormat::kStandard;
    double cfo_hz = 0.0;
};

struct Stream {
    IqBuffer buf;
    std::vector<StreamTruth> truth;
};

Stream build_stream(const StreamSpec& spec);

// JSON form mirrors the struct in snake_case: {"fft_len", "sample_rate", "snr_db",
// "seed", "tail_gap", "items": [{"format": "standard"|"pronto", "cfo_hz", "gap_before"}]}.
// snr_db accepts the string "inf". Throws FormatError on malformed input.
StreamSpec stream_spec_from_json(const std::string& text);

enum class ReceiverPath { kLegacy, kPronto };

struct ReceiverEvent {
    std::int64_t buffer_offset = 0;  // window origin where the decision fired
    ReceiverPath path = ReceiverPath::kLegacy;
    std::int64_t start_index = 0;    // absolute index of the detected packet start
    double coarse_cfo_hz = 0.0;
};

struct ReceiverConfig {
    DetectConfig detect;  // eta is overridden from the waveform config
    int hop = 0;          // advance when nothing fires; 0 means one short symbol
};

// Backward-compatible front end over a raw stream. Per window: classical short-field
// detection first (emitting a legacy event with the classical coarse offset and skipping
// past the full preamble); otherwise the shift classifier on one long-field-sized window
// — a detectable class yields a pronto event whose coarse offset comes from the regressor
// on the re-fetched, shift-aligned window (the packet is then skipped); otherwise the
// window advances by the hop. Streams shorter than one long field are degenerate input.
std::vector<ReceiverEvent> receiver_decision_flow(
    const IqBuffer& stream, const nn::ModelSpec& pd_spec, const nn::Params<float>& pd_params,
    const nn::ModelSpec& cfo_spec, const nn::Params<float>& cfo_params,
    const WaveformConfig& cfg, double delta_f, const ReceiverConfig& rcfg = {});

}  // namespace pronto

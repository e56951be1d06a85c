#include "pronto/pipeline/receiver.hpp"

#include <cmath>
#include <span>

#include <json.hpp>

#include "pronto/augment.hpp"
#include "pronto/error.hpp"
#include "pronto/pipeline/eval.hpp"
#include "pronto/rng.hpp"

namespace pronto {

using nlohmann::json;

void StreamSpec::validate() const {
    cfg.validate();
    if (tail_gap < 0) throw ConfigError("tail_gap must be non-negative");
    for (const StreamItem& item : items) {
        if (item.gap_before < 0) throw ConfigError("gap_before must be non-negative");
    }
}

Stream build_stream(const StreamSpec& spec) {
    spec.validate();
    const double p_noise =
        std::isinf(spec.snr_db) ? 0.0 : std::pow(10.0, -spec.snr_db / 10.0);
    Rng rng(spec.seed);

    Stream stream;
    stream.buf.sample_rate = spec.cfg.sample_rate;
    std::vector<cdouble>& out = stream.buf.samples;
    auto push_noise = [&](int n) {
        for (int i = 0; i < n; ++i) {
            out.push_back(p_noise == 0.0 ? cdouble(0.0, 0.0)
                                         : rng.cgaussian(cdouble(0.0, 0.0), p_noise));
        }
    };

    for (const StreamItem& item : spec.items) {
        push_noise(item.gap_before);
        const IqBuffer preamble = item.format == PacketFormat::kStandard
                                      ? generate_standard_preamble(spec.cfg)
                                      : generate_pronto_preamble(spec.cfg);
        const IqBuffer rotated = apply_cfo(preamble, item.cfo_hz, 0);
        stream.truth.push_back(
            {static_cast<std::int64_t>(out.size()), item.format, item.cfo_hz});
        for (const cdouble& s : rotated.samples) {
            out.push_back(p_noise == 0.0
                              ? s
                              : s + rng.cgaussian(cdouble(0.0, 0.0), p_noise));
        }
    }
    push_noise(spec.tail_gap);
    return stream;
}

StreamSpec stream_spec_from_json(const std::string& text) {
    StreamSpec spec;
    try {
        const json j = json::parse(text);
        spec.cfg.fft_len = j.value("fft_len", spec.cfg.fft_len);
        spec.cfg.sample_rate = j.value("sample_rate", spec.cfg.sample_rate);
        const json& snr = j.at("snr_db");
        if (snr.is_string()) {
            if (snr.get<std::string>() != "inf") {
                throw FormatError("bad snr_db: " + snr.get<std::string>());
            }
            spec.snr_db = std::numeric_limits<double>::infinity();
        } else {
            spec.snr_db = snr.get<double>();
        }
        spec.seed = j.value("seed", std::uint64_t{1});
        spec.tail_gap = j.value("tail_gap", 0);
        for (const json& it : j.at("items")) {
            StreamItem item;
            const auto fmt = it.at("format").get<std::string>();
            if (fmt == "standard") {
                item.format = PacketFormat::kStandard;
            } else if (fmt == "pronto") {
                item.format = PacketFormat::kPronto;
            } else {
                throw FormatError("unknown packet format: " + fmt);
            }
            item.cfo_hz = it.at("cfo_hz").get<double>();
            item.gap_before = it.value("gap_before", 0);
            spec.items.push_back(item);
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad stream spec: ") + e.what());
    }
    try {
        spec.validate();
    } catch (const ConfigError& e) {
        throw FormatError("stream spec failed validation: " + std::string(e.what()));
    }
    return spec;
}

std::vector<ReceiverEvent> receiver_decision_flow(
    const IqBuffer& stream, const nn::ModelSpec& pd_spec, const nn::Params<float>& pd_params,
    const nn::ModelSpec& cfo_spec, const nn::Params<float>& cfo_params,
    const WaveformConfig& cfg, double delta_f, const ReceiverConfig& rcfg) {
    cfg.validate();
    const std::span<const cdouble> samples(stream.samples);
    const auto n = static_cast<std::int64_t>(samples.size());
    const std::int64_t window = cfg.lltf_len();
    const std::int64_t preamble = cfg.preamble_len();
    const std::int64_t lstf = cfg.lstf_len();
    if (n < window) throw DegenerateInput("stream shorter than one long training field");

    const nn::Plan pd_plan = nn::make_plan(pd_spec);
    const nn::Plan cfo_plan = nn::make_plan(cfo_spec);
    nn::Workspace<float> pd_ws;
    pd_ws.init(pd_plan);
    nn::Workspace<float> cfo_ws;
    cfo_ws.init(cfo_plan);

    DetectConfig det_cfg = rcfg.detect;
    det_cfg.eta = cfg.eta();
    const std::int64_t hop = rcfg.hop > 0 ? rcfg.hop : cfg.eta();
    const int max_shift = cfg.lltf_len() - cfg.fft_len;  // last detectable class

    std::vector<ReceiverEvent> events;
    std::int64_t pos = 0;
    while (pos + window <= n) {
        // Stage 1: classical short-field detection over up to one full preamble.
        const std::int64_t wlen = std::min(preamble, n - pos);
        if (wlen >= lstf) {
            const DetectionResult det =
                detect_packet(samples.subspan(static_cast<std::size_t>(pos),
                                              static_cast<std::size_t>(wlen)),
                              det_cfg);
            if (det.start_index) {
                const std::int64_t s = pos + *det.start_index;
                if (s + lstf <= n) {
                    const double coarse = coarse_cfo_stf(
                        samples.subspan(static_cast<std::size_t>(s),
                                        static_cast<std::size_t>(lstf)),
                        cfg.eta(), cfg.sample_rate);
                    events.push_back({pos, ReceiverPath::kLegacy, s, coarse});
                    pos = s + preamble;
                    continue;
                }
            }
        }
        // Stage 2: shift classifier on one long-field window. An all-zero window (dead
        // air in a noiseless stream) cannot be normalized and cannot hold a packet.
        const auto cnn_window = samples.subspan(static_cast<std::size_t>(pos),
                                                static_cast<std::size_t>(window));
        const int khat = rms(cnn_window) > 0.0
                             ? predict_class(pd_plan, pd_params, cnn_window, pd_ws)
                             : max_shift + 1;
        if (khat <= max_shift) {
            const std::int64_t s = pos + khat;
            if (s + window <= n) {
                const double coarse = predict_cfo(
                    cfo_plan, cfo_params,
                    samples.subspan(static_cast<std::size_t>(s),
                                    static_cast<std::size_t>(window)),
                    delta_f, cfo_ws);
                events.push_back({pos, ReceiverPath::kPronto, s, coarse});
                pos = s + window;
                continue;
            }
        }
        // Stage 3: nothing fired; slide on.
        pos += hop;
    }
    return events;
}

}  // namespace pronto

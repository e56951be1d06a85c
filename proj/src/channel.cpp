#include "pronto/channel.hpp"

#include <cmath>
#include <numbers>

#include "pronto/error.hpp"

namespace pronto {

IqBuffer apply_cfo(const IqBuffer& x, double f_hz, std::int64_t t0) {
    if (!(x.sample_rate > 0.0)) throw ConfigError("apply_cfo: sample_rate must be positive");
    IqBuffer out;
    out.sample_rate = x.sample_rate;
    out.samples.resize(x.samples.size());
    const double w = 2.0 * std::numbers::pi * f_hz / x.sample_rate;
    for (std::size_t i = 0; i < x.samples.size(); ++i) {
        const double ph = w * static_cast<double>(t0 + static_cast<std::int64_t>(i));
        out.samples[i] = x.samples[i] * cdouble(std::cos(ph), std::sin(ph));
    }
    return out;
}

double add_awgn(IqBuffer& x, double snr_db, Rng& rng) {
    if (x.samples.empty()) throw DegenerateInput("add_awgn: empty buffer");
    if (std::isinf(snr_db) && snr_db > 0.0) return 0.0;
    double p = 0.0;
    for (const auto& s : x.samples) p += std::norm(s);
    p /= static_cast<double>(x.samples.size());
    if (p <= 0.0) throw DegenerateInput("add_awgn: zero-power buffer");
    const double pn = p / std::pow(10.0, snr_db / 10.0);
    for (auto& s : x.samples) s += rng.cgaussian(0.0, pn);
    return pn;
}

Capture make_capture(const WaveformConfig& cfg, const ChannelProfile& profile) {
    cfg.validate();
    if (profile.lead_len < 0 || profile.trail_len < 0 || profile.lead_data_len < 0) {
        throw ConfigError("make_capture: segment lengths must be non-negative");
    }

    const IqBuffer preamble = profile.format == PacketFormat::kStandard
                                  ? generate_standard_preamble(cfg)
                                  : generate_pronto_preamble(cfg);
    const IqBuffer rotated = apply_cfo(preamble, profile.cfo_hz, 0);

    Capture cap;
    cap.truth_start = profile.lead_len;
    cap.truth_cfo = profile.cfo_hz;
    cap.p_signal = 1.0;
    const bool noiseless = std::isinf(profile.snr_db) && profile.snr_db > 0.0;
    cap.p_noise = noiseless ? 0.0 : std::pow(10.0, -profile.snr_db / 10.0);

    const std::size_t n =
        static_cast<std::size_t>(profile.lead_len) + rotated.size() + profile.trail_len;
    cap.buf.sample_rate = cfg.sample_rate;
    cap.buf.samples.assign(n, cdouble(0.0, 0.0));

    Rng rng(profile.seed);
    if (cap.p_noise > 0.0) {
        for (auto& s : cap.buf.samples) s = rng.cgaussian(0.0, cap.p_noise);
    }
    for (std::size_t i = 0; i < rotated.size(); ++i) {
        cap.buf.samples[profile.lead_len + i] += rotated.samples[i];
    }
    const int d = std::min(profile.lead_data_len, profile.lead_len);
    for (int i = profile.lead_len - d; i < profile.lead_len; ++i) {
        cap.buf.samples[i] += rng.cgaussian(0.0, cap.p_signal);
    }
    return cap;
}

}  // namespace pronto

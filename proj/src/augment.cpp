#include "pronto/augment.hpp"

#include <cmath>
#include <numbers>

#include "pronto/error.hpp"

namespace pronto {
namespace {

cdouble mean_of(std::span<const cdouble> x) {
    cdouble acc = 0.0;
    for (const auto& s : x) acc += s;
    return acc / static_cast<double>(x.size());
}

std::vector<float> to_iq(const std::vector<cdouble>& x) {
    std::vector<float> out(2 * x.size());
    for (std::size_t t = 0; t < x.size(); ++t) {
        out[2 * t] = static_cast<float>(x[t].real());
        out[2 * t + 1] = static_cast<float>(x[t].imag());
    }
    return out;
}

void check_record(const LltfRecord& rec, const WaveformConfig& cfg) {
    if (rec.x.size() != static_cast<std::size_t>(cfg.lltf_len())) {
        throw ConfigError("record window length does not match the configured long field");
    }
    if (rec.p_noise < 0.0 || rec.p_signal < 0.0) {
        throw ConfigError("record powers must be non-negative");
    }
}

}  // namespace

double rms(std::span<const cdouble> x) {
    if (x.empty()) throw DegenerateInput("rms of empty buffer");
    double acc = 0.0;
    for (const auto& s : x) acc += std::norm(s);
    return std::sqrt(acc / static_cast<double>(x.size()));
}

std::vector<cdouble> rms_normalize(std::span<const cdouble> x) {
    const double r = rms(x);
    if (r == 0.0) throw DegenerateInput("rms_normalize: all-zero buffer");
    std::vector<cdouble> out(x.begin(), x.end());
    const double g = 1.0 / r;
    for (auto& s : out) s *= g;
    return out;
}

std::vector<cdouble> compensate_cfo(std::span<const cdouble> x, double f_hz, int l, double fs) {
    if (!(fs > 0.0)) throw ConfigError("compensate_cfo: fs must be positive");
    std::vector<cdouble> out(x.size());
    const double w = -2.0 * std::numbers::pi * f_hz / fs;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double ph = w * static_cast<double>(l + static_cast<std::int64_t>(i));
        out[i] = x[i] * cdouble(std::cos(ph), std::sin(ph));
    }
    return out;
}

std::vector<cdouble> pd_window(const LltfRecord& rec, const WaveformConfig& cfg, int klass,
                               Rng& rng) {
    check_record(rec, cfg);
    const int len = cfg.lltf_len();
    if (klass < 0 || klass >= len) throw ConfigError("pd_window: shift outside [0, L)");

    const cdouble mu = mean_of(rec.x);
    std::vector<cdouble> win(len);
    for (int i = klass; i < len; ++i) win[i] = rec.x[i - klass];
    const int d = static_cast<int>(rng.uniform_int(0, klass));
    for (int i = klass - d; i < klass; ++i) win[i] = rng.cgaussian(mu, rec.p_signal);
    for (int i = 0; i < klass - d; ++i) win[i] = rng.cgaussian(mu, rec.p_noise);
    return win;
}

PdExample augment_pd(const LltfRecord& rec, const WaveformConfig& cfg, Rng& rng) {
    check_record(rec, cfg);
    const int len = cfg.lltf_len();
    const int n = cfg.fft_len;
    const int k_max = len - n;  // deepest shift that still shows one full symbol

    const int drawn = static_cast<int>(rng.uniform_int(0, k_max + 1));
    std::vector<cdouble> win;
    if (drawn <= k_max) {
        win = pd_window(rec, cfg, drawn, rng);
    } else {
        const cdouble mu = mean_of(rec.x);
        win.assign(len, cdouble(0.0, 0.0));
        switch (rng.uniform_int(0, 3)) {
            case 0:  // nothing on the air
                for (auto& s : win) s = rng.cgaussian(mu, rec.p_noise);
                break;
            case 1: {  // data from some other transmission, no field at all
                const int d = static_cast<int>(rng.uniform_int(1, len));
                for (int i = 0; i < len - d; ++i) win[i] = rng.cgaussian(mu, rec.p_noise);
                for (int i = len - d; i < len; ++i) win[i] = rng.cgaussian(mu, rec.p_signal);
                break;
            }
            case 2:  // field enters too late: under one symbol visible
                win = pd_window(rec, cfg, static_cast<int>(rng.uniform_int(k_max + 1, len - 1)),
                                rng);
                break;
            default: {  // packet mostly gone: its tail, then payload-like data, then noise
                const int m = static_cast<int>(rng.uniform_int(1, n - 1));
                const int d = static_cast<int>(rng.uniform_int(0, len - m));
                for (int i = 0; i < m; ++i) win[i] = rec.x[len - m + i];
                for (int i = m; i < m + d; ++i) win[i] = rng.cgaussian(mu, rec.p_signal);
                for (int i = m + d; i < len; ++i) win[i] = rng.cgaussian(mu, rec.p_noise);
                break;
            }
        }
    }

    PdExample ex;
    ex.label = drawn <= k_max ? drawn : k_max + 1;
    ex.iq = to_iq(rms_normalize(win));
    return ex;
}

CfoExample augment_cfo(const LltfRecord& rec, const WaveformConfig& cfg, double delta_f,
                       Rng& rng) {
    check_record(rec, cfg);
    if (!(delta_f > 0.0)) throw ConfigError("augment_cfo: delta_f must be positive");

    std::vector<cdouble> win = rms_normalize(rec.x);
    win = compensate_cfo(win, rec.f, rec.l, cfg.sample_rate);

    const double half = delta_f / 2.0;
    const double f_off = rng.uniform(-half, half);
    const double w = 2.0 * std::numbers::pi * f_off / cfg.sample_rate;
    for (std::size_t i = 0; i < win.size(); ++i) {
        const double ph = w * static_cast<double>(i);
        win[i] *= cdouble(std::cos(ph), std::sin(ph));
    }

    CfoExample ex;
    ex.label = static_cast<float>(f_off / half);
    ex.iq = to_iq(win);
    return ex;
}

double label_to_hz(double y, double delta_f) {
    if (std::abs(y) > 1.0) throw ConfigError("label_to_hz: normalized value outside [-1, 1]");
    return y * delta_f / 2.0;
}

}  // namespace pronto

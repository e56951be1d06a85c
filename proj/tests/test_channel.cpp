#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "pronto/channel.hpp"
#include "pronto/error.hpp"
#include "pronto/waveform.hpp"

using namespace pronto;

namespace {
IqBuffer constant_buffer(std::size_t n, cdouble v, double fs = 5e6) {
    IqBuffer b;
    b.samples.assign(n, v);
    b.sample_rate = fs;
    return b;
}
}  // namespace

TEST_CASE("frequency offset rotates at the requested rate") {
    const auto out = apply_cfo(constant_buffer(128, cdouble(1, 0)), 39062.5, 0);
    // 64 samples at half the subcarrier spacing is exactly half a turn.
    CHECK(out.samples[64].real() == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(std::abs(out.samples[64].imag()) < 1e-9);
    for (const auto& v : out.samples) CHECK(std::abs(v) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("frequency offset honors the start-time anchor") {
    const double f = 12345.0;
    const auto out = apply_cfo(constant_buffer(1, cdouble(1, 0)), f, 5);
    const double ph = 2.0 * M_PI * f * 5.0 / 5e6;
    CHECK(out.samples[0].real() == doctest::Approx(std::cos(ph)).epsilon(1e-12));
    CHECK(out.samples[0].imag() == doctest::Approx(std::sin(ph)).epsilon(1e-12));
}

TEST_CASE("offset and its negation cancel") {
    WaveformConfig cfg;
    const auto x = generate_standard_preamble(cfg);
    const auto y = apply_cfo(apply_cfo(x, 80000.0, 17), -80000.0, 17);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        worst = std::max(worst, std::abs(y.samples[i] - x.samples[i]));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("additive noise hits the requested level") {
    auto x = constant_buffer(1'000'000, cdouble(1, 0));
    Rng rng(42);
    const double pn = add_awgn(x, 20.0, rng);
    CHECK(pn == doctest::Approx(0.01).epsilon(1e-12));
    double measured = 0.0;
    for (const auto& v : x.samples) measured += std::norm(v - cdouble(1, 0));
    measured /= static_cast<double>(x.size());
    // Empirical noise power within 0.1 dB of the configured one.
    CHECK(10.0 * std::log10(measured / pn) == doctest::Approx(0.0).epsilon(0.1));
}

TEST_CASE("additive noise edge cases") {
    Rng rng(7);
    IqBuffer empty;
    empty.sample_rate = 5e6;
    CHECK_THROWS_AS(add_awgn(empty, 10.0, rng), DegenerateInput);

    auto x = constant_buffer(64, cdouble(0.5, -0.25));
    const auto before = x.samples;
    const double pn = add_awgn(x, std::numeric_limits<double>::infinity(), rng);
    CHECK(pn == 0.0);
    CHECK(x.samples == before);
}

TEST_CASE("noise is reproducible under a fixed seed") {
    auto a = constant_buffer(256, cdouble(1, 0));
    auto b = a;
    Rng r1(99), r2(99);
    add_awgn(a, 5.0, r1);
    add_awgn(b, 5.0, r2);
    CHECK(a.samples == b.samples);
}

TEST_CASE("capture places the preamble after the configured lead") {
    WaveformConfig cfg;
    ChannelProfile prof;
    prof.lead_len = 37;
    prof.trail_len = 20;
    prof.cfo_hz = 123456.0;
    prof.seed = 3;
    const Capture cap = make_capture(cfg, prof);
    REQUIRE(cap.buf.samples.size() == 37u + 320u + 20u);
    CHECK(cap.truth_start == 37);
    CHECK(cap.truth_cfo == doctest::Approx(123456.0));
    CHECK(cap.p_noise == 0.0);
    for (int i = 0; i < 37; ++i) CHECK(std::abs(cap.buf.samples[i]) == 0.0);
    for (int i = 0; i < 20; ++i) CHECK(std::abs(cap.buf.samples[357 + i]) == 0.0);

    const auto expect = apply_cfo(generate_standard_preamble(cfg), prof.cfo_hz, 0);
    for (int i = 0; i < 320; ++i) {
        CHECK(std::abs(cap.buf.samples[37 + i] - expect.samples[i]) < 1e-15);
    }
}

TEST_CASE("capture can prepend payload-like samples before the preamble") {
    WaveformConfig cfg;
    ChannelProfile prof;
    prof.lead_len = 30;
    prof.lead_data_len = 10;
    prof.seed = 11;
    const Capture cap = make_capture(cfg, prof);
    for (int i = 0; i < 20; ++i) CHECK(std::abs(cap.buf.samples[i]) == 0.0);
    int nonzero = 0;
    for (int i = 20; i < 30; ++i) nonzero += std::abs(cap.buf.samples[i]) > 0.0;
    CHECK(nonzero == 10);
}

TEST_CASE("capture noise power matches the configured ratio") {
    WaveformConfig cfg;
    ChannelProfile prof;
    prof.lead_len = 16;
    prof.trail_len = 16;
    prof.snr_db = 10.0;
    prof.seed = 21;
    const Capture cap = make_capture(cfg, prof);
    CHECK(cap.p_signal == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cap.p_noise == doctest::Approx(0.1).epsilon(1e-9));
    // Lead region is pure noise; only 16 samples, so check order of magnitude.
    double lead_p = 0.0;
    for (int i = 0; i < 16; ++i) lead_p += std::norm(cap.buf.samples[i]);
    CHECK(lead_p / 16.0 == doctest::Approx(0.1).epsilon(0.9));
}

TEST_CASE("short-field-free capture carries just the long field") {
    WaveformConfig cfg;
    ChannelProfile prof;
    prof.format = PacketFormat::kPronto;
    prof.lead_len = 5;
    prof.seed = 2;
    const Capture cap = make_capture(cfg, prof);
    REQUIRE(cap.buf.samples.size() == 5u + 160u);
    const auto lltf = generate_lltf(cfg).samples;
    for (int i = 0; i < 160; ++i) CHECK(std::abs(cap.buf.samples[5 + i] - lltf[i]) < 1e-15);
}

TEST_CASE("identical profiles give bit-identical captures") {
    WaveformConfig cfg;
    ChannelProfile prof;
    prof.lead_len = 40;
    prof.snr_db = 3.0;
    prof.cfo_hz = -50000.0;
    prof.seed = 1234;
    const Capture a = make_capture(cfg, prof);
    const Capture b = make_capture(cfg, prof);
    CHECK(a.buf.samples == b.buf.samples);
}

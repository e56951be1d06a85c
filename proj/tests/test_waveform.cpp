#include "doctest.h"

#include <cmath>

#include "pronto/error.hpp"
#include "pronto/waveform.hpp"

using namespace pronto;

namespace {
double mean_power(const IqBuffer& x) {
    double p = 0.0;
    for (const auto& v : x.samples) p += std::norm(v);
    return p / static_cast<double>(x.size());
}
}  // namespace

TEST_CASE("config geometry at the default rate") {
    WaveformConfig cfg;
    CHECK(cfg.eta() == 16);
    CHECK(cfg.lstf_len() == 160);
    CHECK(cfg.lltf_len() == 160);
    CHECK(cfg.preamble_len() == 320);
    CHECK(cfg.subcarrier_spacing() == doctest::Approx(78125.0));
    CHECK(cfg.num_classes() == 98);
}

TEST_CASE("config validation rejects unusable transform sizes") {
    WaveformConfig cfg;
    cfg.fft_len = 48;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.fft_len = 8;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.fft_len = 64;
    cfg.sample_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("short training field tiles one quarter-symbol period exactly") {
    WaveformConfig cfg;
    const auto lstf = generate_lstf(cfg).samples;
    REQUIRE(lstf.size() == 160);
    for (std::size_t i = 0; i + 16 < lstf.size(); ++i) {
        CHECK(lstf[i].real() == lstf[i + 16].real());
        CHECK(lstf[i].imag() == lstf[i + 16].imag());
    }
}

TEST_CASE("long training field repeats its symbol and prefixes its tail") {
    WaveformConfig cfg;
    const auto lltf = generate_lltf(cfg).samples;
    REQUIRE(lltf.size() == 160);
    for (int i = 32; i < 96; ++i) {
        CHECK(lltf[i].real() == lltf[i + 64].real());
        CHECK(lltf[i].imag() == lltf[i + 64].imag());
    }
    for (int i = 0; i < 32; ++i) {
        CHECK(lltf[i].real() == lltf[i + 128].real());
        CHECK(lltf[i].imag() == lltf[i + 128].imag());
    }
}

TEST_CASE("both fields carry unit average power") {
    WaveformConfig cfg;
    CHECK(mean_power(generate_lstf(cfg)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean_power(generate_lltf(cfg)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("field samples match an independent transform") {
    WaveformConfig cfg;
    const auto lstf = generate_lstf(cfg).samples;
    const auto lltf = generate_lltf(cfg).samples;
    const double tol = 1e-12;
    CHECK(lstf[0].real() == doctest::Approx(0.40824829046386302).epsilon(tol));
    CHECK(lstf[0].imag() == doctest::Approx(0.40824829046386302).epsilon(tol));
    CHECK(lstf[5].real() == doctest::Approx(1.266982223035694).epsilon(tol));
    CHECK(lstf[5].imag() == doctest::Approx(-0.11228168465644249).epsilon(tol));
    CHECK(lstf[23].real() == doctest::Approx(-1.1754648916223063).epsilon(tol));
    CHECK(lstf[23].imag() == doctest::Approx(0.020764353243054385).epsilon(tol));
    CHECK(lltf[0].real() == doctest::Approx(-1.386750490563073).epsilon(tol));
    CHECK(std::abs(lltf[0].imag()) < 1e-13);
    CHECK(lltf[32].real() == doctest::Approx(1.386750490563073).epsilon(tol));
    CHECK(lltf[100].real() == doctest::Approx(0.18737125048696027).epsilon(tol));
    CHECK(lltf[100].imag() == doctest::Approx(0.24749319433501804).epsilon(tol));
}

TEST_CASE("preamble layouts by packet flavor") {
    WaveformConfig cfg;
    const auto lstf = generate_lstf(cfg).samples;
    const auto lltf = generate_lltf(cfg).samples;
    const auto full = generate_standard_preamble(cfg).samples;
    const auto slim = generate_pronto_preamble(cfg).samples;
    REQUIRE(full.size() == 320);
    for (int i = 0; i < 160; ++i) {
        CHECK(full[i] == lstf[i]);
        CHECK(full[i + 160] == lltf[i]);
    }
    CHECK(slim == lltf);
}

TEST_CASE("buffers carry the configured sample rate") {
    WaveformConfig cfg;
    cfg.sample_rate = 20e6;
    CHECK(generate_lstf(cfg).sample_rate == 20e6);
    CHECK(generate_standard_preamble(cfg).sample_rate == 20e6);
}

TEST_CASE("wider transform scales every length with the same structure") {
    WaveformConfig cfg;
    cfg.fft_len = 128;
    cfg.sample_rate = 10e6;
    CHECK(cfg.eta() == 32);
    CHECK(cfg.lstf_len() == 320);
    CHECK(cfg.lltf_len() == 320);
    CHECK(cfg.num_classes() == 194);
    const auto lstf = generate_lstf(cfg).samples;
    REQUIRE(lstf.size() == 320);
    for (std::size_t i = 0; i + 32 < lstf.size(); ++i) {
        CHECK(lstf[i].real() == lstf[i + 32].real());
        CHECK(lstf[i].imag() == lstf[i + 32].imag());
    }
    CHECK(lstf[0].real() == doctest::Approx(0.40824829046386307).epsilon(1e-12));
    CHECK(mean_power(generate_lltf(cfg)) == doctest::Approx(1.0).epsilon(1e-12));
}

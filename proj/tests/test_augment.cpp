#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "pronto/augment.hpp"
#include "pronto/channel.hpp"
#include "pronto/error.hpp"
#include "pronto/waveform.hpp"

using namespace pronto;

namespace {

LltfRecord clean_record(double cfo = 0.0) {
    WaveformConfig cfg;
    LltfRecord rec;
    rec.x = apply_cfo(generate_lltf(cfg), cfo, 160).samples;
    rec.f = cfo;
    rec.p_signal = 1.0;
    rec.p_noise = 1e-3;
    rec.l = 160;
    return rec;
}

double win_rms(const std::vector<float>& iq) {
    double acc = 0.0;
    for (float v : iq) acc += static_cast<double>(v) * v;
    return std::sqrt(acc / (static_cast<double>(iq.size()) / 2.0));
}

}  // namespace

TEST_CASE("rms and normalization") {
    std::vector<cdouble> x = {{3, 4}, {0, 0}};  // |.|^2 = 25, 0 -> mean 12.5
    CHECK(rms(x) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-12));
    auto y = rms_normalize(x);
    CHECK(rms(y) == doctest::Approx(1.0).epsilon(1e-12));
    auto z = rms_normalize(y);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(z[i] - y[i]) < 1e-15);

    std::vector<cdouble> zeros(8, cdouble(0, 0));
    CHECK_THROWS_AS(rms_normalize(zeros), DegenerateInput);
    std::vector<cdouble> empty;
    CHECK_THROWS_AS(rms(empty), DegenerateInput);
}

TEST_CASE("compensation inverts the channel rotation from the packet anchor") {
    WaveformConfig cfg;
    const auto clean = generate_lltf(cfg).samples;
    const double f = 67000.0;
    const auto shifted = apply_cfo(IqBuffer{clean, cfg.sample_rate}, f, 160).samples;
    const auto back = compensate_cfo(shifted, f, 160, cfg.sample_rate);
    double worst = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        worst = std::max(worst, std::abs(back[i] - clean[i]));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("class zero leaves the record untouched before normalization") {
    WaveformConfig cfg;
    const auto rec = clean_record(40000.0);
    Rng rng(1);
    const auto win = pd_window(rec, cfg, 0, rng);
    REQUIRE(win.size() == rec.x.size());
    for (std::size_t i = 0; i < win.size(); ++i) CHECK(win[i] == rec.x[i]);
}

TEST_CASE("shift class places the field start at the class index") {
    WaveformConfig cfg;
    const auto rec = clean_record();
    Rng rng(9);
    const int k = 40;
    const auto win = pd_window(rec, cfg, k, rng);
    for (int i = 0; i < 160 - k; ++i) CHECK(win[k + i] == rec.x[i]);
    // Everything before the field start was filled in (data first, then noise).
    int touched = 0;
    for (int i = 0; i < k; ++i) touched += win[i] != cdouble(0, 0);
    CHECK(touched == k);
}

TEST_CASE("window construction validates its inputs") {
    WaveformConfig cfg;
    auto rec = clean_record();
    Rng rng(1);
    CHECK_THROWS_AS(pd_window(rec, cfg, -1, rng), ConfigError);
    CHECK_THROWS_AS(pd_window(rec, cfg, 160, rng), ConfigError);
    rec.x.pop_back();
    CHECK_THROWS_AS(pd_window(rec, cfg, 0, rng), ConfigError);
}

TEST_CASE("detector examples are unit-power and carry the drawn class") {
    WaveformConfig cfg;
    const auto rec = clean_record(12000.0);
    Rng rng(123);
    for (int trial = 0; trial < 50; ++trial) {
        const auto ex = augment_pd(rec, cfg, rng);
        REQUIRE(ex.iq.size() == 320u);
        CHECK(ex.label >= 0);
        CHECK(ex.label <= 97);
        CHECK(win_rms(ex.iq) == doctest::Approx(1.0).epsilon(1e-5));
        if (ex.label <= 96) {
            // Window content from the label onward is a positive real rescale of the record.
            const int k = ex.label;
            const cdouble w0(ex.iq[2 * k], ex.iq[2 * k + 1]);
            const double s = std::abs(w0) / std::abs(rec.x[0]);
            for (int i = 0; i < 160 - k; i += 13) {
                const cdouble w(ex.iq[2 * (k + i)], ex.iq[2 * (k + i) + 1]);
                CHECK(std::abs(w - rec.x[i] * s) < 1e-5);
            }
        }
    }
}

TEST_CASE("class draw is uniform over all classes") {
    WaveformConfig cfg;
    const auto rec = clean_record();
    Rng rng(2024);
    const int n = 100000;
    std::vector<int> hist(98, 0);
    for (int i = 0; i < n; ++i) ++hist[augment_pd(rec, cfg, rng).label];
    const double expect = static_cast<double>(n) / 98.0;
    double chi2 = 0.0;
    for (int c : hist) {
        const double d = c - expect;
        chi2 += d * d / expect;
    }
    // 97 degrees of freedom: mean 97, sd ~13.9. 160 is ~4.5 sd.
    CHECK(chi2 < 160.0);
    CHECK(chi2 > 40.0);
}

TEST_CASE("input scaling by a power of two does not change the example") {
    WaveformConfig cfg;
    auto rec = clean_record(5000.0);
    auto scaled = rec;
    for (auto& v : scaled.x) v *= 4.0;
    scaled.p_signal *= 16.0;
    scaled.p_noise *= 16.0;
    Rng r1(55), r2(55);
    const auto a = augment_pd(rec, cfg, r1);
    const auto b = augment_pd(scaled, cfg, r2);
    CHECK(a.label == b.label);
    CHECK(a.iq == b.iq);
}

TEST_CASE("regressor examples strip the labeled offset and add a known one") {
    WaveformConfig cfg;
    const double delta_f = cfg.subcarrier_spacing();
    const auto rec = clean_record(71000.0);
    const auto base = rms_normalize(generate_lltf(cfg).samples);
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ex = augment_cfo(rec, cfg, delta_f, rng);
        REQUIRE(ex.iq.size() == 320u);
        CHECK(std::abs(ex.label) <= 1.0f);
        CHECK(win_rms(ex.iq) == doctest::Approx(1.0).epsilon(1e-5));
        // Undo the fresh rotation (anchored at the window start): the clean field returns.
        const double f_off = static_cast<double>(ex.label) * delta_f / 2.0;
        std::vector<cdouble> w(160);
        for (int i = 0; i < 160; ++i) w[i] = cdouble(ex.iq[2 * i], ex.iq[2 * i + 1]);
        const auto undone = compensate_cfo(w, f_off, 0, cfg.sample_rate);
        double worst = 0.0;
        for (int i = 0; i < 160; ++i) worst = std::max(worst, std::abs(undone[i] - base[i]));
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("zero predictor pays a quarter of the range in absolute error") {
    WaveformConfig cfg;
    const double delta_f = cfg.subcarrier_spacing();
    const auto rec = clean_record();
    Rng rng(808);
    double mae = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) mae += std::abs(augment_cfo(rec, cfg, delta_f, rng).label);
    mae /= n;
    CHECK(mae == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("label mapping back to Hz") {
    const double delta_f = 78125.0;
    CHECK(label_to_hz(1.0, delta_f) == doctest::Approx(39062.5));
    CHECK(label_to_hz(-1.0, delta_f) == doctest::Approx(-39062.5));
    CHECK(label_to_hz(0.0, delta_f) == 0.0);
    CHECK(label_to_hz(0.4, delta_f) == doctest::Approx(15625.0));
    CHECK_THROWS_AS(label_to_hz(1.5, delta_f), ConfigError);
}

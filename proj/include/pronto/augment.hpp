#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "pronto/iq.hpp"
#include "pronto/rng.hpp"
#include "pronto/waveform.hpp"

namespace pronto {

// One extracted long-training-field window plus the labels the classical receiver chain
// produced for it. The truth fields are synthetic-side bookkeeping; they are not part of
// the serialized dataset record.
struct LltfRecord {
    std::vector<cdouble> x;   // 2.5 N samples starting at packet-time l
    double f = 0.0;           // labeled coarse CFO in Hz (classical estimate)
    double p_noise = 0.0;     // P_N
    double p_signal = 0.0;    // P_X = mean |x|^2
    int l = 160;              // packet-time index of x[0] (start of the long field)

    double snr_db = std::numeric_limits<double>::infinity();
    double truth_cfo = std::numeric_limits<double>::quiet_NaN();
    int truth_start = -1;
};

// Detector training example: (L, 2) real matrix stored row-major [t*2 + {I,Q}], RMS 1.
struct PdExample {
    std::vector<float> iq;
    int label = 0;  // shift class, K+1 = non-detectable
};

// Regressor training example: same layout; label = f_off / (delta_f / 2), in [-1, 1].
struct CfoExample {
    std::vector<float> iq;
    float label = 0.0f;
};

double rms(std::span<const cdouble> x);

// Scales to unit RMS; all-zero or empty input is a degenerate-input error. Idempotent.
std::vector<cdouble> rms_normalize(std::span<const cdouble> x);

// y[i] = x[i] * exp(-j 2 pi f (l + i) / fs): removes a CFO whose phase ramp is anchored at
// the packet start, for a window beginning at packet-time l.
std::vector<cdouble> compensate_cfo(std::span<const cdouble> x, double f_hz, int l, double fs);

// Window layout for one detector class, before normalization. For klass <= K the first
// L-klass samples of rec.x land at [klass, L); a data-like chunk (random length <= klass,
// gaussian around the record mean at power P_X) sits immediately before; anything earlier
// is noise at P_N. klass in (K, L) places fewer than one symbol of the field (class K+1
// material); the class-K+1 label itself is drawn inside augment_pd.
std::vector<cdouble> pd_window(const LltfRecord& rec, const WaveformConfig& cfg, int klass,
                               Rng& rng);

// Draws a class uniformly over {0 .. K+1} and builds the corresponding window, then
// RMS-normalizes. Class K+1 picks uniformly among: pure noise, noise plus a data chunk,
// a late fragment (shift in (K, L)), or the tail of the field at the window start.
PdExample augment_pd(const LltfRecord& rec, const WaveformConfig& cfg, Rng& rng);

// RMS-normalize, compensate the record's labeled CFO (phase anchored at packet-time l),
// then rotate by a fresh f_off uniform in +/- delta_f/2 with the ramp anchored at the
// window start. Label is f_off normalized by delta_f/2.
CfoExample augment_cfo(const LltfRecord& rec, const WaveformConfig& cfg, double delta_f,
                       Rng& rng);

// Maps a normalized regressor output back to Hz; |y| > 1 is out of range.
double label_to_hz(double y, double delta_f);

}  // namespace pronto

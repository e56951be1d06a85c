#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pronto/augment.hpp"
#include "pronto/waveform.hpp"

namespace pronto {

// How record-inherent oscillator offsets are drawn, and how records are split.
//
// kRange draws f uniform in [lo_hz, hi_hz] and splits each SNR bucket contiguously by the
// manifest fractions. kSignSplit draws f uniform in +-abs_max and routes records by the
// *labeled* CFO sign: negative labels feed train/val (every 8th to val), non-negative
// labels are held out as the test set — the generalization stressor where test-time
// offsets live on the side of the axis training never saw. Under kSignSplit the manifest
// fractions are ignored; the proportions are data-driven.
struct CfoPolicy {
    enum class Kind { kRange, kSignSplit };
    Kind kind = Kind::kRange;
    double lo_hz = -39062.5;
    double hi_hz = 39062.5;

    static CfoPolicy range(double lo_hz, double hi_hz) {
        return {Kind::kRange, lo_hz, hi_hz};
    }
    static CfoPolicy sign_split(double abs_max_hz) {
        return {Kind::kSignSplit, -abs_max_hz, abs_max_hz};
    }

    bool operator==(const CfoPolicy&) const = default;
};

struct DatasetManifest {
    WaveformConfig cfg;
    std::vector<double> snr_grid_db;  // one bucket per entry, in this order
    int records_per_snr = 0;
    double train_frac = 0.7;
    double val_frac = 0.1;
    double test_frac = 0.2;
    std::uint64_t seed = 1;
    CfoPolicy cfo_policy;

    int total_records() const {
        return records_per_snr * static_cast<int>(snr_grid_db.size());
    }

    void validate() const;  // throws ConfigError

    bool operator==(const DatasetManifest&) const = default;
};

// Records are grouped by SNR in grid order (records_per_snr per bucket), so a record's
// bucket is recoverable from its index alone. Split index lists are recomputed from the
// manifest + labels (assign_splits), never serialized.
struct Dataset {
    DatasetManifest manifest;
    std::vector<LltfRecord> records;
    std::vector<int> train_idx;
    std::vector<int> val_idx;
    std::vector<int> test_idx;

    double snr_of(int record_index) const {
        return manifest.snr_grid_db[record_index / manifest.records_per_snr];
    }
};

void assign_splits(Dataset& ds);

// Mirrors a live extraction pipeline, with ground truth kept on the side: synthesize a
// standard capture (random lead, inherent CFO per policy), run the classical detector at
// beta = 0.8, and from the *detected* start take the short field for the coarse-CFO label
// and the following 2.5 N samples as the record window; the noise-power label comes from
// the symbol-difference estimator after compensating the labeled CFO. Noisy captures the
// detector misses are redrawn (bounded retries, fresh derived seed per attempt) — like
// the source receiver, the dataset only ever contains what was detected. A miss on a
// noiseless capture throws InternalError; exhausting retries throws NumericError.
//
// Deterministic in the manifest alone: every record derives its RNG streams from
// (manifest.seed, record index, attempt), so the result is independent of worker count.
Dataset build_lltf_dataset(const DatasetManifest& manifest, int workers = 0);

std::string manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const std::string& text);  // throws FormatError

// File layout: one JSON header line {"format":"PRNT-DS","version":1,"manifest":{...}}
// terminated by '\n', then per record a little-endian block
//   [f: f64 Hz][P_N: f64][P_X: f64][l: u32][2 * lltf_len * f32 interleaved I/Q].
// Truth fields are not serialized; loaded records carry NaN truth CFO and -1 truth start,
// with snr_db restored from the record's bucket.
inline constexpr char kDatasetFormat[] = "PRNT-DS";
inline constexpr std::uint32_t kDatasetVersion = 1;

void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);  // throws FormatError

}  // namespace pronto

#include "pronto/pipeline/dataset.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <utility>

#include <json.hpp>

#include "pronto/channel.hpp"
#include "pronto/classic_sync.hpp"
#include "pronto/error.hpp"
#include "pronto/io.hpp"
#include "pronto/parallel.hpp"
#include "pronto/rng.hpp"

namespace pronto {
namespace {

using nlohmann::json;

// A capture the detector misses is redrawn with a fresh stream; at the lowest SNR in use
// (5 dB, ~90% miss rate) 256 attempts leave a per-record failure probability ~1e-12.
constexpr int kMaxAttempts = 256;

// Stream derivation: attempts for one record stay distinct from every other record's as
// long as kMaxAttempts < kStreamStride.
constexpr std::uint64_t kStreamStride = 1024;

LltfRecord build_record(const DatasetManifest& m, int index) {
    const WaveformConfig& cfg = m.cfg;
    const double snr_db = m.snr_grid_db[static_cast<std::size_t>(index / m.records_per_snr)];
    const bool noiseless = std::isinf(snr_db) && snr_db > 0;
    const Rng master(m.seed);
    DetectConfig det_cfg;
    det_cfg.eta = cfg.eta();

    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Rng rng = master.derive(static_cast<std::uint64_t>(index) * kStreamStride +
                                static_cast<std::uint64_t>(attempt));
        ChannelProfile profile;
        profile.snr_db = snr_db;
        profile.cfo_hz = rng.uniform(m.cfo_policy.lo_hz, m.cfo_policy.hi_hz);
        profile.lead_len = static_cast<int>(rng.uniform_int(16, 200));
        profile.trail_len = 64;
        profile.format = PacketFormat::kStandard;
        profile.seed = rng.next_u64();

        const Capture cap = make_capture(cfg, profile);
        const std::span<const cdouble> samples(cap.buf.samples);
        const DetectionResult det = detect_packet(samples, det_cfg);
        if (!det.start_index) {
            if (noiseless) {
                throw InternalError("classical detection missed a noiseless capture");
            }
            continue;
        }
        const int start = *det.start_index;
        if (start < 0 || start + cfg.preamble_len() > static_cast<int>(samples.size())) {
            continue;  // fired too close to the buffer edge to extract a full preamble
        }

        LltfRecord rec;
        rec.f = coarse_cfo_stf(samples.subspan(start, cfg.lstf_len()), cfg.eta(),
                               cfg.sample_rate);
        const auto window = samples.subspan(start + cfg.lstf_len(), cfg.lltf_len());
        rec.x.assign(window.begin(), window.end());
        rec.l = cfg.lstf_len();

        const std::vector<cdouble> comp =
            compensate_cfo(rec.x, rec.f, rec.l, cfg.sample_rate);
        rec.p_noise = noise_power_estimate(comp, cfg.fft_len);
        double px = 0.0;
        for (const cdouble& s : rec.x) px += std::norm(s);
        rec.p_signal = px / static_cast<double>(rec.x.size());

        rec.snr_db = snr_db;
        rec.truth_cfo = cap.truth_cfo;
        rec.truth_start = cap.truth_start;
        return rec;
    }
    throw NumericError("no detectable capture after " + std::to_string(kMaxAttempts) +
                       " attempts (record " + std::to_string(index) + ", " +
                       std::to_string(snr_db) + " dB)");
}

json snr_entry_to_json(double v) {
    if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
    return json(v);
}

double snr_entry_from_json(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw FormatError("bad SNR entry: " + s);
    }
    return j.get<double>();
}

json manifest_to_json_obj(const DatasetManifest& m) {
    json grid = json::array();
    for (double v : m.snr_grid_db) grid.push_back(snr_entry_to_json(v));
    return json{
        {"fft_len", m.cfg.fft_len},
        {"sample_rate", m.cfg.sample_rate},
        {"snr_grid_db", std::move(grid)},
        {"records_per_snr", m.records_per_snr},
        {"train_frac", m.train_frac},
        {"val_frac", m.val_frac},
        {"test_frac", m.test_frac},
        {"seed", m.seed},
        {"cfo_policy",
         json{{"kind", m.cfo_policy.kind == CfoPolicy::Kind::kRange ? "range" : "sign_split"},
              {"lo_hz", m.cfo_policy.lo_hz},
              {"hi_hz", m.cfo_policy.hi_hz}}},
    };
}

DatasetManifest manifest_from_json_obj(const json& j) {
    DatasetManifest m;
    m.cfg.fft_len = j.at("fft_len").get<int>();
    m.cfg.sample_rate = j.at("sample_rate").get<double>();
    for (const auto& v : j.at("snr_grid_db")) m.snr_grid_db.push_back(snr_entry_from_json(v));
    m.records_per_snr = j.at("records_per_snr").get<int>();
    m.train_frac = j.at("train_frac").get<double>();
    m.val_frac = j.at("val_frac").get<double>();
    m.test_frac = j.at("test_frac").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    const json& p = j.at("cfo_policy");
    const auto kind = p.at("kind").get<std::string>();
    if (kind == "range") {
        m.cfo_policy.kind = CfoPolicy::Kind::kRange;
    } else if (kind == "sign_split") {
        m.cfo_policy.kind = CfoPolicy::Kind::kSignSplit;
    } else {
        throw FormatError("unknown cfo_policy kind: " + kind);
    }
    m.cfo_policy.lo_hz = p.at("lo_hz").get<double>();
    m.cfo_policy.hi_hz = p.at("hi_hz").get<double>();
    return m;
}

std::size_t record_block_bytes(const WaveformConfig& cfg) {
    return 3 * 8 + 4 + static_cast<std::size_t>(cfg.lltf_len()) * 2 * 4;
}

}  // namespace

void DatasetManifest::validate() const {
    cfg.validate();
    if (snr_grid_db.empty()) throw ConfigError("snr grid is empty");
    if (records_per_snr <= 0) throw ConfigError("records_per_snr must be positive");
    if (train_frac < 0 || val_frac < 0 || test_frac < 0) {
        throw ConfigError("split fractions must be non-negative");
    }
    if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
        throw ConfigError("split fractions must sum to 1");
    }
    if (!(cfo_policy.lo_hz < cfo_policy.hi_hz)) {
        throw ConfigError("cfo policy needs lo < hi");
    }
    if (cfo_policy.kind == CfoPolicy::Kind::kSignSplit &&
        (cfo_policy.lo_hz >= 0 || cfo_policy.hi_hz <= 0)) {
        throw ConfigError("sign-split policy must straddle zero");
    }
}

void assign_splits(Dataset& ds) {
    const DatasetManifest& m = ds.manifest;
    ds.train_idx.clear();
    ds.val_idx.clear();
    ds.test_idx.clear();

    if (m.cfo_policy.kind == CfoPolicy::Kind::kSignSplit) {
        int negatives = 0;
        for (int i = 0; i < static_cast<int>(ds.records.size()); ++i) {
            if (ds.records[static_cast<std::size_t>(i)].f < 0) {
                // 7:1 train:val interleave over the negative-label side.
                if (negatives % 8 == 7) {
                    ds.val_idx.push_back(i);
                } else {
                    ds.train_idx.push_back(i);
                }
                ++negatives;
            } else {
                ds.test_idx.push_back(i);
            }
        }
        return;
    }

    const int per = m.records_per_snr;
    const int n_train = static_cast<int>(std::llround(per * m.train_frac));
    const int n_val =
        std::min(static_cast<int>(std::llround(per * m.val_frac)), per - n_train);
    for (std::size_t bucket = 0; bucket < m.snr_grid_db.size(); ++bucket) {
        const int base = static_cast<int>(bucket) * per;
        for (int i = 0; i < per; ++i) {
            const int idx = base + i;
            if (i < n_train) {
                ds.train_idx.push_back(idx);
            } else if (i < n_train + n_val) {
                ds.val_idx.push_back(idx);
            } else {
                ds.test_idx.push_back(idx);
            }
        }
    }
}

Dataset build_lltf_dataset(const DatasetManifest& manifest, int workers) {
    manifest.validate();
    Dataset ds;
    ds.manifest = manifest;
    ds.records.resize(static_cast<std::size_t>(manifest.total_records()));
    parallel_for(manifest.total_records(), workers, [&](int i) {
        ds.records[static_cast<std::size_t>(i)] = build_record(manifest, i);
    });
    assign_splits(ds);
    return ds;
}

std::string manifest_to_json(const DatasetManifest& m) { return manifest_to_json_obj(m).dump(); }

DatasetManifest manifest_from_json(const std::string& text) {
    try {
        return manifest_from_json_obj(json::parse(text));
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad dataset manifest: ") + e.what());
    }
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
    const DatasetManifest& m = ds.manifest;
    m.validate();
    if (static_cast<int>(ds.records.size()) != m.total_records()) {
        throw ShapeError("dataset record count disagrees with its manifest");
    }
    const json header{
        {"format", kDatasetFormat}, {"version", kDatasetVersion},
        {"manifest", manifest_to_json_obj(m)}};

    std::string out = header.dump();
    out += '\n';
    out.reserve(out.size() + ds.records.size() * record_block_bytes(m.cfg));
    const std::size_t window = static_cast<std::size_t>(m.cfg.lltf_len());
    for (const LltfRecord& rec : ds.records) {
        if (rec.x.size() != window) throw ShapeError("record window length mismatch");
        io::put_f64(out, rec.f);
        io::put_f64(out, rec.p_noise);
        io::put_f64(out, rec.p_signal);
        io::put_u32(out, static_cast<std::uint32_t>(rec.l));
        for (const cdouble& s : rec.x) {
            io::put_f32(out, static_cast<float>(s.real()));
            io::put_f32(out, static_cast<float>(s.imag()));
        }
    }
    io::write_atomic(path, out);
}

Dataset load_dataset(const std::filesystem::path& path) {
    const std::string bytes = io::read_all(path);
    const std::size_t eol = bytes.find('\n');
    if (eol == std::string::npos) throw FormatError("missing dataset header: " + path.string());

    Dataset ds;
    try {
        const json header = json::parse(bytes.substr(0, eol));
        if (header.at("format").get<std::string>() != kDatasetFormat) {
            throw FormatError("not a dataset file: " + path.string());
        }
        if (header.at("version").get<std::uint32_t>() != kDatasetVersion) {
            throw FormatError("unsupported dataset version in " + path.string());
        }
        ds.manifest = manifest_from_json_obj(header.at("manifest"));
    } catch (const json::exception& e) {
        throw FormatError("bad dataset header in " + path.string() + ": " + e.what());
    }
    try {
        ds.manifest.validate();
    } catch (const ConfigError& e) {
        throw FormatError("dataset header failed validation: " + std::string(e.what()));
    }

    const DatasetManifest& m = ds.manifest;
    const std::size_t window = static_cast<std::size_t>(m.cfg.lltf_len());
    io::Cursor cur(bytes, path.string());
    cur.raw(eol + 1);  // skip the header line
    const int total = m.total_records();
    ds.records.reserve(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) {
        LltfRecord rec;
        rec.f = cur.f64();
        rec.p_noise = cur.f64();
        rec.p_signal = cur.f64();
        rec.l = static_cast<int>(cur.u32());
        rec.x.reserve(window);
        for (std::size_t t = 0; t < window; ++t) {
            const float re = cur.f32();
            const float im = cur.f32();
            rec.x.emplace_back(re, im);
        }
        rec.snr_db = m.snr_grid_db[static_cast<std::size_t>(i / m.records_per_snr)];
        ds.records.push_back(std::move(rec));
    }
    if (!cur.at_end()) throw FormatError("trailing bytes in " + path.string());
    assign_splits(ds);
    return ds;
}

}  // namespace pronto

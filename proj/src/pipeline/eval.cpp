#include "pronto/pipeline/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numbers>
#include <utility>

#include "pronto/augment.hpp"
#include "pronto/channel.hpp"
#include "pronto/classic_sync.hpp"
#include "pronto/error.hpp"
#include "pronto/parallel.hpp"
#include "pronto/pipeline/feed.hpp"
#include "pronto/rng.hpp"

namespace pronto {
namespace {

constexpr std::uint64_t kPdEvalTag = 0x7064650000000000ull;
constexpr std::uint64_t kCfoEvalTag = 0x6366650000000000ull;
constexpr std::uint64_t kPacketTag = 0x706b740000000000ull;

// Contiguous chunks, one workspace per worker; results keyed by example index stay
// schedule-independent.
void for_chunks(int n, int workers, const std::function<void(int, int)>& fn) {
    if (n <= 0) return;
    if (workers <= 0) workers = default_workers();
    workers = std::min(workers, n);
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    const int per = (n + workers - 1) / workers;
    std::vector<std::pair<int, int>> spans;
    for (int b = 0; b < n; b += per) spans.emplace_back(b, std::min(n, b + per));
    parallel_for(static_cast<int>(spans.size()), static_cast<int>(spans.size()),
                 [&](int c) { fn(spans[static_cast<std::size_t>(c)].first,
                                 spans[static_cast<std::size_t>(c)].second); });
}

int argmax(const std::vector<float>& v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::vector<cdouble> rotate_from_zero(std::span<const cdouble> x, double f_hz, double fs) {
    std::vector<cdouble> out(x.size());
    const double w = 2.0 * std::numbers::pi * f_hz / fs;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = x[i] * std::polar(1.0, w * static_cast<double>(i));
    }
    return out;
}

void append_row(std::string& out, const char* fmt, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    out += buf;
    out += '\n';
}

}  // namespace

int predict_class(const nn::Plan& plan, const nn::Params<float>& params,
                  std::span<const cdouble> window, nn::Workspace<float>& ws) {
    const std::vector<cdouble> norm = rms_normalize(window);
    std::vector<float> input;
    feed_complex(norm, input);
    return argmax(nn::forward_one(plan, params, std::span<const float>(input), ws));
}

double predict_cfo(const nn::Plan& plan, const nn::Params<float>& params,
                   std::span<const cdouble> window, double delta_f,
                   nn::Workspace<float>& ws) {
    const std::vector<cdouble> norm = rms_normalize(window);
    std::vector<float> input;
    feed_complex(norm, input);
    const std::vector<float>& out =
        nn::forward_one(plan, params, std::span<const float>(input), ws);
    return label_to_hz(static_cast<double>(out[0]), delta_f);
}

PdEval evaluate_pd(const Dataset& ds, const std::vector<int>& indices,
                   const nn::ModelSpec& spec, const nn::Params<float>& params,
                   std::uint64_t seed, int draws_per_record, int workers) {
    if (draws_per_record < 1) throw ConfigError("draws_per_record must be at least 1");
    const nn::Plan plan = nn::make_plan(spec);
    const WaveformConfig wave = ds.manifest.cfg;
    const int classes = wave.num_classes();
    if (plan.out_dim != classes) throw ConfigError("detector output does not match classes");

    const int m = static_cast<int>(indices.size()) * draws_per_record;
    std::vector<int> preds(static_cast<std::size_t>(m));
    std::vector<int> labels(static_cast<std::size_t>(m));
    const Rng master(seed);

    for_chunks(m, workers, [&](int lo, int hi) {
        nn::Workspace<float> ws;
        ws.init(plan);
        std::vector<float> input;
        for (int j = lo; j < hi; ++j) {
            const int rec_idx = indices[static_cast<std::size_t>(j / draws_per_record)];
            const LltfRecord& rec = ds.records[static_cast<std::size_t>(rec_idx)];
            Rng rng = master.derive(kPdEvalTag ^ static_cast<std::uint64_t>(j));
            const PdExample ex = augment_pd(rec, wave, rng);
            feed_rowmajor(ex.iq, input);
            const std::vector<float>& out =
                nn::forward_one(plan, params, std::span<const float>(input), ws);
            preds[static_cast<std::size_t>(j)] = argmax(out);
            labels[static_cast<std::size_t>(j)] = ex.label;
        }
    });

    PdEval ev;
    ev.total = m;
    ev.confusion.assign(static_cast<std::size_t>(classes),
                        std::vector<int>(static_cast<std::size_t>(classes), 0));
    std::vector<int> bucket_total(ds.manifest.snr_grid_db.size(), 0);
    std::vector<int> bucket_hit(ds.manifest.snr_grid_db.size(), 0);
    int hits = 0;
    for (int j = 0; j < m; ++j) {
        const int rec_idx = indices[static_cast<std::size_t>(j / draws_per_record)];
        const auto bucket = static_cast<std::size_t>(rec_idx / ds.manifest.records_per_snr);
        const int t = labels[static_cast<std::size_t>(j)];
        const int p = preds[static_cast<std::size_t>(j)];
        ++ev.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
        ++bucket_total[bucket];
        if (t == p) {
            ++hits;
            ++bucket_hit[bucket];
        }
    }
    ev.accuracy = m == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(m);
    for (std::size_t b = 0; b < bucket_total.size(); ++b) {
        if (bucket_total[b] == 0) continue;
        ev.per_snr.push_back({ds.manifest.snr_grid_db[b],
                              static_cast<double>(bucket_hit[b]) / bucket_total[b],
                              bucket_total[b]});
    }
    return ev;
}

CfoEval evaluate_cfo(const Dataset& ds, const std::vector<int>& indices,
                     const nn::ModelSpec& spec, const nn::Params<float>& params,
                     double delta_f, std::uint64_t seed, int workers) {
    if (!(delta_f > 0)) throw ConfigError("delta_f must be positive");
    const nn::Plan plan = nn::make_plan(spec);
    if (plan.out_dim != 1) throw ConfigError("offset regressor must have one output");
    const WaveformConfig wave = ds.manifest.cfg;
    const int m = static_cast<int>(indices.size());
    CfoEval ev;
    ev.scatter.resize(static_cast<std::size_t>(m));
    const Rng master(seed);

    for_chunks(m, workers, [&](int lo, int hi) {
        nn::Workspace<float> ws;
        ws.init(plan);
        for (int j = lo; j < hi; ++j) {
            const int rec_idx = indices[static_cast<std::size_t>(j)];
            const LltfRecord& rec = ds.records[static_cast<std::size_t>(rec_idx)];
            Rng rng = master.derive(kCfoEvalTag ^ static_cast<std::uint64_t>(j));
            const double f_off = rng.uniform(0.0, delta_f / 2.0);
            const std::vector<cdouble> comp =
                compensate_cfo(rec.x, rec.f, rec.l, wave.sample_rate);
            const std::vector<cdouble> window =
                rotate_from_zero(comp, f_off, wave.sample_rate);
            const double pred = predict_cfo(plan, params, window, delta_f, ws);
            ev.scatter[static_cast<std::size_t>(j)] = {f_off, pred, rec.snr_db};
        }
    });

    const std::size_t buckets = ds.manifest.snr_grid_db.size();
    std::vector<double> abs_sum(buckets, 0.0);
    std::vector<double> poe_sum(buckets, 0.0);
    std::vector<int> count(buckets, 0);
    std::vector<int> excluded(buckets, 0);
    double abs_all = 0.0;
    for (int j = 0; j < m; ++j) {
        const int rec_idx = indices[static_cast<std::size_t>(j)];
        const auto b = static_cast<std::size_t>(rec_idx / ds.manifest.records_per_snr);
        const ScatterRow& row = ev.scatter[static_cast<std::size_t>(j)];
        const double err = std::abs(row.pred_hz - row.true_hz);
        abs_sum[b] += err;
        abs_all += err;
        ++count[b];
        if (std::abs(row.true_hz) < 1.0) {
            ++excluded[b];
        } else {
            poe_sum[b] += err / std::abs(row.true_hz);
        }
    }
    ev.mae_hz = m == 0 ? 0.0 : abs_all / m;
    for (std::size_t b = 0; b < buckets; ++b) {
        if (count[b] == 0) continue;
        const int included = count[b] - excluded[b];
        ev.per_snr.push_back({ds.manifest.snr_grid_db[b], abs_sum[b] / count[b],
                              included == 0 ? 0.0 : poe_sum[b] / included, count[b],
                              excluded[b]});
    }
    return ev;
}

std::vector<TotalCfoRow> total_cfo_experiment(const WaveformConfig& cfg,
                                              const nn::ModelSpec& spec,
                                              const nn::Params<float>& params, double delta_f,
                                              std::span<const double> packet_cfos_hz,
                                              std::uint64_t seed) {
    cfg.validate();
    const nn::Plan plan = nn::make_plan(spec);
    nn::Workspace<float> ws;
    ws.init(plan);
    const Rng master(seed);
    DetectConfig det_cfg;
    det_cfg.eta = cfg.eta();

    std::vector<TotalCfoRow> rows;
    rows.reserve(packet_cfos_hz.size());
    for (std::size_t p = 0; p < packet_cfos_hz.size(); ++p) {
        Rng rng = master.derive(kPacketTag ^ static_cast<std::uint64_t>(p));
        ChannelProfile profile;
        profile.cfo_hz = packet_cfos_hz[p];
        profile.lead_len = static_cast<int>(rng.uniform_int(16, 200));
        profile.trail_len = 64;
        profile.seed = rng.next_u64();

        const Capture cap = make_capture(cfg, profile);
        const std::span<const cdouble> samples(cap.buf.samples);
        const DetectionResult det = detect_packet(samples, det_cfg);
        if (!det.start_index) {
            throw InternalError("classical detection missed a noiseless packet");
        }
        const int s = *det.start_index;

        TotalCfoRow row;
        row.truth_hz = packet_cfos_hz[p];
        row.coarse_classic =
            coarse_cfo_stf(samples.subspan(static_cast<std::size_t>(s),
                                           static_cast<std::size_t>(cfg.lstf_len())),
                           cfg.eta(), cfg.sample_rate);
        const auto window = samples.subspan(
            static_cast<std::size_t>(s + cfg.lstf_len()),
            static_cast<std::size_t>(cfg.lltf_len()));
        row.fine_classic =
            fine_cfo_lltf(compensate_cfo(window, row.coarse_classic, cfg.lstf_len(),
                                         cfg.sample_rate),
                          cfg.fft_len, cfg.sample_rate);
        row.coarse_cnn = predict_cfo(plan, params, window, delta_f, ws);
        row.fine_after_cnn =
            fine_cfo_lltf(compensate_cfo(window, row.coarse_cnn, cfg.lstf_len(),
                                         cfg.sample_rate),
                          cfg.fft_len, cfg.sample_rate);
        rows.push_back(row);
    }
    return rows;
}

std::string pd_metrics_csv(const PdEval& ev) {
    std::string out = "snr_db,metric,value,count\n";
    for (const PdSnrAccuracy& row : ev.per_snr) {
        append_row(out, "%g,accuracy,%.10g,%d", row.snr_db, row.accuracy, row.count);
    }
    append_row(out, "all,accuracy,%.10g,%d", ev.accuracy, ev.total);
    return out;
}

std::string cfo_metrics_csv(const CfoEval& ev) {
    std::string out = "snr_db,metric,value,count\n";
    int total = 0;
    for (const CfoSnrMetrics& row : ev.per_snr) {
        append_row(out, "%g,mae_hz,%.10g,%d", row.snr_db, row.mae_hz, row.count);
        append_row(out, "%g,poe,%.10g,%d", row.snr_db, row.poe, row.count - row.poe_excluded);
        if (row.poe_excluded > 0) {
            append_row(out, "%g,poe_excluded,%d,%d", row.snr_db, row.poe_excluded, row.count);
        }
        total += row.count;
    }
    append_row(out, "all,mae_hz,%.10g,%d", ev.mae_hz, total);
    return out;
}

std::string scatter_csv(const CfoEval& ev) {
    std::string out = "true_hz,pred_hz,snr_db\n";
    for (const ScatterRow& row : ev.scatter) {
        append_row(out, "%.10g,%.10g,%g", row.true_hz, row.pred_hz, row.snr_db);
    }
    return out;
}

std::string total_cfo_csv(const std::vector<TotalCfoRow>& rows) {
    std::string out =
        "truth_hz,coarse_classic,fine_classic,total_classic,coarse_cnn,fine_after_cnn,"
        "total_cnn\n";
    for (const TotalCfoRow& r : rows) {
        append_row(out, "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g", r.truth_hz,
                   r.coarse_classic, r.fine_classic, r.total_classic(), r.coarse_cnn,
                   r.fine_after_cnn, r.total_cnn());
    }
    return out;
}

std::string history_csv(const std::vector<EpochStats>& history) {
    std::string out = "epoch,train_loss,val_loss,val_metric\n";
    for (const EpochStats& e : history) {
        append_row(out, "%d,%.10g,%.10g,%.10g", e.epoch, e.train_loss, e.val_loss,
                   e.val_metric);
    }
    return out;
}

}  // namespace pronto

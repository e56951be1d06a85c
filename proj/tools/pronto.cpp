// Operator entry point: dataset generation, training, evaluation, and the stream
// receiver simulation, wired to the library with reproducible seeding throughout.
//
// Exit codes: 0 success, 2 configuration/usage, 3 I/O or malformed artifact,
// 4 numeric or training failure.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pronto/error.hpp"
#include "pronto/io.hpp"
#include "pronto/log.hpp"
#include "pronto/nn/checkpoint.hpp"
#include "pronto/nn/spec.hpp"
#include "pronto/pipeline/dataset.hpp"
#include "pronto/pipeline/eval.hpp"
#include "pronto/pipeline/receiver.hpp"
#include "pronto/pipeline/train.hpp"

namespace {

using nlohmann::json;
using namespace pronto;

// Optional JSON file whose keys mirror the long flag names in snake_case; a key fills in
// any flag the command line left at its default.
class ConfigOverlay {
  public:
    void load(const std::string& path) {
        if (path.empty()) return;
        try {
            data_ = json::parse(io::read_all(path));
        } catch (const json::exception& e) {
            throw ConfigError("bad config file " + path + ": " + e.what());
        }
        if (!data_.is_object()) throw ConfigError("config file must hold a JSON object");
    }

    template <class T>
    void fallback(const CLI::Option* opt, const char* key, T& value) const {
        if (opt != nullptr && opt->count() > 0) return;
        if (!data_.contains(key)) return;
        try {
            value = data_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config key ") + key + ": " + e.what());
        }
    }

  private:
    json data_ = json::object();
};

nn::Arch parse_arch(const std::string& s) {
    if (s == "s") return nn::Arch::kSmall;
    if (s == "l") return nn::Arch::kLarge;
    throw ConfigError("unknown arch: " + s + " (expected s or l)");
}

struct GenDataArgs {
    std::vector<double> snr_list;
    int count_per_snr = 0;
    std::vector<double> cfo_range{-39062.5, 39062.5};
    double cfo_sign_split = 0.0;  // abs max; 0 means the range policy
    std::vector<double> fracs{0.7, 0.1, 0.2};
    int fft_len = 64;
    double fs = 5e6;
    std::uint64_t seed = 1;
    int workers = 0;
    std::string out;
    std::string config;
};

int cmd_gen_data(const GenDataArgs& a) {
    DatasetManifest m;
    m.cfg.fft_len = a.fft_len;
    m.cfg.sample_rate = a.fs;
    m.snr_grid_db = a.snr_list;
    m.records_per_snr = a.count_per_snr;
    if (a.fracs.size() != 3) throw ConfigError("--fracs needs train,val,test");
    m.train_frac = a.fracs[0];
    m.val_frac = a.fracs[1];
    m.test_frac = a.fracs[2];
    m.seed = a.seed;
    if (a.cfo_sign_split > 0.0) {
        m.cfo_policy = CfoPolicy::sign_split(a.cfo_sign_split);
    } else {
        if (a.cfo_range.size() != 2) throw ConfigError("--cfo-range needs lo,hi");
        m.cfo_policy = CfoPolicy::range(a.cfo_range[0], a.cfo_range[1]);
    }
    m.validate();

    const Dataset ds = build_lltf_dataset(m, a.workers);
    save_dataset(a.out, ds);
    std::printf("%s\n", manifest_to_json(m).c_str());
    log::info("wrote %s: %d records (train %zu / val %zu / test %zu)", a.out.c_str(),
              m.total_records(), ds.train_idx.size(), ds.val_idx.size(), ds.test_idx.size());
    return 0;
}

struct TrainArgs {
    std::string task;
    std::string arch = "s";
    std::string data;
    std::string out;
    std::string history;
    TrainConfig cfg;
    double delta_f = 78125.0;
    bool no_augment = false;
    std::string config;
};

int cmd_train(const TrainArgs& a) {
    const Dataset ds = load_dataset(a.data);
    const WaveformConfig& wave = ds.manifest.cfg;
    TrainConfig cfg = a.cfg;
    cfg.augment = !a.no_augment;

    TrainResult result;
    if (a.task == "pd") {
        const nn::ModelSpec spec = nn::make_model_spec(
            parse_arch(a.arch), nn::Task::kDetect, wave.lltf_len(), wave.num_classes());
        result = train_pd(ds, spec, cfg);
    } else if (a.task == "cfo") {
        const nn::ModelSpec spec =
            nn::make_model_spec(parse_arch(a.arch), nn::Task::kRegress, wave.lltf_len());
        result = train_cfo(ds, spec, cfg, a.delta_f);
    } else {
        throw ConfigError("unknown task: " + a.task + " (expected pd or cfo)");
    }

    nn::save_model(a.out, result.spec, result.params);
    const std::string hist_path = a.history.empty() ? a.out + ".history.csv" : a.history;
    io::write_atomic(hist_path, history_csv(result.history));
    std::printf("task=%s arch=%s epochs_run=%zu best_epoch=%d %s=%.10g\n", a.task.c_str(),
                a.arch.c_str(), result.history.size(), result.best_epoch,
                a.task == "pd" ? "val_accuracy" : "val_mae_hz", result.best_metric);
    return 0;
}

struct EvalArgs {
    std::string task;
    std::string model;
    std::string data;
    std::string report;
    std::string scatter;
    std::string split = "test";
    double delta_f = 78125.0;
    int draws = 1;
    std::uint64_t seed = 1;
    int workers = 0;
    std::string config;
};

const std::vector<int>& pick_split(const Dataset& ds, const std::string& name,
                                   std::vector<int>& all_storage) {
    if (name == "train") return ds.train_idx;
    if (name == "val") return ds.val_idx;
    if (name == "test") return ds.test_idx;
    if (name == "all") {
        all_storage.resize(ds.records.size());
        for (std::size_t i = 0; i < ds.records.size(); ++i) {
            all_storage[i] = static_cast<int>(i);
        }
        return all_storage;
    }
    throw ConfigError("unknown split: " + name);
}

int cmd_eval(const EvalArgs& a) {
    const Dataset ds = load_dataset(a.data);
    const nn::Checkpoint ckpt = nn::load_model(a.model);
    std::vector<int> all_storage;
    const std::vector<int>& idx = pick_split(ds, a.split, all_storage);
    if (idx.empty()) throw ConfigError("selected split is empty");

    if (a.task == "pd") {
        const PdEval ev =
            evaluate_pd(ds, idx, ckpt.spec, ckpt.params, a.seed, a.draws, a.workers);
        io::write_atomic(a.report, pd_metrics_csv(ev));
        std::printf("accuracy=%.10g n=%d\n", ev.accuracy, ev.total);
    } else if (a.task == "cfo") {
        const CfoEval ev =
            evaluate_cfo(ds, idx, ckpt.spec, ckpt.params, a.delta_f, a.seed, a.workers);
        io::write_atomic(a.report, cfo_metrics_csv(ev));
        if (!a.scatter.empty()) io::write_atomic(a.scatter, scatter_csv(ev));
        std::printf("mae_hz=%.10g n=%zu\n", ev.mae_hz, ev.scatter.size());
    } else {
        throw ConfigError("unknown task: " + a.task + " (expected pd or cfo)");
    }
    return 0;
}

struct ReceiverArgs {
    std::string stream;
    std::string pd_model;
    std::string cfo_model;
    std::string out;
    double delta_f = 78125.0;
    int hop = 0;
    std::string config;
};

int cmd_receiver(const ReceiverArgs& a) {
    const StreamSpec spec = stream_spec_from_json(io::read_all(a.stream));
    const Stream stream = build_stream(spec);
    const nn::Checkpoint pd = nn::load_model(a.pd_model);
    const nn::Checkpoint cfo = nn::load_model(a.cfo_model);
    ReceiverConfig rcfg;
    rcfg.hop = a.hop;
    const std::vector<ReceiverEvent> events = receiver_decision_flow(
        stream.buf, pd.spec, pd.params, cfo.spec, cfo.params, spec.cfg, a.delta_f, rcfg);

    std::string csv = "offset,path,start,cfo_hz\n";
    for (const ReceiverEvent& ev : events) {
        char line[128];
        std::snprintf(line, sizeof line, "%lld,%s,%lld,%.10g",
                      static_cast<long long>(ev.buffer_offset),
                      ev.path == ReceiverPath::kLegacy ? "legacy" : "pronto",
                      static_cast<long long>(ev.start_index), ev.coarse_cfo_hz);
        std::printf("%s\n", line);
        csv += line;
        csv += '\n';
    }
    if (!a.out.empty()) io::write_atomic(a.out, csv);
    log::info("%zu events over %zu samples", events.size(), stream.buf.samples.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Packet detection and carrier-offset estimation workbench"};
    app.require_subcommand(1);

    GenDataArgs ga;
    CLI::App* gen = app.add_subcommand("gen-data", "Synthesize a long-field record dataset");
    auto* g_snr = gen->add_option("--snr-list", ga.snr_list, "SNR grid in dB")
                      ->delimiter(',');
    auto* g_count = gen->add_option("--count-per-snr", ga.count_per_snr, "records per SNR");
    auto* g_range = gen->add_option("--cfo-range", ga.cfo_range,
                                    "inherent CFO bounds lo,hi in Hz")
                        ->delimiter(',');
    auto* g_sign = gen->add_option("--cfo-sign-split", ga.cfo_sign_split,
                                   "draw CFO in +-MAX Hz and split train/test by label sign");
    auto* g_fracs = gen->add_option("--fracs", ga.fracs, "train,val,test fractions")
                        ->delimiter(',');
    auto* g_fft = gen->add_option("--fft-len", ga.fft_len, "FFT length N");
    auto* g_fs = gen->add_option("--fs", ga.fs, "sample rate in Hz");
    auto* g_seed = gen->add_option("--seed", ga.seed, "master seed");
    auto* g_workers = gen->add_option("--workers", ga.workers, "worker threads (0 = cores)");
    auto* g_out = gen->add_option("--out", ga.out, "output dataset path");
    gen->add_option("--config", ga.config, "JSON file with flag fallbacks");

    TrainArgs ta;
    CLI::App* tr = app.add_subcommand("train", "Train a detector or offset regressor");
    auto* t_task = tr->add_option("--task", ta.task, "pd or cfo");
    auto* t_arch = tr->add_option("--arch", ta.arch, "s or l");
    auto* t_data = tr->add_option("--data", ta.data, "dataset path");
    auto* t_out = tr->add_option("--out", ta.out, "checkpoint output path");
    auto* t_hist = tr->add_option("--history", ta.history,
                                  "history CSV path (default <out>.history.csv)");
    auto* t_epochs = tr->add_option("--epochs", ta.cfg.max_epochs, "epoch cap");
    auto* t_pat = tr->add_option("--patience", ta.cfg.patience, "early-stop patience");
    auto* t_batch = tr->add_option("--batch", ta.cfg.batch_size, "mini-batch size");
    auto* t_lr = tr->add_option("--lr", ta.cfg.lr, "Adam learning rate");
    auto* t_lrmin = tr->add_option("--lr-min-frac", ta.cfg.lr_min_frac,
                                   "cosine-decay floor as a fraction of --lr (1 = constant)");
    auto* t_draws = tr->add_option("--draws", ta.cfg.draws_per_record,
                                   "fresh windows per record per epoch");
    auto* t_delta = tr->add_option("--delta-f", ta.delta_f,
                                   "offset range: injections span +-delta_f/2 (cfo task)");
    auto* t_noaug = tr->add_flag("--no-augment", ta.no_augment,
                                 "cfo task: train on raw records (ablation arm)");
    auto* t_seed = tr->add_option("--seed", ta.cfg.seed, "master seed");
    tr->add_option("--config", ta.config, "JSON file with flag fallbacks");

    EvalArgs ea;
    CLI::App* ev = app.add_subcommand("eval", "Score a checkpoint on a dataset split");
    auto* e_task = ev->add_option("--task", ea.task, "pd or cfo");
    auto* e_model = ev->add_option("--model", ea.model, "checkpoint path");
    auto* e_data = ev->add_option("--data", ea.data, "dataset path");
    auto* e_report = ev->add_option("--report", ea.report, "metrics CSV output path");
    auto* e_scatter = ev->add_option("--scatter", ea.scatter,
                                     "true/predicted pairs CSV (cfo task)");
    auto* e_split = ev->add_option("--split", ea.split, "train|val|test|all");
    auto* e_delta = ev->add_option("--delta-f", ea.delta_f, "offset range in Hz (cfo task)");
    auto* e_draws = ev->add_option("--draws", ea.draws, "windows per record (pd task)");
    auto* e_seed = ev->add_option("--seed", ea.seed, "evaluation seed");
    auto* e_workers = ev->add_option("--workers", ea.workers, "worker threads (0 = cores)");
    ev->add_option("--config", ea.config, "JSON file with flag fallbacks");

    ReceiverArgs ra;
    CLI::App* rc = app.add_subcommand("receiver", "Run the decision flow over a stream");
    auto* r_stream = rc->add_option("--stream", ra.stream, "stream spec JSON path");
    auto* r_pd = rc->add_option("--pd-model", ra.pd_model, "detector checkpoint");
    auto* r_cfo = rc->add_option("--cfo-model", ra.cfo_model, "regressor checkpoint");
    auto* r_out = rc->add_option("--out", ra.out, "events CSV output path");
    auto* r_delta = rc->add_option("--delta-f", ra.delta_f, "regressor offset range in Hz");
    auto* r_hop = rc->add_option("--hop", ra.hop, "idle window advance (0 = eta)");
    rc->add_option("--config", ra.config, "JSON file with flag fallbacks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) {
            ConfigOverlay cfg;
            cfg.load(ga.config);
            cfg.fallback(g_snr, "snr_list", ga.snr_list);
            cfg.fallback(g_count, "count_per_snr", ga.count_per_snr);
            cfg.fallback(g_range, "cfo_range", ga.cfo_range);
            cfg.fallback(g_sign, "cfo_sign_split", ga.cfo_sign_split);
            cfg.fallback(g_fracs, "fracs", ga.fracs);
            cfg.fallback(g_fft, "fft_len", ga.fft_len);
            cfg.fallback(g_fs, "fs", ga.fs);
            cfg.fallback(g_seed, "seed", ga.seed);
            cfg.fallback(g_workers, "workers", ga.workers);
            cfg.fallback(g_out, "out", ga.out);
            if (ga.snr_list.empty()) throw ConfigError("--snr-list is required");
            if (ga.count_per_snr <= 0) throw ConfigError("--count-per-snr must be positive");
            if (ga.out.empty()) throw ConfigError("--out is required");
            return cmd_gen_data(ga);
        }
        if (tr->parsed()) {
            ConfigOverlay cfg;
            cfg.load(ta.config);
            cfg.fallback(t_task, "task", ta.task);
            cfg.fallback(t_arch, "arch", ta.arch);
            cfg.fallback(t_data, "data", ta.data);
            cfg.fallback(t_out, "out", ta.out);
            cfg.fallback(t_hist, "history", ta.history);
            cfg.fallback(t_epochs, "epochs", ta.cfg.max_epochs);
            cfg.fallback(t_pat, "patience", ta.cfg.patience);
            cfg.fallback(t_batch, "batch", ta.cfg.batch_size);
            cfg.fallback(t_lr, "lr", ta.cfg.lr);
            cfg.fallback(t_lrmin, "lr_min_frac", ta.cfg.lr_min_frac);
            cfg.fallback(t_draws, "draws_per_record", ta.cfg.draws_per_record);
            cfg.fallback(t_delta, "delta_f", ta.delta_f);
            cfg.fallback(t_noaug, "no_augment", ta.no_augment);
            cfg.fallback(t_seed, "seed", ta.cfg.seed);
            if (ta.task.empty()) throw ConfigError("--task is required");
            if (ta.data.empty()) throw ConfigError("--data is required");
            if (ta.out.empty()) throw ConfigError("--out is required");
            return cmd_train(ta);
        }
        if (ev->parsed()) {
            ConfigOverlay cfg;
            cfg.load(ea.config);
            cfg.fallback(e_task, "task", ea.task);
            cfg.fallback(e_model, "model", ea.model);
            cfg.fallback(e_data, "data", ea.data);
            cfg.fallback(e_report, "report", ea.report);
            cfg.fallback(e_scatter, "scatter", ea.scatter);
            cfg.fallback(e_split, "split", ea.split);
            cfg.fallback(e_delta, "delta_f", ea.delta_f);
            cfg.fallback(e_draws, "draws", ea.draws);
            cfg.fallback(e_seed, "seed", ea.seed);
            cfg.fallback(e_workers, "workers", ea.workers);
            if (ea.task.empty()) throw ConfigError("--task is required");
            if (ea.model.empty()) throw ConfigError("--model is required");
            if (ea.data.empty()) throw ConfigError("--data is required");
            if (ea.report.empty()) throw ConfigError("--report is required");
            return cmd_eval(ea);
        }
        if (rc->parsed()) {
            ConfigOverlay cfg;
            cfg.load(ra.config);
            cfg.fallback(r_stream, "stream", ra.stream);
            cfg.fallback(r_pd, "pd_model", ra.pd_model);
            cfg.fallback(r_cfo, "cfo_model", ra.cfo_model);
            cfg.fallback(r_out, "out", ra.out);
            cfg.fallback(r_delta, "delta_f", ra.delta_f);
            cfg.fallback(r_hop, "hop", ra.hop);
            if (ra.stream.empty()) throw ConfigError("--stream is required");
            if (ra.pd_model.empty()) throw ConfigError("--pd-model is required");
            if (ra.cfo_model.empty()) throw ConfigError("--cfo-model is required");
            return cmd_receiver(ra);
        }
    } catch (const ConfigError& e) {
        log::error("%s", e.what());
        return 2;
    } catch (const IoError& e) {
        log::error("%s", e.what());
        return 3;
    } catch (const NumericError& e) {
        log::error("%s", e.what());
        return 4;
    } catch (const std::exception& e) {
        log::error("unexpected: %s", e.what());
        return 1;
    }
    return 2;  // unreachable with require_subcommand(1)
}

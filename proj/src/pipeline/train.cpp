#include "pronto/pipeline/train.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>

#include "pronto/augment.hpp"
#include "pronto/error.hpp"
#include "pronto/log.hpp"
#include "pronto/nn/adam.hpp"
#include "pronto/pipeline/feed.hpp"
#include "pronto/rng.hpp"

namespace pronto {
namespace {

// Stream tags keep the RNG lanes of the three draw sites disjoint: fixed validation
// windows, per-epoch shuffles, and per-(epoch, slot) training windows.
constexpr std::uint64_t kValTag = 0x76616c0000000000ull;
constexpr std::uint64_t kShuffleTag = 0x7368750000000000ull;
constexpr std::uint64_t kAugTag = 0x6175670000000000ull;

std::uint64_t aug_stream(int epoch, std::size_t slot) {
    return kAugTag ^ (static_cast<std::uint64_t>(epoch) << 32) ^
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(slot));
}

void shuffle(std::vector<int>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
        std::swap(v[i - 1], v[j]);
    }
}

struct TaskHooks {
    // Draws one example for a record into (input, target). Target is the class index for
    // the detector, the normalized offset for the regressor.
    std::function<void(const LltfRecord&, Rng&, std::vector<float>&, double&)> make_example;
    // Loss + parameter gradient for the example whose forward pass is resident in ws.
    std::function<double(const nn::Plan&, const nn::Params<float>&, nn::Workspace<float>&,
                         double, nn::Grads&)>
        backward;
    // Validation bookkeeping: folds one output vector into (loss_sum, metric_numerator).
    std::function<void(const std::vector<float>&, double, double&, double&)> val_accum;
    // Turns the accumulated metric numerator into the reported value.
    std::function<double(double, int)> finish_metric;
    bool higher_is_better = true;
};

TrainResult run_training(const Dataset& ds, const nn::ModelSpec& spec, const TrainConfig& cfg,
                         const TaskHooks& hooks) {
    cfg.validate();
    const nn::Plan plan = nn::make_plan(spec);
    if (spec.input_len != ds.manifest.cfg.lltf_len() || spec.input_channels != 2) {
        throw ConfigError("model input shape does not match the dataset window");
    }
    if (ds.train_idx.empty() || ds.val_idx.empty()) {
        throw ConfigError("dataset is missing a train or validation split");
    }

    const Rng master(cfg.seed);
    nn::Params<float> params = nn::init_params<float>(plan, cfg.seed);
    nn::Adam adam(plan, {.lr = cfg.lr});
    nn::Grads grads = nn::zeros_grads(plan);
    nn::Workspace<float> ws;
    ws.init(plan);

    // Validation windows are drawn once from record-keyed streams and reused every epoch,
    // so early stopping compares the same yardstick across epochs.
    std::vector<std::vector<float>> val_inputs(ds.val_idx.size());
    std::vector<double> val_targets(ds.val_idx.size());
    for (std::size_t j = 0; j < ds.val_idx.size(); ++j) {
        const int rec = ds.val_idx[j];
        Rng rng = master.derive(kValTag ^ static_cast<std::uint64_t>(rec));
        hooks.make_example(ds.records[static_cast<std::size_t>(rec)], rng, val_inputs[j],
                           val_targets[j]);
    }

    TrainResult result;
    result.spec = spec;
    result.best_metric = hooks.higher_is_better ? -std::numeric_limits<double>::infinity()
                                                : std::numeric_limits<double>::infinity();
    // One epoch visits every training record draws_per_record times, all slots shuffled
    // together; the augmentation stream is keyed by slot so repeat visits differ.
    std::vector<int> order;
    order.reserve(ds.train_idx.size() * static_cast<std::size_t>(cfg.draws_per_record));
    for (int d = 0; d < cfg.draws_per_record; ++d) {
        order.insert(order.end(), ds.train_idx.begin(), ds.train_idx.end());
    }
    std::vector<float> input;
    int stale = 0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        Rng shuffle_rng = master.derive(kShuffleTag ^ static_cast<std::uint64_t>(epoch));
        shuffle(order, shuffle_rng);
        if (cfg.lr_min_frac < 1.0) {
            const double lo = cfg.lr * cfg.lr_min_frac;
            const double span = cfg.max_epochs > 1
                                    ? static_cast<double>(epoch - 1) /
                                          static_cast<double>(cfg.max_epochs - 1)
                                    : 1.0;
            adam.set_lr(lo + 0.5 * (cfg.lr - lo) * (1.0 + std::cos(span * std::numbers::pi)));
        }

        double loss_sum = 0.0;
        std::size_t pos = 0;
        while (pos < order.size()) {
            const std::size_t batch = std::min<std::size_t>(
                static_cast<std::size_t>(cfg.batch_size), order.size() - pos);
            nn::clear_grads(grads);
            for (std::size_t k = 0; k < batch; ++k) {
                const int rec = order[pos + k];
                Rng rng = master.derive(aug_stream(epoch, pos + k));
                double target = 0.0;
                hooks.make_example(ds.records[static_cast<std::size_t>(rec)], rng, input,
                                   target);
                double loss = 0.0;
                try {
                    nn::forward_one(plan, params, std::span<const float>(input), ws);
                    loss = hooks.backward(plan, params, ws, target, grads);
                } catch (const NumericError& e) {
                    throw TrainingError(std::string("training diverged: ") + e.what(), epoch);
                }
                if (!std::isfinite(loss)) {
                    throw TrainingError("training loss went non-finite", epoch);
                }
                loss_sum += loss;
            }
            adam.step(params, grads, 1.0 / static_cast<double>(batch));
            pos += batch;
        }
        if (!params.all_finite()) throw TrainingError("parameters went non-finite", epoch);
        const double train_loss = loss_sum / static_cast<double>(order.size());

        double val_loss = 0.0;
        double metric_acc = 0.0;
        try {
            for (std::size_t j = 0; j < val_inputs.size(); ++j) {
                const std::vector<float>& out =
                    nn::forward_one(plan, params, std::span<const float>(val_inputs[j]), ws);
                hooks.val_accum(out, val_targets[j], val_loss, metric_acc);
            }
        } catch (const NumericError& e) {
            throw TrainingError(std::string("validation diverged: ") + e.what(), epoch);
        }
        val_loss /= static_cast<double>(val_inputs.size());
        const double metric =
            hooks.finish_metric(metric_acc, static_cast<int>(val_inputs.size()));

        result.history.push_back({epoch, train_loss, val_loss, metric});
        const bool improved = hooks.higher_is_better ? metric > result.best_metric
                                                     : metric < result.best_metric;
        if (improved) {
            result.best_metric = metric;
            result.best_epoch = epoch;
            result.params = params;
            stale = 0;
        } else {
            ++stale;
        }
        log::info("epoch %d: train_loss %.6g val_loss %.6g val_metric %.6g%s", epoch,
                  train_loss, val_loss, metric, improved ? " *" : "");
        if (stale >= cfg.patience) break;
    }
    return result;
}

}  // namespace

void TrainConfig::validate() const {
    if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
    if (patience < 1) throw ConfigError("patience must be at least 1");
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (!(lr > 0) || !std::isfinite(lr)) throw ConfigError("learning rate must be positive");
    if (!(lr_min_frac > 0) || lr_min_frac > 1.0) {
        throw ConfigError("lr_min_frac must be in (0, 1]");
    }
    if (draws_per_record < 1) throw ConfigError("draws_per_record must be at least 1");
}

TrainResult train_pd(const Dataset& ds, const nn::ModelSpec& spec, const TrainConfig& cfg) {
    const WaveformConfig wave = ds.manifest.cfg;
    {
        const nn::Plan plan = nn::make_plan(spec);
        if (plan.out_dim != wave.num_classes() ||
            spec.layers.back().kind != nn::LayerKind::kSoftmax) {
            throw ConfigError("detector model must end in softmax over the shift classes");
        }
    }

    TaskHooks hooks;
    hooks.make_example = [wave](const LltfRecord& rec, Rng& rng, std::vector<float>& input,
                                double& target) {
        const PdExample ex = augment_pd(rec, wave, rng);
        feed_rowmajor(ex.iq, input);
        target = ex.label;
    };
    hooks.backward = [](const nn::Plan& plan, const nn::Params<float>& params,
                        nn::Workspace<float>& ws, double target, nn::Grads& g) {
        return nn::backward_ce(plan, params, ws, static_cast<int>(target), g);
    };
    hooks.val_accum = [](const std::vector<float>& out, double target, double& loss,
                         double& metric) {
        const int label = static_cast<int>(target);
        loss += -std::log(std::max(static_cast<double>(out[static_cast<std::size_t>(label)]),
                                   1e-30));
        const auto arg = static_cast<int>(
            std::max_element(out.begin(), out.end()) - out.begin());
        if (arg == label) metric += 1.0;
    };
    hooks.finish_metric = [](double acc, int n) { return acc / static_cast<double>(n); };
    hooks.higher_is_better = true;
    return run_training(ds, spec, cfg, hooks);
}

TrainResult train_cfo(const Dataset& ds, const nn::ModelSpec& spec, const TrainConfig& cfg,
                      double delta_f) {
    const WaveformConfig wave = ds.manifest.cfg;
    if (!(delta_f > 0) || !std::isfinite(delta_f)) {
        throw ConfigError("delta_f must be positive");
    }
    {
        const nn::Plan plan = nn::make_plan(spec);
        if (plan.out_dim != 1 || spec.layers.back().kind != nn::LayerKind::kTanh) {
            throw ConfigError("regressor model must end in a single tanh output");
        }
    }

    TaskHooks hooks;
    const double half_range = delta_f / 2.0;
    if (cfg.augment) {
        hooks.make_example = [wave, delta_f](const LltfRecord& rec, Rng& rng,
                                             std::vector<float>& input, double& target) {
            const CfoExample ex = augment_cfo(rec, wave, delta_f, rng);
            feed_rowmajor(ex.iq, input);
            target = ex.label;
        };
    } else {
        // Ablation arm: no injected offsets — the raw window against the recorded label.
        hooks.make_example = [half_range](const LltfRecord& rec, Rng&,
                                          std::vector<float>& input, double& target) {
            const std::vector<cdouble> norm = rms_normalize(rec.x);
            feed_complex(norm, input);
            target = rec.f / half_range;
        };
    }
    hooks.backward = [](const nn::Plan& plan, const nn::Params<float>& params,
                        nn::Workspace<float>& ws, double target, nn::Grads& g) {
        return nn::backward_mse(plan, params, ws, target, g);
    };
    hooks.val_accum = [](const std::vector<float>& out, double target, double& loss,
                         double& metric) {
        const double err = static_cast<double>(out[0]) - target;
        loss += err * err;
        metric += std::abs(err);
    };
    hooks.finish_metric = [half_range](double acc, int n) {
        return half_range * acc / static_cast<double>(n);  // MAE in Hz
    };
    hooks.higher_is_better = false;
    return run_training(ds, spec, cfg, hooks);
}

}  // namespace pronto

#pragma once

#include <cstdint>
#include <vector>

#include "pronto/nn/net.hpp"
#include "pronto/nn/spec.hpp"
#include "pronto/pipeline/dataset.hpp"

namespace pronto {

struct TrainConfig {
    int max_epochs = 200;
    int patience = 10;     // stop after this many epochs without validation improvement
    int batch_size = 64;
    double lr = 1e-3;
    // Cosine decay floor as a fraction of lr, reached at max_epochs; 1.0 = constant rate.
    // Late training on noisy windows is variance-limited, where the decay matters.
    double lr_min_frac = 1.0;
    // Fresh windows drawn per record per epoch. More draws densify an epoch without
    // touching the record budget; examples stay unique across draws and epochs.
    int draws_per_record = 1;
    std::uint64_t seed = 1;
    // Regression only: when false the offset-injection stage is skipped and the model
    // trains on RMS-normalized records against their recorded labels (the ablation arm).
    bool augment = true;

    void validate() const;  // throws ConfigError
};

struct EpochStats {
    int epoch;          // 1-based
    double train_loss;  // mean per-example loss over the epoch
    double val_loss;
    double val_metric;  // detector: accuracy; regressor: MAE in Hz
};

struct TrainResult {
    nn::ModelSpec spec;
    nn::Params<float> params;  // snapshot from the best validation epoch
    std::vector<EpochStats> history;
    int best_epoch = 0;
    double best_metric = 0.0;
};

// Shift-class detector training: every epoch re-draws every training window (placement,
// filler, data chunk), so the model never sees the same example twice; the validation
// windows are drawn once from a fixed stream and reused, making the early-stop decision
// deterministic. Cross-entropy loss, Adam updates per mini-batch, best-validation-
// accuracy snapshot returned. Throws TrainingError when the loss goes non-finite.
TrainResult train_pd(const Dataset& ds, const nn::ModelSpec& spec, const TrainConfig& cfg);

// Offset-regressor training: same loop with squared-error loss against labels normalized
// by delta_f/2; validation tracks MAE in Hz (lower is better). cfg.augment=false trains
// on the raw records instead of re-drawn injected offsets.
TrainResult train_cfo(const Dataset& ds, const nn::ModelSpec& spec, const TrainConfig& cfg,
                      double delta_f);

}  // namespace pronto

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pronto/nn/net.hpp"
#include "pronto/nn/spec.hpp"
#include "pronto/pipeline/dataset.hpp"
#include "pronto/pipeline/train.hpp"
#include "pronto/waveform.hpp"

namespace pronto {

// Single-window inference. Both apply RMS normalization and nothing else to the window
// (the deployment-side preprocessing), so callers hand in raw complex samples. The
// workspace must have been init'ed for the matching plan.
int predict_class(const nn::Plan& plan, const nn::Params<float>& params,
                  std::span<const cdouble> window, nn::Workspace<float>& ws);
double predict_cfo(const nn::Plan& plan, const nn::Params<float>& params,
                   std::span<const cdouble> window, double delta_f,
                   nn::Workspace<float>& ws);

struct PdSnrAccuracy {
    double snr_db;
    double accuracy;
    int count;
};

struct PdEval {
    double accuracy = 0.0;
    int total = 0;
    std::vector<std::vector<int>> confusion;  // [truth][predicted], square in num classes
    std::vector<PdSnrAccuracy> per_snr;
};

// Draws `draws_per_record` windows per listed record (fresh placements from seed-keyed
// streams) and scores argmax predictions. Deterministic in (dataset, seed), independent
// of worker count.
PdEval evaluate_pd(const Dataset& ds, const std::vector<int>& indices,
                   const nn::ModelSpec& spec, const nn::Params<float>& params,
                   std::uint64_t seed, int draws_per_record = 1, int workers = 0);

struct CfoSnrMetrics {
    double snr_db;
    double mae_hz;
    double poe;        // mean |err| / |truth| over rows with |truth| >= 1 Hz
    int count;         // rows in the bucket
    int poe_excluded;  // rows dropped from PoE by the 1 Hz guard
};

struct ScatterRow {
    double true_hz;
    double pred_hz;
    double snr_db;
};

struct CfoEval {
    std::vector<CfoSnrMetrics> per_snr;
    std::vector<ScatterRow> scatter;  // one row per evaluated window
    double mae_hz = 0.0;              // over every row
};

// Test-time protocol for the regressor: compensate each record's labeled offset, inject
// a fresh offset uniform in [0, delta_f/2] (truth for scoring), and predict from the
// RMS-normalized result. Works against models trained with or without augmentation.
CfoEval evaluate_cfo(const Dataset& ds, const std::vector<int>& indices,
                     const nn::ModelSpec& spec, const nn::Params<float>& params,
                     double delta_f, std::uint64_t seed, int workers = 0);

// One noiseless standard packet per entry of packet_cfos_hz: the classical two-stage
// estimate next to the hybrid chain where the network replaces the coarse stage and the
// classical fine estimator runs on the network-compensated long field.
struct TotalCfoRow {
    double truth_hz;
    double coarse_classic;
    double fine_classic;
    double coarse_cnn;
    double fine_after_cnn;

    double total_classic() const { return coarse_classic + fine_classic; }
    double total_cnn() const { return coarse_cnn + fine_after_cnn; }
    double cnn_error() const { return coarse_cnn - truth_hz; }
};

std::vector<TotalCfoRow> total_cfo_experiment(const WaveformConfig& cfg,
                                              const nn::ModelSpec& spec,
                                              const nn::Params<float>& params, double delta_f,
                                              std::span<const double> packet_cfos_hz,
                                              std::uint64_t seed);

// Report emission, `snr_db,metric,value,count` rows for the metric files.
std::string pd_metrics_csv(const PdEval& ev);
std::string cfo_metrics_csv(const CfoEval& ev);
std::string scatter_csv(const CfoEval& ev);
std::string total_cfo_csv(const std::vector<TotalCfoRow>& rows);
std::string history_csv(const std::vector<EpochStats>& history);

}  // namespace pronto

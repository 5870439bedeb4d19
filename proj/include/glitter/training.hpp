#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "glitter/data.hpp"
#include "glitter/glitter.hpp"
#include "glitter/losses.hpp"
#include "glitter/model.hpp"

namespace glitter {

enum class Regime { Vanilla, VanillaDa, Glitter, CtVanilla, CtGlitter, SelfKd, Kd, GlitterRnd };

Regime parse_regime(const std::string& s);
std::string regime_name(Regime r);

struct TrainConfig {
    Regime regime = Regime::Glitter;
    int k1 = 2;
    EvalMode eval_mode;  // default pred_ce; kd regimes use kd_kl
    KDConfig kd;         // alpha, tau
    int epochs = 20;
    int early_stop_patience = 10;  // on dev accuracy; <= 0 disables
    size_t batch_size = 32;
    double base_lr = 0.1;
    double warmup_ratio = 0.06;
    uint64_t seed = 0;

    Arch arch = Arch::Mlp;
    int embed_dim = 16;         // boe
    std::vector<int> hidden;    // head hidden sizes
};

// Last recorded prediction of each original input (consistency training).
using PredictionCache = std::unordered_map<std::string, std::vector<double>>;

// Frozen-teacher logits over originals (key: id) and pool entries
// (key: id + ":" + aug_index).
using LogitCache = std::unordered_map<std::string, std::vector<double>>;

struct Metrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
};

struct EpochMetrics {
    int epoch = 0;
    uint64_t step = 0;  // cumulative optimizer steps at epoch end
    double train_loss = 0.0;
    double dev_accuracy = 0.0;
    double dev_f1 = 0.0;
    double epoch_wall_seconds = 0.0;
    uint64_t grad_passes = 0;   // gradient-tracked forward/backward pairs
    uint64_t score_passes = 0;  // no-grad scoring forwards over pool entries
};

struct TrainResult {
    ModelParams model;
    std::vector<EpochMetrics> history;
    std::vector<double> step_losses;  // batch-mean task loss per optimizer step
};

// Runs one training regime end to end. pool is required for DA regimes,
// teacher for kd; logit_cache (optional) replaces live teacher forwards.
// dev, when given, drives the dev columns and early stopping.
// initial_model, when given, overrides the seeded initialization.
TrainResult train(const Dataset& ds, const AugmentPool* pool, const Teacher* teacher,
                  const LogitCache* logit_cache, const TrainConfig& cfg,
                  const Dataset* dev = nullptr, const ModelParams* initial_model = nullptr);

// Phase 1: vanilla training. Phase 2: freeze as teacher, clone_fresh with a
// distinct seed, run kd against the cached teacher logits.
TrainResult train_self_kd(const Dataset& ds, const AugmentPool& pool, const TrainConfig& cfg,
                          const Dataset* dev = nullptr);

// Complete cache over all originals and pool entries; bit-equal to live
// teacher forwards.
LogitCache cache_teacher_logits(const Teacher& teacher, const Dataset& ds, const AugmentPool& pool);

Metrics evaluate(const ModelParams& m, const Dataset& ds);

// CSV: epoch, step, train_loss, dev_accuracy, dev_f1, epoch_wall_seconds,
// grad_passes, score_passes
void write_metrics_csv(const std::vector<EpochMetrics>& history, const std::string& path);

}  // namespace glitter

#include "glitter/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "glitter/errors.hpp"
#include "glitter/rng.hpp"

namespace glitter {

Regime parse_regime(const std::string& s) {
    if (s == "vanilla") return Regime::Vanilla;
    if (s == "vanilla_da") return Regime::VanillaDa;
    if (s == "glitter") return Regime::Glitter;
    if (s == "ct_vanilla") return Regime::CtVanilla;
    if (s == "ct_glitter") return Regime::CtGlitter;
    if (s == "self_kd") return Regime::SelfKd;
    if (s == "kd") return Regime::Kd;
    if (s == "glitter_rnd") return Regime::GlitterRnd;
    throw ConfigError("unknown regime: " + s);
}

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::Vanilla: return "vanilla";
        case Regime::VanillaDa: return "vanilla_da";
        case Regime::Glitter: return "glitter";
        case Regime::CtVanilla: return "ct_vanilla";
        case Regime::CtGlitter: return "ct_glitter";
        case Regime::SelfKd: return "self_kd";
        case Regime::Kd: return "kd";
        case Regime::GlitterRnd: return "glitter_rnd";
    }
    return "?";
}

namespace {

bool uses_pool(Regime r) {
    return r != Regime::Vanilla;  // every DA regime
}

bool is_ct(Regime r) { return r == Regime::CtVanilla || r == Regime::CtGlitter; }

std::string pool_key(const std::string& id, size_t aug_index) {
    return id + ":" + std::to_string(aug_index);
}

const std::vector<double>& teacher_logits_for(const Teacher* teacher, const LogitCache* cache,
                                              const std::string& key, const Input& input,
                                              std::vector<double>& scratch) {
    if (cache) {
        auto it = cache->find(key);
        if (it == cache->end()) throw ValidationError("teacher logit cache missing key: " + key);
        return it->second;
    }
    scratch = forward(*teacher, input).logits;
    return scratch;
}

}  // namespace

TrainResult train(const Dataset& ds, const AugmentPool* pool, const Teacher* teacher,
                  const LogitCache* logit_cache, const TrainConfig& cfg, const Dataset* dev,
                  const ModelParams* initial_model) {
    if (cfg.regime == Regime::SelfKd)
        throw ConfigError("use train_self_kd for the self_kd regime");
    if (uses_pool(cfg.regime) && !pool)
        throw ConfigError("regime " + regime_name(cfg.regime) + " requires an augmentation pool");
    if (cfg.regime == Regime::Kd && !teacher && !logit_cache)
        throw ConfigError("regime kd requires a teacher or a teacher logit cache");
    if (cfg.k1 < 1) throw ConfigError("k1 must be >= 1");
    if (pool && !pool->ragged && cfg.k1 > pool->K)
        throw ConfigError("k1 exceeds pool size K");
    if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");

    EvalMode eval = cfg.eval_mode;
    if (cfg.regime == Regime::Kd) {
        eval.tag = EvalTag::KdKl;
        eval.tau = cfg.kd.tau;
    }

    ModelParams model;
    if (initial_model) {
        model = *initial_model;
    } else if (cfg.arch == Arch::Boe) {
        ModelDims dims;
        dims.embed_dim = cfg.embed_dim;
        dims.hidden = cfg.hidden;
        dims.num_classes = ds.num_classes;
        model = init_model(Arch::Boe, dims, stream_seed(cfg.seed, "model.init"), build_vocab(ds));
    } else {
        if (ds.modality() != Modality::Features)
            throw ConfigError("mlp arch requires a feature dataset");
        ModelDims dims;
        dims.input_dim = static_cast<int>(ds.examples[0].input.features.size());
        dims.hidden = cfg.hidden;
        dims.num_classes = ds.num_classes;
        model = init_model(Arch::Mlp, dims, stream_seed(cfg.seed, "model.init"));
    }

    size_t n = ds.size();
    uint64_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    LrSchedule schedule{cfg.base_lr, cfg.warmup_ratio,
                        steps_per_epoch * static_cast<uint64_t>(cfg.epochs)};

    TrainResult result;
    PredictionCache ct_cache;
    uint64_t step = 0;
    double best_dev_acc = -1.0;
    int epochs_since_best = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        uint64_t grad_passes = 0;
        uint64_t score_passes = 0;
        double epoch_loss = 0.0;

        std::vector<Batch> batches =
            make_batches(ds, uses_pool(cfg.regime) ? pool : nullptr, cfg.batch_size, cfg.seed,
                         static_cast<uint64_t>(epoch));
        for (const Batch& batch : batches) {
            double lr = lr_at(schedule, step);
            Gradients grad = zero_gradients(model);
            double batch_loss = 0.0;

            for (size_t bi = 0; bi < batch.originals.size(); ++bi) {
                const Example& ex = *batch.originals[bi];
                CompositeLoss loss;
                std::vector<const Input*> selected_inputs;

                if (cfg.regime == Regime::Vanilla) {
                    Prediction pred = forward(model, ex.input);
                    ScalarLoss ce = cross_entropy(ex.label, pred);
                    loss.value = ce.value;
                    loss.grad_orig = std::move(ce.grad);
                } else {
                    const std::vector<Input>& entries = *batch.pools[bi];
                    int avail = static_cast<int>(entries.size());
                    int k1_eff = std::min(cfg.k1, avail);  // ragged pools clamp per example

                    // -- selection (maximization step) --
                    std::vector<int> chosen;
                    if (cfg.regime == Regime::VanillaDa || cfg.regime == Regime::CtVanilla) {
                        // no selection: the full pool in index order
                        chosen.resize(static_cast<size_t>(avail));
                        for (int k = 0; k < avail; ++k) chosen[static_cast<size_t>(k)] = k;
                    } else if (cfg.regime == Regime::GlitterRnd) {
                        if (avail > 0) {
                            Rng rng(stream_seed(cfg.seed, "select_random." + ex.id, step));
                            chosen = select_random(avail, k1_eff, rng).chosen;
                        }
                    } else if (avail > 0) {
                        std::vector<double> scores;
                        if (cfg.regime == Regime::Kd && logit_cache) {
                            std::vector<const std::vector<double>*> t_logits;
                            for (size_t k = 0; k < entries.size(); ++k) {
                                auto it = logit_cache->find(pool_key(ex.id, k));
                                if (it == logit_cache->end())
                                    throw ValidationError("teacher logit cache missing key: " +
                                                          pool_key(ex.id, k));
                                t_logits.push_back(&it->second);
                            }
                            scores = score_pool(model, teacher, ex, entries, eval, &score_passes,
                                                &t_logits);
                        } else {
                            scores = score_pool(model, teacher, ex, entries, eval, &score_passes);
                        }
                        chosen = select_topk(scores, k1_eff).chosen;
                    }

                    // -- gradient-tracked forwards on {x_i} ∪ X'* --
                    Prediction pred_orig = forward(model, ex.input);
                    std::vector<Prediction> preds_sel;
                    preds_sel.reserve(chosen.size());
                    for (int k : chosen) {
                        selected_inputs.push_back(&entries[static_cast<size_t>(k)]);
                        preds_sel.push_back(forward(model, entries[static_cast<size_t>(k)]));
                    }

                    // -- task loss (minimization step) --
                    if (is_ct(cfg.regime)) {
                        auto it = ct_cache.find(ex.id);
                        if (it == ct_cache.end()) {
                            // first visit: seed with the current prediction
                            it = ct_cache.emplace(ex.id, pred_orig.probs).first;
                        }
                        loss = ct_task_loss(ex.label, pred_orig, it->second, preds_sel);
                        it->second = pred_orig.probs;  // post-scoring, pre-update
                    } else if (cfg.regime == Regime::Kd) {
                        std::vector<double> scratch_orig;
                        std::vector<double> t_orig = teacher_logits_for(
                            teacher, logit_cache, ex.id, ex.input, scratch_orig);
                        std::vector<std::vector<double>> t_sel;
                        for (int k : chosen) {
                            std::vector<double> scratch;
                            t_sel.push_back(teacher_logits_for(
                                teacher, logit_cache, pool_key(ex.id, static_cast<size_t>(k)),
                                entries[static_cast<size_t>(k)], scratch));
                        }
                        loss = kd_task_loss(ex.label, pred_orig, t_orig, preds_sel, t_sel, cfg.kd);
                    } else {
                        loss = single_task_loss(ex.label, pred_orig, preds_sel);
                    }
                }

                if (!std::isfinite(loss.value)) {
                    throw NumericError("non-finite loss at step " + std::to_string(step) +
                                       ", example \"" + ex.id + "\"");
                }
                batch_loss += loss.value;

                // -- backprop through original and selected inputs --
                grad.add_scaled(backward(model, ex.input, loss.grad_orig), 1.0);
                ++grad_passes;
                for (size_t j = 0; j < loss.grad_selected.size(); ++j) {
                    grad.add_scaled(backward(model, *selected_inputs[j], loss.grad_selected[j]), 1.0);
                    ++grad_passes;
                }
            }

            double inv_bs = 1.0 / static_cast<double>(batch.originals.size());
            Gradients scaled = zero_gradients(model);
            scaled.add_scaled(grad, inv_bs);
            sgd_step(model, scaled, lr);
            result.step_losses.push_back(batch_loss * inv_bs);
            epoch_loss += batch_loss;
            ++step;
        }

        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        EpochMetrics em;
        em.epoch = epoch;
        em.step = step;
        em.train_loss = epoch_loss / static_cast<double>(n);
        em.epoch_wall_seconds = wall;
        em.grad_passes = grad_passes;
        em.score_passes = score_passes;
        if (dev) {
            Metrics dm = evaluate(model, *dev);
            em.dev_accuracy = dm.accuracy;
            em.dev_f1 = dm.macro_f1;
        }
        result.history.push_back(em);

        if (dev && cfg.early_stop_patience > 0) {
            if (em.dev_accuracy > best_dev_acc) {
                best_dev_acc = em.dev_accuracy;
                epochs_since_best = 0;
            } else if (++epochs_since_best >= cfg.early_stop_patience) {
                break;
            }
        }
    }

    result.model = std::move(model);
    return result;
}

TrainResult train_self_kd(const Dataset& ds, const AugmentPool& pool, const TrainConfig& cfg,
                          const Dataset* dev) {
    TrainConfig phase1 = cfg;
    phase1.regime = Regime::Vanilla;
    TrainResult first = train(ds, nullptr, nullptr, nullptr, phase1, dev);

    ModelParams student = clone_fresh(first.model, stream_seed(cfg.seed, "self_kd.student"));
    Teacher teacher = freeze(std::move(first.model));
    LogitCache cache = cache_teacher_logits(teacher, ds, pool);

    TrainConfig phase2 = cfg;
    phase2.regime = Regime::Kd;
    return train(ds, &pool, &teacher, &cache, phase2, dev, &student);
}

LogitCache cache_teacher_logits(const Teacher& teacher, const Dataset& ds, const AugmentPool& pool) {
    LogitCache cache;
    for (const auto& ex : ds.examples) {
        auto it = pool.entries.find(ex.id);
        if (it == pool.entries.end())
            throw ValidationError("cache_teacher_logits: pool missing id \"" + ex.id + "\"");
        cache.emplace(ex.id, forward(teacher, ex.input).logits);
        for (size_t k = 0; k < it->second.size(); ++k) {
            cache.emplace(pool_key(ex.id, k), forward(teacher, it->second[k]).logits);
        }
    }
    return cache;
}

Metrics evaluate(const ModelParams& m, const Dataset& ds) {
    if (ds.examples.empty()) throw ValidationError("evaluate: empty dataset");
    int C = ds.num_classes;
    std::vector<uint64_t> tp(static_cast<size_t>(C), 0), fp(static_cast<size_t>(C), 0),
        fn(static_cast<size_t>(C), 0);
    uint64_t correct = 0;
    for (const auto& ex : ds.examples) {
        Prediction pred = forward(m, ex.input);
        int yhat = static_cast<int>(
            std::max_element(pred.probs.begin(), pred.probs.end()) - pred.probs.begin());
        if (yhat == ex.label) {
            ++correct;
            ++tp[static_cast<size_t>(yhat)];
        } else {
            ++fp[static_cast<size_t>(yhat)];
            ++fn[static_cast<size_t>(ex.label)];
        }
    }

    Metrics metrics;
    metrics.accuracy = static_cast<double>(correct) / static_cast<double>(ds.size());
    double f1_sum = 0.0;
    for (int c = 0; c < C; ++c) {
        uint64_t t = tp[static_cast<size_t>(c)], p = fp[static_cast<size_t>(c)],
                 n = fn[static_cast<size_t>(c)];
        if (t + p + n == 0) {
            std::cerr << "warning: class " << c
                      << " absent from predictions and labels; F1 taken as 0\n";
            continue;
        }
        if (t > 0) f1_sum += 2.0 * static_cast<double>(t) / static_cast<double>(2 * t + p + n);
    }
    metrics.macro_f1 = f1_sum / static_cast<double>(C);
    return metrics;
}

void write_metrics_csv(const std::vector<EpochMetrics>& history, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write metrics csv: " + path);
    f << "epoch,step,train_loss,dev_accuracy,dev_f1,epoch_wall_seconds,grad_passes,score_passes\n";
    f.precision(17);
    for (const auto& em : history) {
        f << em.epoch << "," << em.step << "," << em.train_loss << "," << em.dev_accuracy << ","
          << em.dev_f1 << "," << em.epoch_wall_seconds << "," << em.grad_passes << ","
          << em.score_passes << "\n";
    }
}

}  // namespace glitter

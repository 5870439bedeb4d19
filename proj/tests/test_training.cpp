#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "glitter/errors.hpp"
#include "glitter/synth.hpp"
#include "glitter/training.hpp"

using namespace glitter;

namespace {

SynthOutput small_separable(size_t n = 60, uint64_t seed = 4) {
    SynthSpec spec;
    spec.preset = "separable";
    spec.n = n;
    spec.n_dev = 50;
    spec.K = 4;
    spec.seed = seed;
    return make_synth(spec);
}

bool params_equal(const ModelParams& a, const ModelParams& b) {
    if (a.embedding != b.embedding) return false;
    if (a.layers.size() != b.layers.size()) return false;
    for (size_t l = 0; l < a.layers.size(); ++l) {
        if (a.layers[l].W != b.layers[l].W || a.layers[l].b != b.layers[l].b) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("vanilla training solves the separable task") {
    SynthOutput s = small_separable(80);
    TrainConfig cfg;
    cfg.regime = Regime::Vanilla;
    cfg.epochs = 12;
    cfg.batch_size = 16;
    cfg.base_lr = 0.5;
    cfg.seed = 1;
    TrainResult r = train(s.train, nullptr, nullptr, nullptr, cfg, &s.dev);
    CHECK(r.history.back().dev_accuracy == doctest::Approx(1.0));
    // loss went down
    CHECK(r.history.back().train_loss < r.history.front().train_loss);
}

TEST_CASE("glitter with k1 = K is the vanilla-da degeneracy") {
    SynthOutput s = small_separable();
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 8;
    cfg.seed = 7;
    cfg.k1 = s.pool.K;

    cfg.regime = Regime::Glitter;
    cfg.eval_mode.tag = EvalTag::GtCe;
    TrainResult g = train(s.train, &s.pool, nullptr, nullptr, cfg, &s.dev);

    cfg.regime = Regime::VanillaDa;
    TrainResult v = train(s.train, &s.pool, nullptr, nullptr, cfg, &s.dev);

    CHECK(params_equal(g.model, v.model));
    CHECK(g.step_losses == v.step_losses);

    // only the bookkeeping differs: glitter pays the scoring passes
    for (size_t e = 0; e < g.history.size(); ++e) {
        CHECK(g.history[e].grad_passes == v.history[e].grad_passes);
        CHECK(g.history[e].score_passes == s.train.size() * static_cast<size_t>(s.pool.K));
        CHECK(v.history[e].score_passes == 0);
    }
}

TEST_CASE("pass accounting per epoch") {
    SynthOutput s = small_separable(40);
    REQUIRE(s.pool.K == 4);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.seed = 3;

    SUBCASE("vanilla: N grad passes, no scoring") {
        cfg.regime = Regime::Vanilla;
        TrainResult r = train(s.train, nullptr, nullptr, nullptr, cfg);
        for (const auto& em : r.history) {
            CHECK(em.grad_passes == 40);
            CHECK(em.score_passes == 0);
        }
    }

    SUBCASE("vanilla_da: N(1+K) grad passes, no scoring") {
        cfg.regime = Regime::VanillaDa;
        TrainResult r = train(s.train, &s.pool, nullptr, nullptr, cfg);
        for (const auto& em : r.history) {
            CHECK(em.grad_passes == 40 * 5);
            CHECK(em.score_passes == 0);
        }
    }

    SUBCASE("glitter: N(1+k1) grad passes, N*K scoring passes") {
        cfg.regime = Regime::Glitter;
        cfg.k1 = 2;
        TrainResult r = train(s.train, &s.pool, nullptr, nullptr, cfg);
        for (const auto& em : r.history) {
            CHECK(em.grad_passes == 40 * 3);
            CHECK(em.score_passes == 40 * 4);
        }
    }

    SUBCASE("glitter_rnd: N(1+k1) grad passes, no scoring") {
        cfg.regime = Regime::GlitterRnd;
        cfg.k1 = 2;
        TrainResult r = train(s.train, &s.pool, nullptr, nullptr, cfg);
        for (const auto& em : r.history) {
            CHECK(em.grad_passes == 40 * 3);
            CHECK(em.score_passes == 0);
        }
    }
}

TEST_CASE("training is deterministic per seed") {
    SynthOutput s = small_separable(30);
    TrainConfig cfg;
    cfg.regime = Regime::Glitter;
    cfg.k1 = 2;
    cfg.eval_mode.tag = EvalTag::PredCe;
    cfg.epochs = 3;
    cfg.batch_size = 8;
    cfg.seed = 12;
    TrainResult a = train(s.train, &s.pool, nullptr, nullptr, cfg, &s.dev);
    TrainResult b = train(s.train, &s.pool, nullptr, nullptr, cfg, &s.dev);
    CHECK(params_equal(a.model, b.model));
    CHECK(a.step_losses == b.step_losses);

    cfg.seed = 13;
    TrainResult c = train(s.train, &s.pool, nullptr, nullptr, cfg, &s.dev);
    CHECK(!params_equal(a.model, c.model));
}

TEST_CASE("kd with alpha = 1 reduces to vanilla updates") {
    SynthOutput s = small_separable(30);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.seed = 5;

    cfg.regime = Regime::Vanilla;
    TrainResult vanilla = train(s.train, nullptr, nullptr, nullptr, cfg);

    // an arbitrary frozen teacher; alpha = 1 zeroes its influence
    Teacher teacher = freeze(vanilla.model);
    cfg.regime = Regime::Kd;
    cfg.k1 = 2;
    cfg.kd.alpha = 1.0;
    TrainResult kd = train(s.train, &s.pool, &teacher, nullptr, cfg);

    REQUIRE(kd.model.layers.size() == vanilla.model.layers.size());
    for (size_t l = 0; l < kd.model.layers.size(); ++l) {
        for (size_t i = 0; i < kd.model.layers[l].W.size(); ++i) {
            CHECK(kd.model.layers[l].W[i] ==
                  doctest::Approx(vanilla.model.layers[l].W[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("teacher logit cache is complete and coherent with live forwards") {
    SynthOutput s = small_separable(3);
    REQUIRE(s.train.size() == 3);
    TrainConfig cfg;
    cfg.regime = Regime::Vanilla;
    cfg.epochs = 2;
    cfg.batch_size = 4;
    cfg.seed = 9;
    Teacher teacher = freeze(train(s.train, nullptr, nullptr, nullptr, cfg).model);

    LogitCache cache = cache_teacher_logits(teacher, s.train, s.pool);
    CHECK(cache.size() == 3 + 3 * 4);  // originals + pool entries, K = 4

    for (const auto& ex : s.train.examples) {
        CHECK(cache.at(ex.id) == forward(teacher, ex.input).logits);
        const auto& entries = s.pool.entries.at(ex.id);
        for (size_t k = 0; k < entries.size(); ++k) {
            CHECK(cache.at(ex.id + ":" + std::to_string(k)) ==
                  forward(teacher, entries[k]).logits);
        }
    }

    // kd trained against the cache matches kd trained against the live teacher
    cfg.regime = Regime::Kd;
    cfg.k1 = 2;
    cfg.seed = 10;
    TrainResult live = train(s.train, &s.pool, &teacher, nullptr, cfg);
    TrainResult cached = train(s.train, &s.pool, nullptr, &cache, cfg);
    CHECK(params_equal(live.model, cached.model));
    CHECK(live.step_losses == cached.step_losses);
}

TEST_CASE("self_kd runs two phases and is deterministic") {
    SynthOutput s = small_separable(30);
    TrainConfig cfg;
    cfg.regime = Regime::SelfKd;
    cfg.k1 = 2;
    cfg.epochs = 3;
    cfg.batch_size = 8;
    cfg.seed = 21;
    TrainResult a = train_self_kd(s.train, s.pool, cfg, &s.dev);
    TrainResult b = train_self_kd(s.train, s.pool, cfg, &s.dev);
    CHECK(params_equal(a.model, b.model));
    CHECK(a.step_losses == b.step_losses);
    CHECK(a.history.size() == 3);  // phase-2 history
    for (const auto& em : a.history) {
        CHECK(em.grad_passes == 30 * 3);
        CHECK(em.score_passes == 30 * 4);
    }

    // the student restarts from a fresh init, not the teacher weights
    cfg.regime = Regime::Vanilla;
    TrainResult phase1 = train(s.train, nullptr, nullptr, nullptr, cfg, &s.dev);
    CHECK(!params_equal(a.model, phase1.model));
}

TEST_CASE("ct regimes keep a stop-gradient cache of previous predictions") {
    SynthOutput s = small_separable(20);
    TrainConfig cfg;
    cfg.regime = Regime::CtGlitter;
    cfg.k1 = 2;
    cfg.eval_mode.tag = EvalTag::PredCe;
    cfg.epochs = 4;
    cfg.batch_size = 4;
    cfg.base_lr = 0.3;
    cfg.seed = 8;
    TrainResult r = train(s.train, &s.pool, nullptr, nullptr, cfg, &s.dev);
    CHECK(std::isfinite(r.history.back().train_loss));
    CHECK(r.history.back().dev_accuracy > 0.5);

    cfg.regime = Regime::CtVanilla;
    TrainResult rv = train(s.train, &s.pool, nullptr, nullptr, cfg, &s.dev);
    // ct_vanilla consumes the full pool per example
    CHECK(rv.history[0].grad_passes == 20 * 5);
    CHECK(rv.history[0].score_passes == 0);
}

TEST_CASE("config errors on inconsistent regime wiring") {
    SynthOutput s = small_separable(10);
    TrainConfig cfg;
    cfg.epochs = 1;

    cfg.regime = Regime::Glitter;
    CHECK_THROWS_AS(train(s.train, nullptr, nullptr, nullptr, cfg), ConfigError);

    cfg.regime = Regime::Kd;
    CHECK_THROWS_AS(train(s.train, &s.pool, nullptr, nullptr, cfg), ConfigError);

    cfg.regime = Regime::Glitter;
    cfg.k1 = s.pool.K + 1;
    CHECK_THROWS_AS(train(s.train, &s.pool, nullptr, nullptr, cfg), ConfigError);

    cfg.k1 = 0;
    CHECK_THROWS_AS(train(s.train, &s.pool, nullptr, nullptr, cfg), ConfigError);

    cfg.regime = Regime::SelfKd;
    cfg.k1 = 1;
    CHECK_THROWS_AS(train(s.train, &s.pool, nullptr, nullptr, cfg), ConfigError);
}

TEST_CASE("early stopping respects patience") {
    SynthOutput s = small_separable(40);
    TrainConfig cfg;
    cfg.regime = Regime::Vanilla;
    cfg.epochs = 20;
    cfg.early_stop_patience = 2;
    cfg.batch_size = 8;
    cfg.base_lr = 0.5;
    cfg.seed = 2;
    TrainResult r = train(s.train, nullptr, nullptr, nullptr, cfg, &s.dev);
    // separable saturates immediately, so patience cuts the run short
    CHECK(r.history.size() < 20);

    cfg.early_stop_patience = 0;  // disabled: run every epoch
    TrainResult full = train(s.train, nullptr, nullptr, nullptr, cfg, &s.dev);
    CHECK(full.history.size() == 20);
}

TEST_CASE("evaluate matches a hand confusion matrix") {
    // Build a fixed confusion by constructing inputs the model maps known
    // logits to. Easier: a 1-layer model over one-hot features acts as the
    // identity on logits.
    ModelDims dims;
    dims.input_dim = 3;
    dims.num_classes = 3;
    ModelParams m = init_model(Arch::Mlp, dims, 1);
    m.layers[0].W = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    m.layers[0].b = {0, 0, 0};

    // confusion (rows = truth, cols = prediction):
    //   [[2,1,0],
    //    [0,3,0],
    //    [1,0,3]]
    Dataset ds;
    ds.num_classes = 3;
    auto add = [&](int truth, int predicted, int copies) {
        for (int i = 0; i < copies; ++i) {
            Example ex;
            ex.id = "x" + std::to_string(ds.examples.size());
            ex.input.modality = Modality::Features;
            ex.input.features = std::vector<double>(3, 0.0);
            ex.input.features[static_cast<size_t>(predicted)] = 1.0;
            ex.label = truth;
            ds.examples.push_back(ex);
        }
    };
    add(0, 0, 2);
    add(0, 1, 1);
    add(1, 1, 3);
    add(2, 0, 1);
    add(2, 2, 3);

    Metrics metrics = evaluate(m, ds);
    CHECK(metrics.accuracy == doctest::Approx(8.0 / 10.0));
    // per-class F1: c0 tp=2 fp=1 fn=1 -> 2/3; c1 tp=3 fp=1 fn=0 -> 6/7; c2 tp=3 fp=0 fn=1 -> 6/7
    double expect = (2.0 / 3.0 + 6.0 / 7.0 + 6.0 / 7.0) / 3.0;
    CHECK(metrics.macro_f1 == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("metrics csv has the documented header and row count") {
    std::vector<EpochMetrics> history(2);
    history[0].epoch = 0;
    history[0].step = 5;
    history[0].train_loss = 1.5;
    history[1].epoch = 1;
    history[1].step = 10;
    history[1].train_loss = 0.75;
    std::string path = (std::filesystem::temp_directory_path() / "metrics_t.csv").string();
    write_metrics_csv(history, path);

    std::ifstream f(path);
    std::string line;
    std::getline(f, line);
    CHECK(line == "epoch,step,train_loss,dev_accuracy,dev_f1,epoch_wall_seconds,grad_passes,score_passes");
    size_t rows = 0;
    while (std::getline(f, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 2);
    std::remove(path.c_str());
}

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "glitter/filtering.hpp"
#include "glitter/synth.hpp"
#include "glitter/training.hpp"

using namespace glitter;

namespace {

struct Fixture {
    SynthOutput s;
    ModelParams model;

    Fixture() {
        SynthSpec spec;
        spec.preset = "noisy-aug";
        spec.n = 60;
        spec.n_dev = 50;
        spec.K = 4;
        spec.corrupt_fraction = 0.25;
        spec.seed = 14;
        s = make_synth(spec);

        TrainConfig cfg;
        cfg.regime = Regime::Vanilla;
        cfg.epochs = 8;
        cfg.batch_size = 16;
        cfg.base_lr = 0.5;
        cfg.seed = 1;
        model = train(s.train, nullptr, nullptr, nullptr, cfg).model;
    }
};

}  // namespace

TEST_CASE("confidence filter") {
    Fixture fx;

    SUBCASE("beta = 0 keeps everything") {
        FilterResult r = confidence_filter(fx.s.pool, fx.model, fx.s.train, 0.0);
        CHECK(r.total_before() == fx.s.pool.total_entries());
        CHECK(r.total_after() == r.total_before());
    }

    SUBCASE("beta > 1 removes everything") {
        FilterResult r = confidence_filter(fx.s.pool, fx.model, fx.s.train, 1.01);
        CHECK(r.total_after() == 0);
        for (const auto& row : r.report) CHECK(row.after == 0);
    }

    SUBCASE("kept entries all clear the threshold; dropped ones do not") {
        double beta = 0.7;
        FilterResult r = confidence_filter(fx.s.pool, fx.model, fx.s.train, beta);
        size_t seen = 0;
        for (const auto& [id, kept] : r.pool.entries) {
            for (const Input& in : kept) {
                Prediction p = forward(fx.model, in);
                double conf = *std::max_element(p.probs.begin(), p.probs.end());
                CHECK(conf >= beta);
                ++seen;
            }
        }
        CHECK(seen == r.total_after());

        // independent oracle over the full pool
        size_t expect = 0;
        for (const auto& [id, entries] : fx.s.pool.entries) {
            for (const Input& in : entries) {
                Prediction p = forward(fx.model, in);
                if (*std::max_element(p.probs.begin(), p.probs.end()) >= beta) ++expect;
            }
        }
        CHECK(r.total_after() == expect);
    }

    SUBCASE("retention is monotone in beta") {
        size_t prev = fx.s.pool.total_entries() + 1;
        for (double beta : {0.0, 0.5, 0.7, 0.9, 1.01}) {
            FilterResult r = confidence_filter(fx.s.pool, fx.model, fx.s.train, beta);
            CHECK(r.total_after() < prev + 1);
            prev = r.total_after();
        }
    }

    SUBCASE("filtering is idempotent") {
        FilterResult once = confidence_filter(fx.s.pool, fx.model, fx.s.train, 0.7);
        FilterResult twice = confidence_filter(once.pool, fx.model, fx.s.train, 0.7);
        CHECK(twice.total_after() == once.total_after());
        for (const auto& [id, kept] : once.pool.entries) {
            const auto& again = twice.pool.entries.at(id);
            REQUIRE(again.size() == kept.size());
            for (size_t k = 0; k < kept.size(); ++k) CHECK(again[k].features == kept[k].features);
        }
    }
}

TEST_CASE("label-preserving filter keeps exactly the argmax-consistent entries") {
    Fixture fx;
    FilterResult r = label_preserving_filter(fx.s.pool, fx.model, fx.s.train);

    auto argmax = [&](const Input& in) {
        Prediction p = forward(fx.model, in);
        return static_cast<int>(std::max_element(p.probs.begin(), p.probs.end()) -
                                p.probs.begin());
    };

    size_t expect = 0;
    for (const auto& ex : fx.s.train.examples) {
        int orig = argmax(ex.input);
        for (const Input& in : fx.s.pool.entries.at(ex.id)) {
            if (argmax(in) == orig) ++expect;
        }
    }
    CHECK(r.total_after() == expect);

    for (const auto& ex : fx.s.train.examples) {
        int orig = argmax(ex.input);
        for (const Input& in : r.pool.entries.at(ex.id)) CHECK(argmax(in) == orig);
    }
}

TEST_CASE("filtered pools train with per-example k1 clamping") {
    Fixture fx;
    FilterResult r = confidence_filter(fx.s.pool, fx.model, fx.s.train, 0.9);
    REQUIRE(r.pool.ragged);

    TrainConfig cfg;
    cfg.regime = Regime::Glitter;
    cfg.k1 = 3;
    cfg.eval_mode.tag = EvalTag::GtCe;
    cfg.epochs = 2;
    cfg.batch_size = 16;
    cfg.seed = 6;
    TrainResult t = train(fx.s.train, &r.pool, nullptr, nullptr, cfg, &fx.s.dev);

    // grad passes: 1 + min(k1, kept_i) per example
    uint64_t expect = 0;
    for (const auto& ex : fx.s.train.examples) {
        expect += 1 + std::min<size_t>(3, r.pool.entries.at(ex.id).size());
    }
    CHECK(t.history[0].grad_passes == expect);
    CHECK(t.history[0].score_passes == r.total_after());
}

TEST_CASE("retention report rows and csv") {
    Fixture fx;
    FilterResult r = confidence_filter(fx.s.pool, fx.model, fx.s.train, 0.7);
    REQUIRE(r.report.size() == fx.s.train.size());
    size_t before = 0, after = 0;
    for (const auto& row : r.report) {
        CHECK(row.after <= row.before);
        before += row.before;
        after += row.after;
    }
    CHECK(before == r.total_before());
    CHECK(after == r.total_after());

    std::string path = (std::filesystem::temp_directory_path() / "retention_t.csv").string();
    write_retention_report(r.report, path);
    std::ifstream f(path);
    std::string line;
    std::getline(f, line);
    CHECK(line == "id,before,after");
    size_t rows = 0;
    while (std::getline(f, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == r.report.size());
    std::remove(path.c_str());
}

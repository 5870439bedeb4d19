#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "glitter/errors.hpp"
#include "glitter/synth.hpp"
#include "glitter/training.hpp"

using namespace glitter;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("noisy-aug corrupts exactly the requested slot count") {
    SynthSpec spec;
    spec.preset = "noisy-aug";
    spec.n = 100;
    spec.K = 8;
    spec.corrupt_fraction = 0.25;
    spec.seed = 5;
    SynthOutput out = make_synth(spec);

    CHECK(out.train.size() == 100);
    CHECK(out.train.num_classes == 3);
    CHECK(out.pool.total_entries() == 800);
    CHECK(out.corrupted.size() == 200);  // floor(0.25 * 100 * 8)

    // manifest entries are distinct, valid slots
    std::set<std::pair<std::string, int>> uniq(out.corrupted.begin(), out.corrupted.end());
    CHECK(uniq.size() == 200);
    for (const auto& [id, k] : out.corrupted) {
        CHECK(out.pool.entries.count(id) == 1);
        CHECK(k >= 0);
        CHECK(k < 8);
    }

    SynthSpec none = spec;
    none.corrupt_fraction = 0.0;
    CHECK(make_synth(none).corrupted.empty());
}

TEST_CASE("separable preset trains to perfect dev accuracy") {
    SynthSpec spec;
    spec.preset = "separable";
    spec.n = 100;
    spec.n_dev = 60;
    spec.K = 4;
    spec.seed = 9;
    SynthOutput out = make_synth(spec);
    CHECK(out.dev.size() == 60);
    CHECK(out.train.num_classes == 2);

    TrainConfig cfg;
    cfg.regime = Regime::VanillaDa;
    cfg.epochs = 10;
    cfg.batch_size = 16;
    cfg.base_lr = 0.5;
    cfg.seed = 2;
    TrainResult r = train(out.train, &out.pool, nullptr, nullptr, cfg, &out.dev);
    CHECK(r.history.back().dev_accuracy == doctest::Approx(1.0));
}

TEST_CASE("text-toy produces a text dataset with a strict-K EDA pool") {
    SynthSpec spec;
    spec.preset = "text-toy";
    spec.n = 50;
    spec.K = 8;
    spec.seed = 3;
    SynthOutput out = make_synth(spec);
    CHECK(out.train.modality() == Modality::Text);
    CHECK(out.train.num_classes == 2);
    CHECK(out.pool.K == 8);
    CHECK(out.pool.total_entries() == 400);
    for (const auto& ex : out.train.examples) {
        REQUIRE(out.pool.entries.count(ex.id) == 1);
        for (const auto& in : out.pool.entries.at(ex.id)) {
            CHECK(in.modality == Modality::Text);
            CHECK(!in.text.empty());
        }
    }

    // text-toy trains with the boe arch
    TrainConfig cfg;
    cfg.regime = Regime::Glitter;
    cfg.arch = Arch::Boe;
    cfg.embed_dim = 8;
    cfg.k1 = 2;
    cfg.eval_mode.tag = EvalTag::GtCe;
    cfg.epochs = 5;
    cfg.batch_size = 16;
    cfg.base_lr = 0.5;
    cfg.seed = 4;
    TrainResult r = train(out.train, &out.pool, nullptr, nullptr, cfg, &out.dev);
    CHECK(r.history.back().dev_accuracy > 0.8);
}

TEST_CASE("n_dev defaults to max(50, n/5)") {
    SynthSpec spec;
    spec.preset = "separable";
    spec.n = 100;
    spec.seed = 1;
    CHECK(make_synth(spec).dev.size() == 50);
    spec.n = 1000;
    CHECK(make_synth(spec).dev.size() == 200);
}

TEST_CASE("unknown preset is rejected") {
    SynthSpec spec;
    spec.preset = "mystery";
    CHECK_THROWS_AS(make_synth(spec), ConfigError);
}

TEST_CASE("write_synth regenerates byte-identical files") {
    SynthSpec spec;
    spec.preset = "noisy-aug";
    spec.n = 40;
    spec.n_dev = 50;
    spec.K = 4;
    spec.seed = 17;

    auto tmp = std::filesystem::temp_directory_path();
    std::string d1 = (tmp / "synth_a").string();
    std::string d2 = (tmp / "synth_b").string();
    write_synth(make_synth(spec), d1);
    write_synth(make_synth(spec), d2);

    for (const char* name : {"train.jsonl", "dev.jsonl", "pool.jsonl", "manifest.json"}) {
        std::string a = slurp(d1 + "/" + name);
        std::string b = slurp(d2 + "/" + name);
        CHECK(!a.empty());
        CHECK(a == b);
    }

    // the emitted files load back consistently
    Dataset train = load_dataset(d1 + "/train.jsonl");
    CHECK(train.size() == 40);
    AugmentPool pool = load_pool(d1 + "/pool.jsonl", train, 4);
    CHECK(pool.total_entries() == 160);

    std::filesystem::remove_all(d1);
    std::filesystem::remove_all(d2);
}

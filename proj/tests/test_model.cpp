#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "glitter/errors.hpp"
#include "glitter/losses.hpp"
#include "glitter/model.hpp"
#include "glitter/rng.hpp"

using namespace glitter;

namespace {

Input feat_input(std::vector<double> f) {
    Input in;
    in.modality = Modality::Features;
    in.features = std::move(f);
    return in;
}

Input text_input(const std::string& text) {
    Input in;
    in.modality = Modality::Text;
    in.text = text;
    return in;
}

// Flatten all parameters into one view for the finite-difference check.
std::vector<double*> param_view(ModelParams& m) {
    std::vector<double*> out;
    for (double& v : m.embedding) out.push_back(&v);
    for (auto& layer : m.layers) {
        for (double& v : layer.W) out.push_back(&v);
        for (double& v : layer.b) out.push_back(&v);
    }
    return out;
}

std::vector<double> grad_flat(const Gradients& g) {
    std::vector<double> out(g.embedding);
    for (size_t l = 0; l < g.W.size(); ++l) {
        out.insert(out.end(), g.W[l].begin(), g.W[l].end());
        out.insert(out.end(), g.b[l].begin(), g.b[l].end());
    }
    return out;
}

double ce_value(const ModelParams& m, const Input& in, int y) {
    return cross_entropy(y, forward(m, in)).value;
}

// Central finite differences against the analytic backward pass.
void check_gradients(ModelParams& m, const Input& in, int y) {
    ForwardTrace trace;
    Prediction pred = forward(m, in, &trace);
    ScalarLoss loss = cross_entropy(y, pred);
    Gradients g = backward(m, in, loss.grad);
    std::vector<double> analytic = grad_flat(g);
    std::vector<double*> params = param_view(m);
    REQUIRE(analytic.size() == params.size());

    const double eps = 1e-5;
    double max_rel = 0.0;
    for (size_t i = 0; i < params.size(); ++i) {
        double saved = *params[i];
        *params[i] = saved + eps;
        double up = ce_value(m, in, y);
        *params[i] = saved - eps;
        double down = ce_value(m, in, y);
        *params[i] = saved;
        double numeric = (up - down) / (2.0 * eps);
        double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-8});
        max_rel = std::max(max_rel, std::abs(numeric - analytic[i]) / denom);
    }
    CHECK(max_rel < 1e-4);
}

}  // namespace

TEST_CASE("softmax hand examples") {
    ModelDims dims;
    dims.input_dim = 2;
    dims.num_classes = 2;
    ModelParams m = init_model(Arch::Mlp, dims, 1);
    // force logits [0, ln 3] via an identity-ish map
    m.layers[0].W = {1.0, 0.0, 0.0, 1.0};
    m.layers[0].b = {0.0, 0.0};
    Prediction p = forward(m, feat_input({0.0, std::log(3.0)}));
    CHECK(p.probs[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p.probs[1] == doctest::Approx(0.75).epsilon(1e-12));

    // shift invariance: adding a constant to both logits keeps the probs
    m.layers[0].b = {100.0, 100.0};
    Prediction shifted = forward(m, feat_input({0.0, std::log(3.0)}));
    CHECK(shifted.probs[0] == doctest::Approx(p.probs[0]).epsilon(1e-12));
    CHECK(shifted.probs[1] == doctest::Approx(p.probs[1]).epsilon(1e-12));
}

TEST_CASE("softmax stays finite for extreme logits") {
    ModelDims dims;
    dims.input_dim = 1;
    dims.num_classes = 2;
    ModelParams m = init_model(Arch::Mlp, dims, 1);
    m.layers[0].W = {1000.0, -1000.0};
    m.layers[0].b = {0.0, 0.0};
    Prediction p = forward(m, feat_input({1.0}));
    CHECK(std::isfinite(p.probs[0]));
    CHECK(std::isfinite(p.probs[1]));
    CHECK(p.probs[0] + p.probs[1] == doctest::Approx(1.0));
}

TEST_CASE("mlp gradients match finite differences") {
    Rng rng(99);
    for (int trial = 0; trial < 3; ++trial) {
        ModelDims dims;
        dims.input_dim = 5;
        dims.hidden = {6, 4};
        dims.num_classes = 3;
        ModelParams m = init_model(Arch::Mlp, dims, 100 + trial);
        std::vector<double> f(5);
        for (double& x : f) x = 2.0 * rng.next_unit() - 1.0;
        check_gradients(m, feat_input(f), trial % 3);
    }
}

TEST_CASE("mlp head-only (no hidden) gradients match finite differences") {
    ModelDims dims;
    dims.input_dim = 4;
    dims.num_classes = 4;
    ModelParams m = init_model(Arch::Mlp, dims, 5);
    check_gradients(m, feat_input({0.3, -0.7, 1.2, 0.05}), 2);
}

TEST_CASE("boe gradients match finite differences") {
    Dataset ds;
    ds.num_classes = 2;
    Example ex;
    ex.id = "a";
    ex.input = text_input("red green blue red");
    ex.label = 0;
    ds.examples.push_back(ex);
    auto vocab = build_vocab(ds);

    ModelDims dims;
    dims.embed_dim = 6;
    dims.hidden = {5};
    dims.num_classes = 2;
    ModelParams m = init_model(Arch::Boe, dims, 17, vocab);
    check_gradients(m, text_input("red blue unknownword"), 1);
}

TEST_CASE("build_vocab reserves OOV and is order-stable") {
    Dataset ds;
    ds.num_classes = 2;
    Example a;
    a.id = "a";
    a.input = text_input("cat dog cat");
    Example b;
    b.id = "b";
    b.input = text_input("dog fish");
    ds.examples = {a, b};
    auto vocab = build_vocab(ds);
    CHECK(vocab.size() == 3);  // cat, dog, fish (OOV bucket is implicit index 0)
    CHECK(vocab.at("cat") == 1);
    CHECK(vocab.at("dog") == 2);
    CHECK(vocab.at("fish") == 3);
    CHECK(vocab.count("bird") == 0);
}

TEST_CASE("init is deterministic per seed and shaped correctly") {
    ModelDims dims;
    dims.input_dim = 3;
    dims.hidden = {4};
    dims.num_classes = 2;
    ModelParams a = init_model(Arch::Mlp, dims, 7);
    ModelParams b = init_model(Arch::Mlp, dims, 7);
    ModelParams c = init_model(Arch::Mlp, dims, 8);
    REQUIRE(a.layers.size() == 2);
    CHECK(a.layers[0].W.size() == 12);
    CHECK(a.layers[0].b == std::vector<double>(4, 0.0));
    CHECK(a.layers[1].W.size() == 8);
    CHECK(a.layers[0].W == b.layers[0].W);
    CHECK(a.layers[0].W != c.layers[0].W);

    // Glorot bound for the first layer
    double bound = std::sqrt(6.0 / (3 + 4));
    for (double w : a.layers[0].W) CHECK(std::abs(w) <= bound);
}

TEST_CASE("clone_fresh keeps shape, reseeds weights") {
    ModelDims dims;
    dims.input_dim = 3;
    dims.hidden = {4};
    dims.num_classes = 2;
    ModelParams m = init_model(Arch::Mlp, dims, 7);
    ModelParams fresh = clone_fresh(m, 1234);
    REQUIRE(fresh.layers.size() == m.layers.size());
    CHECK(fresh.layers[0].W.size() == m.layers[0].W.size());
    CHECK(fresh.layers[0].W != m.layers[0].W);
    CHECK(fresh.layers[0].W == init_model(Arch::Mlp, dims, 1234).layers[0].W);
}

TEST_CASE("sgd_step applies theta -= lr * g and rejects non-finite grads") {
    ModelDims dims;
    dims.input_dim = 1;
    dims.num_classes = 2;
    ModelParams m = init_model(Arch::Mlp, dims, 1);
    m.layers[0].W = {1.0, 2.0};
    m.layers[0].b = {0.0, 0.0};
    Gradients g = zero_gradients(m);
    g.W[0] = {0.5, -0.5};
    sgd_step(m, g, 0.1);
    CHECK(m.layers[0].W[0] == doctest::Approx(0.95));
    CHECK(m.layers[0].W[1] == doctest::Approx(2.05));

    g.W[0][0] = std::nan("");
    CHECK_THROWS_AS(sgd_step(m, g, 0.1), NumericError);
}

TEST_CASE("lr schedule hits the documented anchor points") {
    LrSchedule s;
    s.base_lr = 0.1;
    s.warmup_ratio = 0.06;
    s.total_steps = 1000;
    // warmup ends at step 60
    CHECK(lr_at(s, 0) == doctest::Approx(0.0));
    CHECK(lr_at(s, 30) == doctest::Approx(0.05));
    CHECK(lr_at(s, 60) == doctest::Approx(0.1));
    CHECK(lr_at(s, 530) == doctest::Approx(0.05));
    CHECK(lr_at(s, 1000) == doctest::Approx(0.0));
    // monotone up then down
    for (uint64_t t = 1; t <= 60; ++t) CHECK(lr_at(s, t) >= lr_at(s, t - 1));
    for (uint64_t t = 61; t <= 1000; ++t) CHECK(lr_at(s, t) <= lr_at(s, t - 1));
}

TEST_CASE("teacher is a frozen snapshot") {
    ModelDims dims;
    dims.input_dim = 2;
    dims.num_classes = 2;
    ModelParams m = init_model(Arch::Mlp, dims, 3);
    Teacher t = freeze(m);
    Input in = feat_input({0.4, -0.2});
    Prediction before = forward(t, in);

    // keep training the student; teacher outputs must not move
    Gradients g = zero_gradients(m);
    g.W[0] = {1.0, 1.0, 1.0, 1.0};
    sgd_step(m, g, 0.5);
    Prediction after = forward(t, in);
    CHECK(before.logits == after.logits);
    CHECK(forward(m, in).logits != before.logits);
}

TEST_CASE("checkpoint round-trips losslessly") {
    Dataset ds;
    ds.num_classes = 3;
    Example ex;
    ex.id = "a";
    ex.input = text_input("u v w");
    ds.examples.push_back(ex);
    auto vocab = build_vocab(ds);

    ModelDims dims;
    dims.embed_dim = 4;
    dims.hidden = {3};
    dims.num_classes = 3;
    ModelParams m = init_model(Arch::Boe, dims, 21, vocab);

    std::string path = (std::filesystem::temp_directory_path() / "model_rt.json").string();
    save_model(m, path);
    ModelParams back = load_model(path);
    std::remove(path.c_str());

    CHECK(back.arch == m.arch);
    CHECK(back.dims.num_classes == m.dims.num_classes);
    CHECK(back.vocab == m.vocab);
    CHECK(back.embedding == m.embedding);
    REQUIRE(back.layers.size() == m.layers.size());
    for (size_t l = 0; l < m.layers.size(); ++l) {
        CHECK(back.layers[l].W == m.layers[l].W);
        CHECK(back.layers[l].b == m.layers[l].b);
    }

    Input in = text_input("v w zzz");
    CHECK(forward(back, in).logits == forward(m, in).logits);
}

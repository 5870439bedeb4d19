#include "glitter/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "glitter/errors.hpp"
#include "glitter/kernels.hpp"
#include "glitter/rng.hpp"
#include "glitter/text.hpp"

namespace glitter {

using nlohmann::json;

size_t ModelParams::param_count() const {
    size_t n = embedding.size();
    for (const auto& l : layers) n += l.W.size() + l.b.size();
    return n;
}

void Gradients::add_scaled(const Gradients& other, double s) {
    kernels::axpy(s, other.embedding.data(), embedding.data(), embedding.size());
    for (size_t l = 0; l < W.size(); ++l) {
        kernels::axpy(s, other.W[l].data(), W[l].data(), W[l].size());
        kernels::axpy(s, other.b[l].data(), b[l].data(), b[l].size());
    }
}

bool Gradients::finite() const {
    auto ok = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!ok(embedding)) return false;
    for (size_t l = 0; l < W.size(); ++l) {
        if (!ok(W[l]) || !ok(b[l])) return false;
    }
    return true;
}

std::unordered_map<std::string, int> build_vocab(const Dataset& ds) {
    std::unordered_map<std::string, int> vocab;
    int next = 1;  // 0 is the OOV bucket
    for (const auto& ex : ds.examples) {
        if (ex.input.modality != Modality::Text) continue;
        for (const auto& tok : tokenize(ex.input.text)) {
            if (vocab.emplace(tok, next).second) ++next;
        }
    }
    return vocab;
}

namespace {

void fill_glorot(std::vector<double>& w, int fan_in, int fan_out, Rng& rng) {
    double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& x : w) x = (2.0 * rng.next_unit() - 1.0) * s;
}

int head_input_dim(Arch arch, const ModelDims& dims) {
    return arch == Arch::Boe ? dims.embed_dim : dims.input_dim;
}

}  // namespace

ModelParams init_model(Arch arch, ModelDims dims, uint64_t seed,
                       std::unordered_map<std::string, int> vocab) {
    if (dims.num_classes <= 0) throw ConfigError("init_model: num_classes must be positive");
    if (arch == Arch::Boe) {
        if (dims.embed_dim <= 0) throw ConfigError("init_model: embed_dim must be positive");
        dims.vocab_size = static_cast<int>(vocab.size()) + 1;  // + OOV bucket
    } else {
        if (dims.input_dim <= 0) throw ConfigError("init_model: input_dim must be positive");
    }
    for (int h : dims.hidden) {
        if (h <= 0) throw ConfigError("init_model: hidden sizes must be positive");
    }

    ModelParams m;
    m.arch = arch;
    m.dims = dims;
    m.vocab = std::move(vocab);

    if (arch == Arch::Boe) {
        m.embedding.resize(static_cast<size_t>(dims.vocab_size) * dims.embed_dim);
        Rng rng(stream_seed(seed, "init.embedding"));
        fill_glorot(m.embedding, dims.vocab_size, dims.embed_dim, rng);
    }

    int in = head_input_dim(arch, dims);
    std::vector<int> sizes = dims.hidden;
    sizes.push_back(dims.num_classes);
    for (size_t l = 0; l < sizes.size(); ++l) {
        DenseLayer layer;
        layer.in = in;
        layer.out = sizes[l];
        layer.W.resize(static_cast<size_t>(in) * sizes[l]);
        layer.b.assign(static_cast<size_t>(sizes[l]), 0.0);
        Rng rng(stream_seed(seed, "init.layer", l));
        fill_glorot(layer.W, in, sizes[l], rng);
        in = sizes[l];
        m.layers.push_back(std::move(layer));
    }
    return m;
}

ModelParams clone_fresh(const ModelParams& m, uint64_t seed) {
    return init_model(m.arch, m.dims, seed, m.vocab);
}

namespace {

std::vector<double> boe_pool(const ModelParams& m, const Input& input, std::vector<int>* ids_out) {
    std::vector<std::string> tokens = tokenize(input.text);
    if (tokens.empty()) throw ValidationError("forward: empty token list");
    std::vector<double> x(static_cast<size_t>(m.dims.embed_dim), 0.0);
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto& tok : tokens) {
        auto it = m.vocab.find(tok);
        ids.push_back(it == m.vocab.end() ? 0 : it->second);
    }
    double inv = 1.0 / static_cast<double>(ids.size());
    for (int id : ids) {
        kernels::axpy(inv, m.embedding.data() + static_cast<size_t>(id) * m.dims.embed_dim, x.data(),
                      x.size());
    }
    if (ids_out) *ids_out = std::move(ids);
    return x;
}

std::vector<double> dense_forward(const DenseLayer& l, const std::vector<double>& a) {
    std::vector<double> out = l.b;
    for (int i = 0; i < l.in; ++i) {
        kernels::axpy(a[static_cast<size_t>(i)], l.W.data() + static_cast<size_t>(i) * l.out, out.data(),
                      out.size());
    }
    return out;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        z += p[i];
    }
    kernels::scale(1.0 / z, p.data(), p.size());
    return p;
}

}  // namespace

Prediction forward(const ModelParams& m, const Input& input, ForwardTrace* trace) {
    if (m.arch == Arch::Boe && input.modality != Modality::Text)
        throw ValidationError("forward: boe model expects text input");
    if (m.arch == Arch::Mlp && input.modality != Modality::Features)
        throw ValidationError("forward: mlp model expects feature input");

    std::vector<double> a = m.arch == Arch::Boe
                                ? boe_pool(m, input, trace ? &trace->token_ids : nullptr)
                                : input.features;
    if (m.arch == Arch::Mlp && static_cast<int>(a.size()) != m.dims.input_dim)
        throw ValidationError("forward: feature dimension mismatch");

    for (size_t l = 0; l < m.layers.size(); ++l) {
        if (trace) trace->layer_inputs.push_back(a);
        std::vector<double> z = dense_forward(m.layers[l], a);
        if (l + 1 < m.layers.size()) {
            for (double& v : z) v = std::tanh(v);
        }
        if (trace) trace->layer_outputs.push_back(z);
        a = std::move(z);
    }

    Prediction pred;
    pred.probs = softmax(a);
    pred.logits = std::move(a);
    return pred;
}

Gradients zero_gradients(const ModelParams& m) {
    Gradients g;
    g.embedding.assign(m.embedding.size(), 0.0);
    for (const auto& l : m.layers) {
        g.W.emplace_back(l.W.size(), 0.0);
        g.b.emplace_back(l.b.size(), 0.0);
    }
    return g;
}

Gradients backward(const ModelParams& m, const Input& input,
                   const std::vector<double>& loss_grad_wrt_logits) {
    if (static_cast<int>(loss_grad_wrt_logits.size()) != m.dims.num_classes)
        throw ValidationError("backward: loss gradient length mismatch");

    ForwardTrace trace;
    forward(m, input, &trace);

    Gradients g = zero_gradients(m);
    std::vector<double> grad_out = loss_grad_wrt_logits;

    for (size_t li = m.layers.size(); li-- > 0;) {
        const DenseLayer& l = m.layers[li];
        const std::vector<double>& a = trace.layer_inputs[li];

        // tanh derivative for hidden layers (output layer is linear)
        if (li + 1 < m.layers.size()) {
            const std::vector<double>& h = trace.layer_outputs[li];
            for (size_t j = 0; j < grad_out.size(); ++j) grad_out[j] *= 1.0 - h[j] * h[j];
        }

        kernels::axpy(1.0, grad_out.data(), g.b[li].data(), grad_out.size());
        std::vector<double> grad_in(static_cast<size_t>(l.in));
        for (int i = 0; i < l.in; ++i) {
            const double* w_row = l.W.data() + static_cast<size_t>(i) * l.out;
            kernels::axpy(a[static_cast<size_t>(i)], grad_out.data(),
                          g.W[li].data() + static_cast<size_t>(i) * l.out, grad_out.size());
            grad_in[static_cast<size_t>(i)] = kernels::dot(w_row, grad_out.data(), grad_out.size());
        }
        grad_out = std::move(grad_in);
    }

    if (m.arch == Arch::Boe) {
        double inv = 1.0 / static_cast<double>(trace.token_ids.size());
        for (int id : trace.token_ids) {
            kernels::axpy(inv, grad_out.data(),
                          g.embedding.data() + static_cast<size_t>(id) * m.dims.embed_dim,
                          grad_out.size());
        }
    }
    return g;
}

void sgd_step(ModelParams& m, const Gradients& g, double lr) {
    if (!g.finite()) throw NumericError("sgd_step: non-finite gradient");
    kernels::axpy(-lr, g.embedding.data(), m.embedding.data(), m.embedding.size());
    for (size_t l = 0; l < m.layers.size(); ++l) {
        if (g.W[l].size() != m.layers[l].W.size() || g.b[l].size() != m.layers[l].b.size())
            throw ValidationError("sgd_step: gradient shape mismatch");
        kernels::axpy(-lr, g.W[l].data(), m.layers[l].W.data(), m.layers[l].W.size());
        kernels::axpy(-lr, g.b[l].data(), m.layers[l].b.data(), m.layers[l].b.size());
    }
}

double lr_at(const LrSchedule& s, uint64_t step) {
    if (s.total_steps == 0) throw ConfigError("lr schedule: total_steps must be positive");
    if (s.warmup_ratio < 0.0 || s.warmup_ratio >= 1.0)
        throw ConfigError("lr schedule: warmup_ratio out of [0,1)");
    if (step > s.total_steps) throw ConfigError("lr schedule: step beyond total_steps");

    uint64_t warmup = static_cast<uint64_t>(s.warmup_ratio * static_cast<double>(s.total_steps));
    if (warmup > 0 && step < warmup) {
        return s.base_lr * static_cast<double>(step) / static_cast<double>(warmup);
    }
    return s.base_lr * static_cast<double>(s.total_steps - step) /
           static_cast<double>(s.total_steps - warmup);
}

void save_model(const ModelParams& m, const std::string& path) {
    json j;
    j["arch"] = m.arch == Arch::Boe ? "boe" : "mlp";
    j["dims"] = {{"vocab_size", m.dims.vocab_size}, {"embed_dim", m.dims.embed_dim},
                 {"input_dim", m.dims.input_dim},   {"hidden", m.dims.hidden},
                 {"num_classes", m.dims.num_classes}};
    // sorted for byte-stable output
    std::vector<std::pair<std::string, int>> vocab(m.vocab.begin(), m.vocab.end());
    std::sort(vocab.begin(), vocab.end());
    json jv = json::array();
    for (const auto& [w, i] : vocab) jv.push_back({w, i});
    j["vocab"] = std::move(jv);
    j["embedding"] = m.embedding;
    json jl = json::array();
    for (const auto& l : m.layers) {
        jl.push_back({{"in", l.in}, {"out", l.out}, {"W", l.W}, {"b", l.b}});
    }
    j["layers"] = std::move(jl);

    std::ofstream f(path);
    if (!f) throw IoError("cannot write checkpoint: " + path);
    f << j.dump() << "\n";
}

ModelParams load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open checkpoint: " + path);
    json j = json::parse(f, nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed checkpoint: " + path);

    ModelParams m;
    m.arch = j.at("arch").get<std::string>() == "boe" ? Arch::Boe : Arch::Mlp;
    const json& d = j.at("dims");
    m.dims.vocab_size = d.at("vocab_size").get<int>();
    m.dims.embed_dim = d.at("embed_dim").get<int>();
    m.dims.input_dim = d.at("input_dim").get<int>();
    m.dims.hidden = d.at("hidden").get<std::vector<int>>();
    m.dims.num_classes = d.at("num_classes").get<int>();
    for (const auto& entry : j.at("vocab")) {
        m.vocab.emplace(entry[0].get<std::string>(), entry[1].get<int>());
    }
    m.embedding = j.at("embedding").get<std::vector<double>>();
    for (const auto& jlayer : j.at("layers")) {
        DenseLayer l;
        l.in = jlayer.at("in").get<int>();
        l.out = jlayer.at("out").get<int>();
        l.W = jlayer.at("W").get<std::vector<double>>();
        l.b = jlayer.at("b").get<std::vector<double>>();
        if (l.W.size() != static_cast<size_t>(l.in) * l.out || l.b.size() != static_cast<size_t>(l.out))
            throw ValidationError("checkpoint layer shape mismatch: " + path);
        m.layers.push_back(std::move(l));
    }
    return m;
}

}  // namespace glitter

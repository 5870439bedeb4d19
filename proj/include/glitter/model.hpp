#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "glitter/data.hpp"

namespace glitter {

enum class Arch { Boe, Mlp };

struct ModelDims {
    int vocab_size = 0;        // V, incl. the OOV bucket (boe)
    int embed_dim = 0;         // d (boe)
    int input_dim = 0;         // feature dim (mlp)
    std::vector<int> hidden;   // head hidden sizes, may be empty
    int num_classes = 0;       // C
};

// Dense layer, W row-major [in][out]: out_j = b_j + sum_i a_i * W[i*out+j]
struct DenseLayer {
    int in = 0;
    int out = 0;
    std::vector<double> W;
    std::vector<double> b;
};

struct ModelParams {
    Arch arch = Arch::Mlp;
    ModelDims dims;
    std::unordered_map<std::string, int> vocab;  // word -> index; OOV bucket = 0
    std::vector<double> embedding;               // V x d, row-major (boe only)
    std::vector<DenseLayer> layers;              // hidden layers (tanh) + linear output

    size_t param_count() const;
};

struct Prediction {
    std::vector<double> logits;
    std::vector<double> probs;
};

struct Gradients {
    std::vector<double> embedding;
    std::vector<std::vector<double>> W;
    std::vector<std::vector<double>> b;

    void add_scaled(const Gradients& other, double scale);
    bool finite() const;
};

// Frozen copy of a trained model. Parameters are reachable only by const
// reference, so downstream code cannot step it.
class Teacher {
public:
    explicit Teacher(ModelParams params) : params_(std::move(params)) {}
    const ModelParams& params() const { return params_; }

private:
    ModelParams params_;
};

// ---------------------------------------------------------------------------

// Vocabulary from the train split: index 0 is the shared OOV bucket,
// remaining words indexed in first-seen order.
std::unordered_map<std::string, int> build_vocab(const Dataset& ds);

// Glorot-uniform weights, zero biases; deterministic per seed.
// vocab is required for boe and defines dims.vocab_size.
ModelParams init_model(Arch arch, ModelDims dims, uint64_t seed,
                       std::unordered_map<std::string, int> vocab = {});

// Same architecture/dims/vocab, fresh seeded initialization.
ModelParams clone_fresh(const ModelParams& m, uint64_t seed);

// boe: mean embedding of tokens through the head; mlp: features through the
// head. Softmax with max subtraction. `trace` captures activations for backward.
struct ForwardTrace {
    std::vector<int> token_ids;                    // boe
    std::vector<std::vector<double>> layer_inputs; // input to each dense layer
    std::vector<std::vector<double>> layer_outputs;// post-activation outputs
};
Prediction forward(const ModelParams& m, const Input& input, ForwardTrace* trace = nullptr);

inline Prediction forward(const Teacher& t, const Input& input) { return forward(t.params(), input); }

// Exact analytic gradient of the logits . loss_grad path.
Gradients backward(const ModelParams& m, const Input& input,
                   const std::vector<double>& loss_grad_wrt_logits);

Gradients zero_gradients(const ModelParams& m);

// theta <- theta - lr * g. Throws NumericError on non-finite gradients.
void sgd_step(ModelParams& m, const Gradients& g, double lr);

inline Teacher freeze(ModelParams m) { return Teacher(std::move(m)); }

// ---------------------------------------------------------------------------

struct LrSchedule {
    double base_lr = 0.0;
    double warmup_ratio = 0.0;
    uint64_t total_steps = 0;
};

// Linear ramp 0 -> base_lr over floor(warmup_ratio * total_steps) steps,
// then linear decay to 0 at total_steps.
double lr_at(const LrSchedule& schedule, uint64_t step);

// Lossless JSON checkpoint (dims, vocab, flat parameter arrays).
void save_model(const ModelParams& m, const std::string& path);
ModelParams load_model(const std::string& path);

}  // namespace glitter

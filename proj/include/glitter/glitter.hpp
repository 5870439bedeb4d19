#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glitter/losses.hpp"
#include "glitter/model.hpp"
#include "glitter/rng.hpp"

namespace glitter {

// How pool entries are scored for worst-case selection.
enum class EvalTag { GtCe, PredCe, KdKl, Focal, Tilted, Random };

struct EvalMode {
    EvalTag tag = EvalTag::PredCe;
    double gamma = 2.0;  // focal
    double t = 1.0;      // tilted
    double tau = 12.0;   // kd_kl

    void validate(bool has_teacher) const;
};

EvalTag parse_eval_tag(const std::string& s);
std::string eval_tag_name(EvalTag tag);

struct SelectionResult {
    std::string example_id;
    std::vector<int> chosen;     // ordered, distinct, each < K
    std::vector<double> scores;  // all K eval scores (zeros for random)
};

// Scores every pool entry under the current model with no gradient tracking.
//   gt_ce:   CE(y_i, M(x'_k))
//   pred_ce: CE(M(x_i) as soft target, M(x'_k))
//   kd_kl:   KL(T(x'_k), M(x'_k), tau)
//   focal / tilted: analogous per-sample scores against y_i
// score_passes, when given, is incremented once per pool entry forward.
// teacher_entry_logits, when given, replaces live teacher forwards for kd_kl
// (aligned with pool_entries; used with a teacher logit cache).
std::vector<double> score_pool(const ModelParams& m, const Teacher* teacher, const Example& ex,
                               const std::vector<Input>& pool_entries, const EvalMode& mode,
                               uint64_t* score_passes = nullptr,
                               const std::vector<const std::vector<double>*>* teacher_entry_logits = nullptr);

// Indices of the k1 largest scores; ties broken by lower pool index.
// k1 >= K returns all indices in index order. NaN scores are rejected.
SelectionResult select_topk(const std::vector<double>& scores, int k1);

// Glitter-Rnd: k1 distinct uniform indices, deterministic per rng stream.
SelectionResult select_random(int K, int k1, Rng& rng);

}  // namespace glitter

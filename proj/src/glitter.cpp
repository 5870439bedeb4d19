#include "glitter/glitter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "glitter/errors.hpp"

namespace glitter {

void EvalMode::validate(bool has_teacher) const {
    if (tag == EvalTag::KdKl && !has_teacher)
        throw ConfigError("eval mode kd_kl requires a teacher");
    if (tag == EvalTag::Tilted && t == 0.0) throw ConfigError("eval mode tilted: t must be nonzero");
    if (tag == EvalTag::Focal && gamma < 0.0)
        throw ConfigError("eval mode focal: gamma must be nonnegative");
    if (tag == EvalTag::KdKl && tau <= 0.0) throw ConfigError("eval mode kd_kl: tau must be positive");
}

EvalTag parse_eval_tag(const std::string& s) {
    if (s == "gt_ce") return EvalTag::GtCe;
    if (s == "pred_ce") return EvalTag::PredCe;
    if (s == "kd_kl") return EvalTag::KdKl;
    if (s == "focal") return EvalTag::Focal;
    if (s == "tilted") return EvalTag::Tilted;
    if (s == "random") return EvalTag::Random;
    throw ConfigError("unknown eval mode: " + s);
}

std::string eval_tag_name(EvalTag tag) {
    switch (tag) {
        case EvalTag::GtCe: return "gt_ce";
        case EvalTag::PredCe: return "pred_ce";
        case EvalTag::KdKl: return "kd_kl";
        case EvalTag::Focal: return "focal";
        case EvalTag::Tilted: return "tilted";
        case EvalTag::Random: return "random";
    }
    return "?";
}

std::vector<double> score_pool(const ModelParams& m, const Teacher* teacher, const Example& ex,
                               const std::vector<Input>& pool_entries, const EvalMode& mode,
                               uint64_t* score_passes,
                               const std::vector<const std::vector<double>*>* teacher_entry_logits) {
    mode.validate(teacher != nullptr || teacher_entry_logits != nullptr);
    if (teacher_entry_logits && teacher_entry_logits->size() != pool_entries.size())
        throw ValidationError("score_pool: teacher logit list misaligned with pool entries");

    // soft target from the original input, computed once
    std::vector<double> orig_probs;
    if (mode.tag == EvalTag::PredCe) orig_probs = forward(m, ex.input).probs;

    std::vector<double> scores;
    scores.reserve(pool_entries.size());
    for (size_t k = 0; k < pool_entries.size(); ++k) {
        const Input& entry = pool_entries[k];
        Prediction pred = forward(m, entry);
        if (score_passes) ++*score_passes;
        switch (mode.tag) {
            case EvalTag::GtCe:
                scores.push_back(cross_entropy(ex.label, pred).value);
                break;
            case EvalTag::PredCe:
                scores.push_back(cross_entropy(orig_probs, pred).value);
                break;
            case EvalTag::KdKl: {
                const std::vector<double>& t_logits = teacher_entry_logits
                                                          ? *(*teacher_entry_logits)[k]
                                                          : forward(*teacher, entry).logits;
                scores.push_back(kl_divergence(t_logits, pred.logits, mode.tau).value);
                break;
            }
            case EvalTag::Focal:
                scores.push_back(focal_score(ex.label, pred, mode.gamma));
                break;
            case EvalTag::Tilted:
                scores.push_back(tilted_score(ex.label, pred, mode.t));
                break;
            case EvalTag::Random:
                throw ConfigError("score_pool: random mode has no scores; use select_random");
        }
    }
    return scores;
}

SelectionResult select_topk(const std::vector<double>& scores, int k1) {
    if (k1 < 1) throw ConfigError("select_topk: k1 must be >= 1");
    if (scores.empty()) throw ConfigError("select_topk: empty score list");
    for (size_t i = 0; i < scores.size(); ++i) {
        if (std::isnan(scores[i]))
            throw NumericError("select_topk: NaN score at index " + std::to_string(i));
    }

    std::vector<int> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    size_t take = std::min<size_t>(static_cast<size_t>(k1), scores.size());
    // descending score, lower index wins ties
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return scores[static_cast<size_t>(a)] > scores[static_cast<size_t>(b)]; });
    idx.resize(take);
    std::sort(idx.begin(), idx.end());

    SelectionResult result;
    result.chosen = std::move(idx);
    result.scores = scores;
    return result;
}

SelectionResult select_random(int K, int k1, Rng& rng) {
    if (k1 < 1 || k1 > K) throw ConfigError("select_random: need 1 <= k1 <= K");
    std::vector<int> idx(static_cast<size_t>(K));
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    idx.resize(static_cast<size_t>(k1));
    std::sort(idx.begin(), idx.end());

    SelectionResult result;
    result.chosen = std::move(idx);
    result.scores.assign(static_cast<size_t>(K), 0.0);
    return result;
}

}  // namespace glitter

#pragma once

#include <vector>

#include "glitter/model.hpp"

namespace glitter {

// Scalar loss for one input, with its gradient w.r.t. that input's logits.
struct ScalarLoss {
    double value = 0.0;
    std::vector<double> grad;  // d value / d logits
};

// Composite objective over {original} ∪ selected augmentations, with
// per-input logit gradients (aligned: grad_selected[j] belongs to the j-th
// selected prediction).
struct CompositeLoss {
    double value = 0.0;
    std::vector<double> grad_orig;
    std::vector<std::vector<double>> grad_selected;
};

struct KDConfig {
    double alpha = 0.5;
    double tau = 12.0;

    void validate() const;
};

// -(1/1) sum_c target_c log p_c with the fused softmax-CE gradient p - target.
ScalarLoss cross_entropy(int target, const Prediction& pred);
ScalarLoss cross_entropy(const std::vector<double>& target, const Prediction& pred);

// tau^2 * KL(softmax(t/tau) || softmax(s/tau)); gradient w.r.t. student
// logits is tau * (q - p). The tau^2 factor keeps gradient magnitudes
// commensurate with CE at large tau.
ScalarLoss kl_divergence(const std::vector<double>& teacher_logits,
                         const std::vector<double>& student_logits, double tau);

// Selection scores (no gradients; scoring is a no-grad evaluation).
// focal: -(1 - p_y)^gamma * log p_y; gamma = 0 reduces to CE.
double focal_score(int target, const Prediction& pred, double gamma);
// tilted: (exp(t * ce) - 1) / t, a strictly increasing transform of CE.
double tilted_score(int target, const Prediction& pred, double t);

// CE(y, orig) + (1/k1) sum_j CE(y, sel_j); k1 = 0 degrades to plain CE.
CompositeLoss single_task_loss(int y, const Prediction& pred_orig,
                               const std::vector<Prediction>& preds_selected);

// CE(y, orig_now) + (1/k1) sum_j CE(cached_prev, sel_j_now); no gradient
// flows through the cached distribution (stop-gradient).
CompositeLoss ct_task_loss(int y, const Prediction& pred_orig_now,
                           const std::vector<double>& cached_pred_orig_prev,
                           const std::vector<Prediction>& preds_selected_now);

// alpha * CE(y, s_orig) + (1-alpha)/(k1+1) * [KL(t_orig, s_orig) + sum_j KL(t_j, s_j)]
CompositeLoss kd_task_loss(int y, const Prediction& student_orig,
                           const std::vector<double>& teacher_orig_logits,
                           const std::vector<Prediction>& student_selected,
                           const std::vector<std::vector<double>>& teacher_selected_logits,
                           const KDConfig& cfg);

}  // namespace glitter

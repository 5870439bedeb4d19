#include "glitter/losses.hpp"

#include <algorithm>
#include <cmath>

#include "glitter/errors.hpp"

namespace glitter {

void KDConfig::validate() const {
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("kd: alpha out of [0,1]");
    if (tau <= 0.0) throw ConfigError("kd: tau must be positive");
}

namespace {

double safe_log(double p) { return std::log(std::max(p, 1e-300)); }

// log-softmax with max subtraction
std::vector<double> log_softmax(const std::vector<double>& logits, double tau) {
    double mx = *std::max_element(logits.begin(), logits.end()) / tau;
    double z = 0.0;
    std::vector<double> out(logits.size());
    for (size_t i = 0; i < logits.size(); ++i) {
        out[i] = logits[i] / tau - mx;
        z += std::exp(out[i]);
    }
    double logz = std::log(z);
    for (double& v : out) v -= logz;
    return out;
}

void check_target_index(int target, const Prediction& pred) {
    if (target < 0 || static_cast<size_t>(target) >= pred.probs.size())
        throw ValidationError("cross_entropy: target index out of range");
}

}  // namespace

ScalarLoss cross_entropy(int target, const Prediction& pred) {
    check_target_index(target, pred);
    ScalarLoss loss;
    loss.value = -safe_log(pred.probs[static_cast<size_t>(target)]);
    loss.grad = pred.probs;
    loss.grad[static_cast<size_t>(target)] -= 1.0;
    return loss;
}

ScalarLoss cross_entropy(const std::vector<double>& target, const Prediction& pred) {
    if (target.size() != pred.probs.size())
        throw ValidationError("cross_entropy: target length mismatch");
    double sum = 0.0;
    for (double t : target) {
        if (t < 0.0) throw ValidationError("cross_entropy: negative target probability");
        sum += t;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw ValidationError("cross_entropy: target does not sum to 1");

    ScalarLoss loss;
    loss.grad = pred.probs;
    for (size_t c = 0; c < target.size(); ++c) {
        loss.value -= target[c] * safe_log(pred.probs[c]);
        loss.grad[c] -= target[c];
    }
    return loss;
}

ScalarLoss kl_divergence(const std::vector<double>& teacher_logits,
                         const std::vector<double>& student_logits, double tau) {
    if (teacher_logits.size() != student_logits.size())
        throw ValidationError("kl_divergence: logit length mismatch");
    if (tau <= 0.0) throw ConfigError("kl_divergence: tau must be positive");

    std::vector<double> logp = log_softmax(teacher_logits, tau);
    std::vector<double> logq = log_softmax(student_logits, tau);

    ScalarLoss loss;
    loss.grad.resize(student_logits.size());
    for (size_t c = 0; c < logp.size(); ++c) {
        double p = std::exp(logp[c]);
        loss.value += tau * tau * p * (logp[c] - logq[c]);
        loss.grad[c] = tau * (std::exp(logq[c]) - p);
    }
    return loss;
}

double focal_score(int target, const Prediction& pred, double gamma) {
    check_target_index(target, pred);
    if (gamma < 0.0) throw ConfigError("focal: gamma must be nonnegative");
    double p = pred.probs[static_cast<size_t>(target)];
    return -std::pow(1.0 - p, gamma) * safe_log(p);
}

double tilted_score(int target, const Prediction& pred, double t) {
    if (t == 0.0) throw ConfigError("tilted: t must be nonzero");
    double ce = cross_entropy(target, pred).value;
    // clamp the exponent; scores beyond this are far outside any realistic CE
    double e = std::min(t * ce, 700.0);
    return std::expm1(e) / t;
}

CompositeLoss single_task_loss(int y, const Prediction& pred_orig,
                               const std::vector<Prediction>& preds_selected) {
    ScalarLoss orig = cross_entropy(y, pred_orig);
    CompositeLoss loss;
    loss.value = orig.value;
    loss.grad_orig = std::move(orig.grad);
    if (!preds_selected.empty()) {
        double w = 1.0 / static_cast<double>(preds_selected.size());
        for (const auto& pred : preds_selected) {
            ScalarLoss term = cross_entropy(y, pred);
            loss.value += w * term.value;
            for (double& g : term.grad) g *= w;
            loss.grad_selected.push_back(std::move(term.grad));
        }
    }
    return loss;
}

CompositeLoss ct_task_loss(int y, const Prediction& pred_orig_now,
                           const std::vector<double>& cached_pred_orig_prev,
                           const std::vector<Prediction>& preds_selected_now) {
    ScalarLoss orig = cross_entropy(y, pred_orig_now);
    CompositeLoss loss;
    loss.value = orig.value;
    loss.grad_orig = std::move(orig.grad);
    if (!preds_selected_now.empty()) {
        double w = 1.0 / static_cast<double>(preds_selected_now.size());
        for (const auto& pred : preds_selected_now) {
            ScalarLoss term = cross_entropy(cached_pred_orig_prev, pred);
            loss.value += w * term.value;
            for (double& g : term.grad) g *= w;
            loss.grad_selected.push_back(std::move(term.grad));
        }
    }
    return loss;
}

CompositeLoss kd_task_loss(int y, const Prediction& student_orig,
                           const std::vector<double>& teacher_orig_logits,
                           const std::vector<Prediction>& student_selected,
                           const std::vector<std::vector<double>>& teacher_selected_logits,
                           const KDConfig& cfg) {
    cfg.validate();
    if (student_selected.size() != teacher_selected_logits.size())
        throw ValidationError("kd_task_loss: student/teacher selection size mismatch");

    size_t k1 = student_selected.size();
    double kd_w = (1.0 - cfg.alpha) / static_cast<double>(k1 + 1);

    ScalarLoss ce = cross_entropy(y, student_orig);
    ScalarLoss kl_orig = kl_divergence(teacher_orig_logits, student_orig.logits, cfg.tau);

    CompositeLoss loss;
    loss.value = cfg.alpha * ce.value + kd_w * kl_orig.value;
    loss.grad_orig.resize(ce.grad.size());
    for (size_t c = 0; c < ce.grad.size(); ++c) {
        loss.grad_orig[c] = cfg.alpha * ce.grad[c] + kd_w * kl_orig.grad[c];
    }
    for (size_t j = 0; j < k1; ++j) {
        ScalarLoss kl = kl_divergence(teacher_selected_logits[j], student_selected[j].logits, cfg.tau);
        loss.value += kd_w * kl.value;
        for (double& g : kl.grad) g *= kd_w;
        loss.grad_selected.push_back(std::move(kl.grad));
    }
    return loss;
}

}  // namespace glitter

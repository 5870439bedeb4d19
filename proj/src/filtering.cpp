#include "glitter/filtering.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>

#include "glitter/errors.hpp"

namespace glitter {

size_t FilterResult::total_before() const {
    size_t n = 0;
    for (const auto& r : report) n += r.before;
    return n;
}

size_t FilterResult::total_after() const {
    size_t n = 0;
    for (const auto& r : report) n += r.after;
    return n;
}

namespace {

// lower class index wins ties
int argmax_class(const std::vector<double>& probs) {
    return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

FilterResult apply_filter(const AugmentPool& pool, const Dataset& ds,
                          const std::function<bool(const Example&, const Input&)>& keep) {
    FilterResult result;
    result.pool.K = pool.K;
    result.pool.ragged = true;
    for (const auto& ex : ds.examples) {
        auto it = pool.entries.find(ex.id);
        if (it == pool.entries.end()) continue;
        std::vector<Input> kept;
        for (const Input& entry : it->second) {
            if (keep(ex, entry)) kept.push_back(entry);
        }
        result.report.push_back({ex.id, it->second.size(), kept.size()});
        result.pool.entries.emplace(ex.id, std::move(kept));
    }
    return result;
}

}  // namespace

FilterResult confidence_filter(const AugmentPool& pool, const ModelParams& m, const Dataset& ds,
                               double beta) {
    if (beta < 0.0) throw ConfigError("confidence_filter: beta must be nonnegative");
    FilterResult result = apply_filter(pool, ds, [&](const Example&, const Input& entry) {
        const std::vector<double>& p = forward(m, entry).probs;
        return *std::max_element(p.begin(), p.end()) >= beta;
    });
    if (result.total_after() == 0) {
        std::cerr << "warning: confidence filter with beta=" << beta << " retained no entries\n";
    }
    return result;
}

FilterResult label_preserving_filter(const AugmentPool& pool, const ModelParams& m,
                                     const Dataset& ds) {
    return apply_filter(pool, ds, [&](const Example& ex, const Input& entry) {
        return argmax_class(forward(m, entry).probs) == argmax_class(forward(m, ex.input).probs);
    });
}

void write_retention_report(const std::vector<RetentionRow>& report, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write retention report: " + path);
    f << "id,before,after\n";
    for (const auto& r : report) f << r.id << "," << r.before << "," << r.after << "\n";
}

}  // namespace glitter

#pragma once

#include <string>
#include <vector>

#include "glitter/data.hpp"
#include "glitter/model.hpp"

namespace glitter {

enum class FilterKind { Confidence, LabelPreserving };

struct FilterConfig {
    FilterKind kind = FilterKind::Confidence;
    double beta = 0.7;  // confidence only
};

// Per-example retention counts, emitted as a CSV report.
struct RetentionRow {
    std::string id;
    size_t before = 0;
    size_t after = 0;
};

struct FilterResult {
    AugmentPool pool;  // ragged: per-example counts may vary
    std::vector<RetentionRow> report;

    size_t total_before() const;
    size_t total_after() const;
};

// Keeps x'_k(i) iff max_c p(c | x'_k) >= beta.
FilterResult confidence_filter(const AugmentPool& pool, const ModelParams& m, const Dataset& ds,
                               double beta);

// Keeps x'_k(i) iff argmax p(. | x'_k) == argmax p(. | x_i); argmax ties
// broken by lower class index.
FilterResult label_preserving_filter(const AugmentPool& pool, const ModelParams& m,
                                     const Dataset& ds);

// CSV: id, before, after
void write_retention_report(const std::vector<RetentionRow>& report, const std::string& path);

}  // namespace glitter

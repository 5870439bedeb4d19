#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glitter/data.hpp"
#include "glitter/training.hpp"

namespace glitter {

// Accuracy-versus-wall-time sweep over augmentation sizes.
struct SweepSpec {
    std::vector<int> vanilla_sizes;              // Vanilla-DA at each K
    std::vector<std::pair<int, int>> glitter_points;  // (K, k1)
    std::vector<uint64_t> seeds;
    TrainConfig base;  // regime/k1 fields overridden per point

    void validate(int max_K) const;
};

struct SweepRow {
    std::string regime;
    int K = 0;
    int k1 = 0;
    uint64_t seed = 0;
    double median_epoch_seconds = 0.0;  // over epochs 2..E (all epochs if E == 1)
    double final_dev_accuracy = 0.0;
    uint64_t grad_passes_per_epoch = 0;
    uint64_t score_passes_per_epoch = 0;
    std::string error;  // non-empty when the run failed
};

struct SweepReport {
    std::vector<SweepRow> rows;
};

// Trains every (point x seed); sub-K pools are prefix truncations of `pool`.
// Run failures are recorded per row and the sweep continues.
SweepReport run_sweep(const Dataset& ds, const AugmentPool& pool, const Dataset* dev,
                      const SweepSpec& spec);

// Stable column order; re-emitting the same report is byte-identical.
void emit_report(const SweepReport& report, const std::string& path);

}  // namespace glitter

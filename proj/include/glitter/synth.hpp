#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "glitter/augment.hpp"
#include "glitter/data.hpp"

namespace glitter {

// Desk-scale reference tasks.
//   separable: 2-class Gaussian blobs with a wide margin; perturb pool.
//   noisy-aug: 3-class blobs where `corrupt_fraction` of pool entries are
//              drawn from a wrong-class blob (label-corrupting stress case).
//   text-toy:  2-class keyword-driven sentences with an EDA pool.
struct SynthSpec {
    std::string preset = "noisy-aug";
    size_t n = 500;       // train size
    size_t n_dev = 0;     // 0 -> n / 5, at least 50
    int K = 8;
    double corrupt_fraction = 0.25;  // noisy-aug
    uint64_t seed = 0;
};

struct SynthOutput {
    Dataset train;
    Dataset dev;
    AugmentPool pool;
    // (id, aug_index) of label-corrupting entries, noisy-aug only
    std::vector<std::pair<std::string, int>> corrupted;
};

SynthOutput make_synth(const SynthSpec& spec);

// Writes train.jsonl, dev.jsonl, pool.jsonl and (noisy-aug) manifest.json
// into out_dir. Deterministic: same spec, same bytes.
void write_synth(const SynthOutput& out, const std::string& out_dir);

}  // namespace glitter

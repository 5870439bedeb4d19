#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace glitter {

enum class Modality { Text, Features };

// One model input: either raw text (tokenized downstream) or a dense
// feature vector. Exactly one side is populated, per `modality`.
struct Input {
    Modality modality = Modality::Text;
    std::string text;
    std::vector<double> features;

    bool empty() const {
        return modality == Modality::Text ? text.empty() : features.empty();
    }
};

struct Example {
    std::string id;
    Input input;
    int label = 0;
};

enum class Split { Train, Dev, Test };

struct Dataset {
    std::vector<Example> examples;
    int num_classes = 0;
    Split split = Split::Train;

    size_t size() const { return examples.size(); }
    Modality modality() const { return examples.empty() ? Modality::Text : examples[0].input.modality; }
};

// Per-example augmentation pool, keyed by example id, ordered by aug_index.
// `ragged` marks pools loaded with relaxed cardinality (post-filtering);
// strict pools have exactly K entries per train example.
struct AugmentPool {
    std::unordered_map<std::string, std::vector<Input>> entries;
    int K = 0;
    bool ragged = false;

    size_t total_entries() const {
        size_t n = 0;
        for (const auto& [id, v] : entries) n += v.size();
        return n;
    }
};

struct Batch {
    std::vector<const Example*> originals;
    // aligned with originals; null when training without a pool
    std::vector<const std::vector<Input>*> pools;
};

// ---------------------------------------------------------------------------
// JSONL ingestion / serialization

// One JSON object per line: {"id", "text"|"features", "label"}; an optional
// meta line {"num_classes": C} may appear anywhere. C is inferred as
// max(label)+1 when undeclared.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

// Pool lines: {"id", "aug_index", "text"|"features"}. With strict=true every
// train id must have exactly expected_K entries; relaxed loading (strict=false)
// accepts ragged per-id counts, as produced by the pool filters.
AugmentPool load_pool(const std::string& path, const Dataset& ds, int expected_K,
                      bool strict = true);
void save_pool(const AugmentPool& pool, const std::string& path);

// Truncates every per-example list to its first `k` entries (prefix-stable
// sub-pool used by the bench sweep). Requires k <= per-example count.
AugmentPool truncate_pool(const AugmentPool& pool, int k);

// ---------------------------------------------------------------------------
// Batching

// Seeded per-epoch permutation; a pure function of (epoch_seed, epoch).
// The short final batch is kept. pool may be null.
std::vector<Batch> make_batches(const Dataset& ds, const AugmentPool* pool,
                                size_t batch_size, uint64_t epoch_seed, uint64_t epoch);

}  // namespace glitter

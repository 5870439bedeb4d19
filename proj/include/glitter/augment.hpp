#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "glitter/data.hpp"

namespace glitter {

enum class AugmentMethod { Eda, Perturb };

struct AugmentConfig {
    AugmentMethod method = AugmentMethod::Eda;
    int K = 8;
    double synonym_rate = 0.05;       // fraction of tokens replaced, rounded up
    double deletion_rate_max = 0.10;  // per-variant deletion fraction ~ U(0, max)
    double noise_scale = 0.1;         // perturb mode
    uint64_t seed = 0;

    void validate() const;
};

// word -> synonyms; no word maps to itself, lists non-empty
struct Lexicon {
    std::unordered_map<std::string, std::vector<std::string>> synonyms;

    const std::vector<std::string>* find(const std::string& word) const {
        auto it = synonyms.find(word);
        return it == synonyms.end() ? nullptr : &it->second;
    }
};

// File format: `word<TAB>syn1,syn2,...` per line, UTF-8.
Lexicon load_lexicon(const std::string& path);

// EDA-style text augmentation: per variant, ceil(synonym_rate*T) tokens with
// lexicon entries are replaced by a uniformly sampled synonym, then a deletion
// fraction d ~ U(0, deletion_rate_max) removes floor(d*T) tokens. At least one
// token always survives. Deterministic per (cfg.seed, ex.id, k).
std::vector<Input> eda_augment(const Example& ex, const AugmentConfig& cfg, const Lexicon& lex);

// Synthetic analog: variant_k = features + noise_scale * g_k with g_k a seeded
// standard Gaussian vector, deterministic per (cfg.seed, ex.id, k).
std::vector<Input> perturb_augment(const Example& ex, const AugmentConfig& cfg);

// Materializes a full pool; pure function of (ds, cfg, lex).
AugmentPool build_pool(const Dataset& ds, const AugmentConfig& cfg, const Lexicon* lex = nullptr);

}  // namespace glitter

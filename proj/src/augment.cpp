#include "glitter/augment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "glitter/errors.hpp"
#include "glitter/rng.hpp"
#include "glitter/text.hpp"

namespace glitter {

void AugmentConfig::validate() const {
    if (K < 1) throw ConfigError("augment: K must be >= 1");
    if (synonym_rate < 0.0 || synonym_rate > 1.0) throw ConfigError("augment: synonym_rate out of [0,1]");
    if (deletion_rate_max < 0.0 || deletion_rate_max > 1.0)
        throw ConfigError("augment: deletion_rate_max out of [0,1]");
    if (noise_scale < 0.0) throw ConfigError("augment: noise_scale must be nonnegative");
}

Lexicon load_lexicon(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open lexicon file: " + path);
    Lexicon lex;
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected word<TAB>synonyms");
        }
        std::string word = line.substr(0, tab);
        std::vector<std::string> syns;
        std::string rest = line.substr(tab + 1);
        size_t start = 0;
        while (start <= rest.size()) {
            size_t comma = rest.find(',', start);
            std::string syn = rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            if (!syn.empty()) {
                if (syn == word) {
                    throw ValidationError(path + ":" + std::to_string(lineno) + ": word \"" + word +
                                          "\" maps to itself");
                }
                syns.push_back(std::move(syn));
            }
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (syns.empty()) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": empty synonym list");
        }
        lex.synonyms[std::move(word)] = std::move(syns);
    }
    return lex;
}

namespace {

// distinct uniform draws: shuffle candidate indices, take the first n
std::vector<size_t> sample_distinct(std::vector<size_t> candidates, size_t n, Rng& rng) {
    rng.shuffle(candidates);
    candidates.resize(std::min(n, candidates.size()));
    return candidates;
}

std::string eda_variant(const std::vector<std::string>& tokens, const AugmentConfig& cfg,
                        const Lexicon& lex, Rng& rng) {
    std::vector<std::string> out = tokens;
    size_t T = out.size();

    // synonym replacement
    if (cfg.synonym_rate > 0.0) {
        size_t n_rep = static_cast<size_t>(std::ceil(cfg.synonym_rate * static_cast<double>(T)));
        std::vector<size_t> eligible;
        for (size_t i = 0; i < T; ++i) {
            if (lex.find(out[i])) eligible.push_back(i);
        }
        for (size_t i : sample_distinct(std::move(eligible), n_rep, rng)) {
            const auto& syns = *lex.find(out[i]);
            out[i] = syns[rng.next_below(syns.size())];
        }
    }

    // random deletion, resampled fraction per variant, survival floor of 1 token
    if (cfg.deletion_rate_max > 0.0 && T > 1) {
        double d = rng.next_unit() * cfg.deletion_rate_max;
        size_t n_del = static_cast<size_t>(std::floor(d * static_cast<double>(T)));
        n_del = std::min(n_del, T - 1);
        if (n_del > 0) {
            std::vector<size_t> all(T);
            for (size_t i = 0; i < T; ++i) all[i] = i;
            std::vector<size_t> doomed = sample_distinct(std::move(all), n_del, rng);
            std::sort(doomed.begin(), doomed.end(), std::greater<>());
            for (size_t i : doomed) out.erase(out.begin() + static_cast<long>(i));
        }
    }
    return join_tokens(out);
}

}  // namespace

std::vector<Input> eda_augment(const Example& ex, const AugmentConfig& cfg, const Lexicon& lex) {
    cfg.validate();
    if (ex.input.modality != Modality::Text) throw ValidationError("eda_augment: example is not text");
    std::vector<std::string> tokens = tokenize(ex.input.text);
    if (tokens.empty()) throw ValidationError("eda_augment: empty text for id \"" + ex.id + "\"");

    std::vector<Input> variants;
    variants.reserve(static_cast<size_t>(cfg.K));
    for (int k = 0; k < cfg.K; ++k) {
        Rng rng(stream_seed(cfg.seed, ex.id, static_cast<uint64_t>(k)));
        Input v;
        v.modality = Modality::Text;
        v.text = eda_variant(tokens, cfg, lex, rng);
        variants.push_back(std::move(v));
    }
    return variants;
}

std::vector<Input> perturb_augment(const Example& ex, const AugmentConfig& cfg) {
    cfg.validate();
    if (ex.input.modality != Modality::Features)
        throw ValidationError("perturb_augment: example is not a feature vector");

    std::vector<Input> variants;
    variants.reserve(static_cast<size_t>(cfg.K));
    for (int k = 0; k < cfg.K; ++k) {
        Rng rng(stream_seed(cfg.seed, ex.id, static_cast<uint64_t>(k)));
        Input v;
        v.modality = Modality::Features;
        v.features = ex.input.features;
        for (double& x : v.features) x += cfg.noise_scale * rng.next_gaussian();
        variants.push_back(std::move(v));
    }
    return variants;
}

AugmentPool build_pool(const Dataset& ds, const AugmentConfig& cfg, const Lexicon* lex) {
    cfg.validate();
    if (cfg.method == AugmentMethod::Eda && !lex) throw ConfigError("build_pool: eda requires a lexicon");

    AugmentPool pool;
    pool.K = cfg.K;
    for (const auto& ex : ds.examples) {
        try {
            pool.entries.emplace(ex.id, cfg.method == AugmentMethod::Eda ? eda_augment(ex, cfg, *lex)
                                                                         : perturb_augment(ex, cfg));
        } catch (const Error& e) {
            throw ValidationError("build_pool: id \"" + ex.id + "\": " + e.what());
        }
    }
    return pool;
}

}  // namespace glitter

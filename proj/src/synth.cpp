#include "glitter/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "glitter/errors.hpp"
#include "glitter/rng.hpp"
#include "glitter/text.hpp"

namespace glitter {

using nlohmann::json;

namespace {

constexpr int kFeatureDim = 4;

std::string train_id(size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "ex-%05zu", i);
    return buf;
}

std::string dev_id(size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "dev-%05zu", i);
    return buf;
}

std::vector<double> blob_sample(const std::vector<double>& center, double stddev, Rng& rng) {
    std::vector<double> x(center.size());
    for (size_t d = 0; d < x.size(); ++d) x[d] = center[d] + stddev * rng.next_gaussian();
    return x;
}

Example feature_example(std::string id, std::vector<double> features, int label) {
    Example ex;
    ex.id = std::move(id);
    ex.input.modality = Modality::Features;
    ex.input.features = std::move(features);
    ex.label = label;
    return ex;
}

// --------------------------------------------------------------------------
// separable: two blobs far apart, perturb pool

SynthOutput make_separable(const SynthSpec& spec, size_t n_dev) {
    const std::vector<std::vector<double>> centers = {{3.0, 0.0, 0.0, 0.0}, {-3.0, 0.0, 0.0, 0.0}};
    const double blob_std = 0.5;

    SynthOutput out;
    out.train.num_classes = 2;
    out.dev.num_classes = 2;
    out.dev.split = Split::Dev;
    for (size_t i = 0; i < spec.n; ++i) {
        int label = static_cast<int>(i % 2);
        Rng rng(stream_seed(spec.seed, "separable.train", i));
        out.train.examples.push_back(
            feature_example(train_id(i), blob_sample(centers[static_cast<size_t>(label)], blob_std, rng), label));
    }
    for (size_t i = 0; i < n_dev; ++i) {
        int label = static_cast<int>(i % 2);
        Rng rng(stream_seed(spec.seed, "separable.dev", i));
        out.dev.examples.push_back(
            feature_example(dev_id(i), blob_sample(centers[static_cast<size_t>(label)], blob_std, rng), label));
    }

    AugmentConfig acfg;
    acfg.method = AugmentMethod::Perturb;
    acfg.K = spec.K;
    acfg.noise_scale = 0.2;
    acfg.seed = stream_seed(spec.seed, "separable.pool");
    out.pool = build_pool(out.train, acfg);
    return out;
}

// --------------------------------------------------------------------------
// noisy-aug: three blobs; a fixed count of pool entries drawn from a
// wrong-class blob while inheriting the original label

SynthOutput make_noisy_aug(const SynthSpec& spec, size_t n_dev) {
    const std::vector<std::vector<double>> centers = {
        {2.5, 0.0, 0.0, 0.0}, {0.0, 2.5, 0.0, 0.0}, {0.0, 0.0, 2.5, 0.0}};
    const double blob_std = 0.7;
    const double clean_aug_std = 0.35;

    SynthOutput out;
    out.train.num_classes = 3;
    out.dev.num_classes = 3;
    out.dev.split = Split::Dev;
    for (size_t i = 0; i < spec.n; ++i) {
        int label = static_cast<int>(i % 3);
        Rng rng(stream_seed(spec.seed, "noisy.train", i));
        out.train.examples.push_back(
            feature_example(train_id(i), blob_sample(centers[static_cast<size_t>(label)], blob_std, rng), label));
    }
    for (size_t i = 0; i < n_dev; ++i) {
        int label = static_cast<int>(i % 3);
        Rng rng(stream_seed(spec.seed, "noisy.dev", i));
        out.dev.examples.push_back(
            feature_example(dev_id(i), blob_sample(centers[static_cast<size_t>(label)], blob_std, rng), label));
    }

    // exactly floor(fraction * N * K) corrupted slots, chosen uniformly
    size_t total_slots = spec.n * static_cast<size_t>(spec.K);
    size_t n_corrupt = static_cast<size_t>(std::floor(spec.corrupt_fraction * static_cast<double>(total_slots)));
    std::vector<size_t> slots(total_slots);
    for (size_t s = 0; s < total_slots; ++s) slots[s] = s;
    Rng slot_rng(stream_seed(spec.seed, "noisy.slots"));
    slot_rng.shuffle(slots);
    std::vector<bool> corrupt(total_slots, false);
    for (size_t s = 0; s < n_corrupt; ++s) corrupt[slots[s]] = true;

    out.pool.K = spec.K;
    for (size_t i = 0; i < spec.n; ++i) {
        const Example& ex = out.train.examples[i];
        std::vector<Input> entries;
        for (int k = 0; k < spec.K; ++k) {
            Rng rng(stream_seed(spec.seed, "noisy.pool." + ex.id, static_cast<uint64_t>(k)));
            Input in;
            in.modality = Modality::Features;
            size_t slot = i * static_cast<size_t>(spec.K) + static_cast<size_t>(k);
            if (corrupt[slot]) {
                // wrong-class blob, uniformly among the other two classes
                int wrong = (ex.label + 1 + static_cast<int>(rng.next_below(2))) % 3;
                in.features = blob_sample(centers[static_cast<size_t>(wrong)], blob_std, rng);
                out.corrupted.emplace_back(ex.id, k);
            } else {
                in.features = ex.input.features;
                for (double& x : in.features) x += clean_aug_std * rng.next_gaussian();
            }
            entries.push_back(std::move(in));
        }
        out.pool.entries.emplace(ex.id, std::move(entries));
    }
    std::sort(out.corrupted.begin(), out.corrupted.end());
    return out;
}

// --------------------------------------------------------------------------
// text-toy: keyword-driven two-class sentences with an EDA pool

const std::vector<std::string> kPositive = {"good", "great", "happy", "bright", "win"};
const std::vector<std::string> kNegative = {"bad", "awful", "sad", "dark", "lose"};
const std::vector<std::string> kFiller = {"the", "day",  "was",  "very", "it",
                                          "a",   "really", "quite", "time", "felt"};

Lexicon text_toy_lexicon() {
    Lexicon lex;
    // label-preserving synonyms: within-class keywords and filler variants
    lex.synonyms["good"] = {"great", "fine"};
    lex.synonyms["great"] = {"good", "grand"};
    lex.synonyms["happy"] = {"glad", "cheerful"};
    lex.synonyms["bright"] = {"sunny", "shining"};
    lex.synonyms["win"] = {"triumph", "succeed"};
    lex.synonyms["bad"] = {"awful", "poor"};
    lex.synonyms["awful"] = {"bad", "dreadful"};
    lex.synonyms["sad"] = {"gloomy", "unhappy"};
    lex.synonyms["dark"] = {"dim", "murky"};
    lex.synonyms["lose"] = {"fail", "falter"};
    lex.synonyms["very"] = {"really", "quite"};
    lex.synonyms["really"] = {"very", "truly"};
    lex.synonyms["quite"] = {"rather", "fairly"};
    lex.synonyms["day"] = {"morning", "evening"};
    lex.synonyms["time"] = {"moment", "hour"};
    lex.synonyms["felt"] = {"seemed", "appeared"};
    return lex;
}

std::string text_toy_sentence(int label, Rng& rng) {
    const auto& keywords = label == 0 ? kPositive : kNegative;
    std::vector<std::string> tokens;
    size_t n_keywords = 2 + rng.next_below(2);  // 2 or 3
    for (size_t t = 0; t < 10; ++t) {
        if (t < n_keywords) {
            tokens.push_back(keywords[rng.next_below(keywords.size())]);
        } else {
            tokens.push_back(kFiller[rng.next_below(kFiller.size())]);
        }
    }
    rng.shuffle(tokens);
    return join_tokens(tokens);
}

SynthOutput make_text_toy(const SynthSpec& spec, size_t n_dev) {
    SynthOutput out;
    out.train.num_classes = 2;
    out.dev.num_classes = 2;
    out.dev.split = Split::Dev;
    for (size_t i = 0; i < spec.n; ++i) {
        int label = static_cast<int>(i % 2);
        Rng rng(stream_seed(spec.seed, "text.train", i));
        Example ex;
        ex.id = train_id(i);
        ex.label = label;
        ex.input.modality = Modality::Text;
        ex.input.text = text_toy_sentence(label, rng);
        out.train.examples.push_back(std::move(ex));
    }
    for (size_t i = 0; i < n_dev; ++i) {
        int label = static_cast<int>(i % 2);
        Rng rng(stream_seed(spec.seed, "text.dev", i));
        Example ex;
        ex.id = dev_id(i);
        ex.label = label;
        ex.input.modality = Modality::Text;
        ex.input.text = text_toy_sentence(label, rng);
        out.dev.examples.push_back(std::move(ex));
    }

    AugmentConfig acfg;
    acfg.method = AugmentMethod::Eda;
    acfg.K = spec.K;
    acfg.seed = stream_seed(spec.seed, "text.pool");
    Lexicon lex = text_toy_lexicon();
    out.pool = build_pool(out.train, acfg, &lex);
    return out;
}

}  // namespace

SynthOutput make_synth(const SynthSpec& spec) {
    if (spec.n == 0) throw ConfigError("synth: n must be positive");
    if (spec.K < 1) throw ConfigError("synth: K must be >= 1");
    if (spec.corrupt_fraction < 0.0 || spec.corrupt_fraction > 1.0)
        throw ConfigError("synth: corrupt_fraction out of [0,1]");
    size_t n_dev = spec.n_dev > 0 ? spec.n_dev : std::max<size_t>(50, spec.n / 5);

    if (spec.preset == "separable") return make_separable(spec, n_dev);
    if (spec.preset == "noisy-aug") return make_noisy_aug(spec, n_dev);
    if (spec.preset == "text-toy") return make_text_toy(spec, n_dev);
    throw ConfigError("unknown synth preset: " + spec.preset);
}

void write_synth(const SynthOutput& out, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    save_dataset(out.train, out_dir + "/train.jsonl");
    save_dataset(out.dev, out_dir + "/dev.jsonl");
    save_pool(out.pool, out_dir + "/pool.jsonl");
    if (!out.corrupted.empty()) {
        json manifest;
        manifest["corrupted_count"] = out.corrupted.size();
        json list = json::array();
        for (const auto& [id, k] : out.corrupted) list.push_back({id, k});
        manifest["corrupted"] = std::move(list);
        std::ofstream f(out_dir + "/manifest.json");
        if (!f) throw IoError("cannot write manifest: " + out_dir + "/manifest.json");
        f << manifest.dump(2) << "\n";
    }
}

}  // namespace glitter

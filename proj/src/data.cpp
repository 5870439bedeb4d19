#include "glitter/data.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "glitter/errors.hpp"
#include "glitter/rng.hpp"

namespace glitter {

using nlohmann::json;

namespace {

json parse_line(const std::string& line, size_t lineno, const std::string& path) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": malformed JSON line");
    }
    return j;
}

Input input_from_json(const json& j, size_t lineno, const std::string& path) {
    Input in;
    bool has_text = j.contains("text");
    bool has_feat = j.contains("features");
    if (has_text == has_feat) {
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": expected exactly one of \"text\" or \"features\"");
    }
    if (has_text) {
        if (!j["text"].is_string())
            throw ParseError(path + ":" + std::to_string(lineno) + ": \"text\" must be a string");
        in.modality = Modality::Text;
        in.text = j["text"].get<std::string>();
    } else {
        if (!j["features"].is_array())
            throw ParseError(path + ":" + std::to_string(lineno) + ": \"features\" must be an array");
        in.modality = Modality::Features;
        for (const auto& v : j["features"]) {
            if (!v.is_number())
                throw ParseError(path + ":" + std::to_string(lineno) + ": non-numeric feature");
            in.features.push_back(v.get<double>());
        }
    }
    if (in.empty()) {
        throw ValidationError(path + ":" + std::to_string(lineno) + ": empty input");
    }
    return in;
}

json input_to_json(const Input& in) {
    json j;
    if (in.modality == Modality::Text) {
        j["text"] = in.text;
    } else {
        j["features"] = in.features;
    }
    return j;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open dataset file: " + path);

    Dataset ds;
    int declared_C = 0;
    int max_label = -1;
    std::set<std::string> seen_ids;
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = parse_line(line, lineno, path);
        if (!j.contains("id")) {
            // meta line
            if (j.contains("num_classes")) {
                declared_C = j["num_classes"].get<int>();
                continue;
            }
            throw ParseError(path + ":" + std::to_string(lineno) + ": missing \"id\"");
        }
        Example ex;
        ex.id = j["id"].get<std::string>();
        if (!j.contains("label")) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": missing \"label\"");
        }
        ex.label = j["label"].get<int>();
        ex.input = input_from_json(j, lineno, path);
        if (ex.label < 0) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": negative label");
        }
        if (!seen_ids.insert(ex.id).second) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": duplicate id \"" + ex.id + "\"");
        }
        if (!ds.examples.empty() && ex.input.modality != ds.examples[0].input.modality) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": mixed modalities in dataset");
        }
        max_label = std::max(max_label, ex.label);
        ds.examples.push_back(std::move(ex));
    }
    if (ds.examples.empty()) throw ValidationError("empty dataset: " + path);
    ds.num_classes = declared_C > 0 ? declared_C : max_label + 1;
    if (max_label >= ds.num_classes) {
        throw ValidationError(path + ": label " + std::to_string(max_label) +
                              " out of range for num_classes=" + std::to_string(ds.num_classes));
    }
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write dataset file: " + path);
    f << json{{"num_classes", ds.num_classes}}.dump() << "\n";
    for (const auto& ex : ds.examples) {
        json j = input_to_json(ex.input);
        j["id"] = ex.id;
        j["label"] = ex.label;
        f << j.dump() << "\n";
    }
}

AugmentPool load_pool(const std::string& path, const Dataset& ds, int expected_K, bool strict) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open pool file: " + path);

    std::set<std::string> ds_ids;
    for (const auto& ex : ds.examples) ds_ids.insert(ex.id);
    Modality mod = ds.modality();

    // collect (aug_index, input) per id, then order
    std::map<std::string, std::map<int, Input>> by_id;
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = parse_line(line, lineno, path);
        for (const char* field : {"id", "aug_index"}) {
            if (!j.contains(field))
                throw ParseError(path + ":" + std::to_string(lineno) + ": missing \"" + field + "\"");
        }
        std::string id = j["id"].get<std::string>();
        int aug_index = j["aug_index"].get<int>();
        if (!ds_ids.count(id)) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": orphan pool entry for id \"" +
                                  id + "\" not present in dataset");
        }
        Input in = input_from_json(j, lineno, path);
        if (in.modality != mod) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": modality mismatch for id \"" +
                                  id + "\"");
        }
        if (aug_index < 0) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": negative aug_index");
        }
        if (!by_id[id].emplace(aug_index, std::move(in)).second) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": duplicate aug_index " +
                                  std::to_string(aug_index) + " for id \"" + id + "\"");
        }
    }

    AugmentPool pool;
    pool.K = expected_K;
    pool.ragged = !strict;
    if (strict) {
        std::vector<std::string> offenders;
        for (const auto& ex : ds.examples) {
            auto it = by_id.find(ex.id);
            size_t count = it == by_id.end() ? 0 : it->second.size();
            if (static_cast<int>(count) != expected_K) offenders.push_back(ex.id);
        }
        if (!offenders.empty()) {
            std::ostringstream msg;
            msg << path << ": expected " << expected_K << " pool entries per id; offenders:";
            for (size_t i = 0; i < offenders.size() && i < 10; ++i) msg << " " << offenders[i];
            if (offenders.size() > 10) msg << " (+" << offenders.size() - 10 << " more)";
            throw ValidationError(msg.str());
        }
    }
    for (auto& [id, m] : by_id) {
        std::vector<Input> v;
        v.reserve(m.size());
        for (auto& [idx, in] : m) v.push_back(std::move(in));
        pool.entries.emplace(id, std::move(v));
    }
    if (!strict) {
        // relaxed loading still guarantees every train id has a (possibly empty) slot
        for (const auto& ex : ds.examples) pool.entries.try_emplace(ex.id);
    }
    return pool;
}

void save_pool(const AugmentPool& pool, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write pool file: " + path);
    // sorted by id for byte-stable output
    std::vector<const std::string*> ids;
    ids.reserve(pool.entries.size());
    for (const auto& [id, v] : pool.entries) ids.push_back(&id);
    std::sort(ids.begin(), ids.end(), [](const auto* a, const auto* b) { return *a < *b; });
    for (const auto* id : ids) {
        const auto& v = pool.entries.at(*id);
        for (size_t k = 0; k < v.size(); ++k) {
            json j = input_to_json(v[k]);
            j["id"] = *id;
            j["aug_index"] = static_cast<int>(k);
            f << j.dump() << "\n";
        }
    }
}

AugmentPool truncate_pool(const AugmentPool& pool, int k) {
    if (k < 1 || k > pool.K) throw ConfigError("truncate_pool: k out of range");
    AugmentPool out;
    out.K = k;
    out.ragged = pool.ragged;
    for (const auto& [id, v] : pool.entries) {
        size_t n = std::min<size_t>(v.size(), static_cast<size_t>(k));
        out.entries.emplace(id, std::vector<Input>(v.begin(), v.begin() + n));
    }
    return out;
}

std::vector<Batch> make_batches(const Dataset& ds, const AugmentPool* pool, size_t batch_size,
                                uint64_t epoch_seed, uint64_t epoch) {
    if (batch_size == 0) throw ConfigError("batch_size must be positive");

    std::vector<size_t> order(ds.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(stream_seed(epoch_seed, "batch_iter", epoch));
    rng.shuffle(order);

    std::vector<Batch> batches;
    for (size_t start = 0; start < order.size(); start += batch_size) {
        Batch b;
        size_t end = std::min(order.size(), start + batch_size);
        for (size_t i = start; i < end; ++i) {
            const Example& ex = ds.examples[order[i]];
            b.originals.push_back(&ex);
            if (pool) {
                auto it = pool->entries.find(ex.id);
                if (it == pool->entries.end()) {
                    throw ValidationError("pool missing entries for id \"" + ex.id + "\"");
                }
                b.pools.push_back(&it->second);
            }
        }
        batches.push_back(std::move(b));
    }
    return batches;
}

}  // namespace glitter

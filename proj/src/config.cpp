#include "glitter/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "glitter/errors.hpp"

namespace glitter {

using nlohmann::json;

namespace {

json defaults() {
    TrainConfig d;
    return json{
        {"regime", regime_name(d.regime)},
        {"k1", d.k1},
        {"eval_mode",
         {{"tag", eval_tag_name(d.eval_mode.tag)},
          {"gamma", d.eval_mode.gamma},
          {"t", d.eval_mode.t},
          {"tau", d.eval_mode.tau}}},
        {"kd", {{"alpha", d.kd.alpha}, {"tau", d.kd.tau}}},
        {"epochs", d.epochs},
        {"early_stop_patience", d.early_stop_patience},
        {"batch_size", d.batch_size},
        {"base_lr", d.base_lr},
        {"warmup_ratio", d.warmup_ratio},
        {"seed", d.seed},
        {"arch", d.arch == Arch::Boe ? "boe" : "mlp"},
        {"embed_dim", d.embed_dim},
        {"hidden", d.hidden},
    };
}

void check_unknown_keys(const json& given, const json& known, const std::string& prefix) {
    for (const auto& [key, value] : given.items()) {
        if (!known.contains(key)) throw ConfigError("unknown config key: " + prefix + key);
        if (value.is_object()) check_unknown_keys(value, known.at(key), prefix + key + ".");
    }
}

// coerce a "k=v" string to the JSON type already at that key
void apply_override(json& cfg, const std::string& kv) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("override must be key=value: " + kv);
    std::string dotted = kv.substr(0, eq);
    std::string value = kv.substr(eq + 1);

    json* node = &cfg;
    size_t start = 0;
    while (true) {
        size_t dot = dotted.find('.', start);
        std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!node->contains(key)) throw ConfigError("override references unknown key: " + dotted);
        node = &(*node)[key];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }

    try {
        if (node->is_string()) {
            *node = value;
        } else if (node->is_boolean()) {
            *node = value == "true" || value == "1";
        } else if (node->is_number_integer() || node->is_number_unsigned()) {
            *node = std::stoll(value);
        } else if (node->is_number_float()) {
            *node = std::stod(value);
        } else if (node->is_array()) {
            json arr = json::array();
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (!item.empty()) arr.push_back(std::stoll(item));
            }
            *node = std::move(arr);
        } else {
            throw ConfigError("override targets a non-scalar key: " + dotted);
        }
    } catch (const std::invalid_argument&) {
        throw ConfigError("cannot parse override value for " + dotted + ": " + value);
    }
}

}  // namespace

std::string default_train_config_json() { return defaults().dump(2) + "\n"; }

TrainConfig parse_train_config(const std::string& json_text,
                               const std::vector<std::string>& overrides) {
    json given = json::parse(json_text, nullptr, false);
    if (given.is_discarded() || !given.is_object()) throw ParseError("malformed config document");

    json cfg = defaults();
    check_unknown_keys(given, cfg, "");
    cfg.merge_patch(given);
    for (const auto& kv : overrides) apply_override(cfg, kv);

    TrainConfig out;
    out.regime = parse_regime(cfg.at("regime").get<std::string>());
    out.k1 = cfg.at("k1").get<int>();
    const json& em = cfg.at("eval_mode");
    out.eval_mode.tag = parse_eval_tag(em.at("tag").get<std::string>());
    out.eval_mode.gamma = em.at("gamma").get<double>();
    out.eval_mode.t = em.at("t").get<double>();
    out.eval_mode.tau = em.at("tau").get<double>();
    out.kd.alpha = cfg.at("kd").at("alpha").get<double>();
    out.kd.tau = cfg.at("kd").at("tau").get<double>();
    out.epochs = cfg.at("epochs").get<int>();
    out.early_stop_patience = cfg.at("early_stop_patience").get<int>();
    out.batch_size = cfg.at("batch_size").get<size_t>();
    if (out.batch_size == 0) throw ConfigError("batch_size must be positive");
    out.base_lr = cfg.at("base_lr").get<double>();
    out.warmup_ratio = cfg.at("warmup_ratio").get<double>();
    out.seed = cfg.at("seed").get<uint64_t>();
    std::string arch = cfg.at("arch").get<std::string>();
    if (arch != "boe" && arch != "mlp") throw ConfigError("unknown arch: " + arch);
    out.arch = arch == "boe" ? Arch::Boe : Arch::Mlp;
    out.embed_dim = cfg.at("embed_dim").get<int>();
    out.hidden = cfg.at("hidden").get<std::vector<int>>();
    return out;
}

TrainConfig load_train_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_train_config(ss.str(), overrides);
}

}  // namespace glitter

#pragma once

#include <string>
#include <vector>

#include "glitter/training.hpp"

namespace glitter {

// Default config as a JSON document (every known key present).
std::string default_train_config_json();

// Parses a TrainConfig from a JSON document; unknown keys are errors.
// `overrides` are dot-keyed "key=value" pairs (e.g. "kd.alpha=0.25",
// "eval_mode.tag=gt_ce", "hidden=32,16") and must reference existing keys.
TrainConfig parse_train_config(const std::string& json_text,
                               const std::vector<std::string>& overrides = {});

TrainConfig load_train_config(const std::string& path,
                              const std::vector<std::string>& overrides = {});

}  // namespace glitter

#pragma once

#include <filesystem>
#include <string>

#include "dgcca/trainer.hpp"

namespace dgcca {

/// Parses and validates the training config schema. Every TrainConfig field
/// has a key; unknown keys are errors (naming the key), not warnings.
/// Required: "r", "epochs", "views" (each view: "widths" required,
/// "activation"/"init" optional). Everything else has documented defaults.
TrainConfig parse_train_config(const std::string& text);
TrainConfig load_train_config(const std::filesystem::path& path);

/// Serializes a config back to schema-compatible JSON (used by run manifests).
std::string train_config_to_json_string(const TrainConfig& config);

}  // namespace dgcca

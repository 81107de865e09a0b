#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "gzf/model.hpp"
#include "gzf/synth.hpp"
#include "gzf/trainer.hpp"

namespace gzf {

/// Everything one CLI run needs. JSON sections: "synth", "model", "dsge",
/// "mlp", "vit", "train". Unknown keys anywhere are rejected.
struct RunConfig {
  SynthConfig synth;
  ModelConfig model;
  TrainConfig train;
};

/// CPU-sized defaults: 64x64 images, patch 8, D = 64, 2 image layers,
/// gaze encoder width 32 with 2 layers and 2 heads.
RunConfig desk_scale_config();
/// Full-sized model (224/16, D = 768, 6 layers; gaze width 128, 8 heads, 6 layers).
RunConfig full_scale_config();

/// Overlays `j` on `base`; throws ConfigError on unknown keys or bad types.
RunConfig parse_run_config(const nlohmann::json& j, RunConfig base);
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base);

nlohmann::json to_json(const RunConfig& c);
nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

}  // namespace gzf

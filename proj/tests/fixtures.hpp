#pragma once

#include <filesystem>
#include <string>

#include "gzf/config.hpp"
#include "gzf/synth.hpp"
#include "test_util.hpp"

namespace gzf::testing {

// A run small enough to train in about a second.
inline RunConfig tiny_run() {
  RunConfig run = desk_scale_config();
  run.synth.image_size = 32;
  run.synth.samples_per_class = 12;
  run.synth.num_classes = 3;
  run.synth.glyph_size = 6;
  run.synth.marker_size = 4;
  run.synth.gaze_len = 20;
  run.model.vit = VitConfig{32, 16, 16, 1, 2, 32, 0.1, 0.1};
  run.model.dsge = DsgeConfig{20, 2, 8, 2, 1, 16, 16, 0.1, 0.1};
  run.model.mlp = MlpGazeConfig{20, 2, 16, 16, 0.1};
  run.model.num_classes = 3;
  run.model.head_init_std = 0.1;
  run.train.epochs = 3;
  run.train.batch_size = 8;
  run.train.base_lr = 0.05;
  run.train.record_time = false;
  return run;
}

inline std::filesystem::path tiny_dataset(const std::string& name, const RunConfig& run = tiny_run()) {
  const auto dir = scratch_dir(name);
  generate_dataset(run.synth, dir);
  return dir / "manifest.json";
}

}  // namespace gzf::testing

#include "doctest.h"

#include "gzf/config.hpp"

using namespace gzf;
using nlohmann::json;

TEST_CASE("strict overlay") {
  const RunConfig base = desk_scale_config();
  const RunConfig c = parse_run_config(json::parse(R"({"train":{"epochs":4},"dsge":{"layers":3},
      "model":{"gaze":"mlp","fusion":"ca+layer"},"synth":{"split":[4,1],"placement":"uniform"}})"),
                                       base);
  CHECK(c.train.epochs == 4);
  CHECK(c.model.dsge.layers == 3);
  CHECK(c.model.gaze == GazeEncoderKind::Mlp);
  CHECK(c.model.fusion == FusionMode::CrossAttentionLayer);
  CHECK(c.synth.split.train == 4);
  CHECK(c.synth.placement == GlyphPlacement::Uniform);
  CHECK(c.train.base_lr == base.train.base_lr);

  CHECK_THROWS_AS(parse_run_config(json::parse(R"({"train":{"epoch":4}})"), base), ConfigError);
  CHECK_THROWS_AS(parse_run_config(json::parse(R"({"optimizer":{}})"), base), ConfigError);
  CHECK_THROWS_AS(parse_run_config(json::parse(R"({"train":{"epochs":"four"}})"), base), ConfigError);
  CHECK_THROWS_AS(parse_run_config(json::parse(R"({"model":{"gaze":"lstm"}})"), base), ConfigError);
  CHECK_THROWS_AS(load_run_config("/nonexistent/cfg.json", base), ConfigError);
}

TEST_CASE("serialization round-trip and hashing") {
  RunConfig c = desk_scale_config();
  c.train.seed = 42;
  c.model.fusion = FusionMode::Add;
  const json j = to_json(c);
  const RunConfig back = parse_run_config(j, RunConfig{});
  CHECK(to_json(back) == j);
  CHECK(config_hash(j) == config_hash(to_json(back)));
  CHECK(config_hash(j).size() == 16);
  c.train.seed = 43;
  CHECK(config_hash(to_json(c)) != config_hash(j));
  CHECK(model_config_from_json(to_json(c.model)).fusion == FusionMode::Add);
}

TEST_CASE("scale presets") {
  const RunConfig full = full_scale_config();
  CHECK(full.model.vit.dim == 768);
  CHECK(full.model.dsge.out_dim == 768);
  CHECK(full.model.dsge.hidden == 128);
  CHECK(full.model.dsge.heads == 8);
  CHECK(full.train.base_lr == 0.001);
  CHECK(full.train.momentum == 0.8);
  CHECK(full.train.weight_decay == 5e-5);
  CHECK(full.train.batch_size == 32);
  full.model.validate();
  desk_scale_config().model.validate();
}

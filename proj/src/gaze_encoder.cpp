#include "gzf/gaze_encoder.hpp"
#include <cmath>

namespace gzf {

void DsgeConfig::validate() const {
  if (seq_len < 1 || in_dim < 1 || hidden < 1 || ffn_hidden < 1 || out_dim < 1) {
    throw ConfigError("dsge: all dimensions must be positive");
  }
  if (layers < 1) throw ConfigError("dsge: need at least one encoder layer");
  if (heads < 1 || hidden % heads != 0) {
    throw ConfigError("dsge: hidden " + std::to_string(hidden) + " not divisible by heads " +
                      std::to_string(heads));
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dsge: dropout must lie in [0, 1)");
  if (!(init_std > 0.0)) throw ConfigError("dsge: init_std must be positive");
  if (!(input_scale > 0.0) || !std::isfinite(input_scale)) throw ConfigError("dsge: input_scale must be positive");
}

DsgeParams DsgeParams::init(const DsgeConfig& cfg, Rng& rng) {
  cfg.validate();
  DsgeParams p;
  p.w_embed = normal_tensor({cfg.hidden, cfg.in_dim}, cfg.init_std, rng);
  p.b_embed = Tensor({cfg.hidden});
  for (Index l = 0; l < cfg.layers; ++l) {
    p.layers.push_back(EncoderLayerParams::init(cfg.hidden, cfg.ffn_hidden, cfg.init_std, rng));
  }
  p.w_align = normal_tensor({cfg.out_dim, cfg.hidden}, cfg.init_std, rng);
  p.b_align = Tensor({cfg.out_dim});
  return p;
}

void DsgeParams::collect(ParamList& out, const std::string& prefix) {
  out.push_back({prefix + "w_embed", &w_embed});
  out.push_back({prefix + "b_embed", &b_embed});
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].collect(out, prefix + "layer" + std::to_string(l) + ".");
  }
  out.push_back({prefix + "w_align", &w_align});
  out.push_back({prefix + "b_align", &b_align});
}

Var embed_gaze(Var gaze, const DsgeParams& p) {
  if (gaze.cols() != p.w_embed.extent(1)) {
    throw DimensionError("embed_gaze: expected " + std::to_string(p.w_embed.extent(1)) +
                         " coordinates per point, got " + std::to_string(gaze.cols()));
  }
  Graph& g = gaze.graph();
  return linear(gaze, g.param(p.w_embed), g.param(p.b_embed));
}

Var dsge_encode(Var gaze, const DsgeParams& p, const DsgeConfig& cfg, bool training, Rng& rng,
                AttentionTrace* trace) {
  const EncoderLayerOptions opt{cfg.heads, cfg.dropout, training};
  Var x = embed_gaze(cfg.input_scale == 1.0 ? gaze : scale(gaze, cfg.input_scale), p);
  for (const auto& layer : p.layers) x = encoder_layer(x, layer, opt, rng, trace);
  return x;
}

Var dsge_aligned_sequence(Var gaze, const DsgeParams& p, const DsgeConfig& cfg, bool training, Rng& rng,
                          AttentionTrace* trace) {
  Graph& g = gaze.graph();
  const Var x = dsge_encode(gaze, p, cfg, training, rng, trace);
  return linear(x, g.param(p.w_align), g.param(p.b_align));
}

Var dsge_forward(Var gaze, const DsgeParams& p, const DsgeConfig& cfg, bool training, Rng& rng,
                 AttentionTrace* trace) {
  Graph& g = gaze.graph();
  const Var x = dsge_encode(gaze, p, cfg, training, rng, trace);
  return linear(row(x, 0), g.param(p.w_align), g.param(p.b_align));
}

void MlpGazeConfig::validate() const {
  if (seq_len < 1 || in_dim < 1 || hidden < 1 || out_dim < 1) {
    throw ConfigError("mlp: all dimensions must be positive");
  }
  if (!(init_std > 0.0)) throw ConfigError("mlp: init_std must be positive");
  if (!(input_scale > 0.0) || !std::isfinite(input_scale)) throw ConfigError("mlp: input_scale must be positive");
}

MlpGazeParams MlpGazeParams::init(const MlpGazeConfig& cfg, Rng& rng) {
  cfg.validate();
  MlpGazeParams p;
  p.w1 = normal_tensor({cfg.hidden, cfg.seq_len * cfg.in_dim}, cfg.init_std, rng);
  p.b1 = Tensor({cfg.hidden});
  p.w2 = normal_tensor({cfg.out_dim, cfg.hidden}, cfg.init_std, rng);
  p.b2 = Tensor({cfg.out_dim});
  return p;
}

void MlpGazeParams::collect(ParamList& out, const std::string& prefix) {
  out.push_back({prefix + "w1", &w1});
  out.push_back({prefix + "b1", &b1});
  out.push_back({prefix + "w2", &w2});
  out.push_back({prefix + "b2", &b2});
}

Var mlp_gaze_forward(Var gaze, const MlpGazeParams& p, double input_scale) {
  Graph& g = gaze.graph();
  if (gaze.value().size() != p.w1.extent(1)) {
    throw DimensionError("mlp_gaze_forward: trajectory " + shape_string(gaze.rows(), gaze.cols()) +
                         " does not flatten to " + std::to_string(p.w1.extent(1)));
  }
  const Var flat = scale(reshape(gaze, 1, gaze.value().size()), input_scale);
  const Var hidden = relu(linear(flat, g.param(p.w1), g.param(p.b1)));
  return linear(hidden, g.param(p.w2), g.param(p.b2));
}

}  // namespace gzf

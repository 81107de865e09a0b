#pragma once

#include <vector>

#include "gzf/transformer.hpp"

namespace gzf {

/// Dual-sequence gaze encoder hyperparameters. Defaults are the full-scale
/// model: 176-point trajectories, width 128, 8 heads, 6 layers, 768-d output.
struct DsgeConfig {
  Index seq_len = 176;
  Index in_dim = 2;
  Index hidden = 128;
  Index heads = 8;
  Index layers = 6;
  Index ffn_hidden = 512;
  Index out_dim = 768;
  double dropout = 0.1;
  double init_std = 0.02;
  // Multiplies coordinates before the embedding. Equivalent to rescaling the
  // embedding weights, so it only changes how the optimizer sees them; the
  // post-LN stack trains on raw [0, 224] coordinates.
  double input_scale = 1.0;

  void validate() const;
};

struct DsgeParams {
  Tensor w_embed, b_embed;  // hidden x in_dim, hidden
  std::vector<EncoderLayerParams> layers;
  Tensor w_align, b_align;  // out_dim x hidden, out_dim

  static DsgeParams init(const DsgeConfig& cfg, Rng& rng);
  void collect(ParamList& out, const std::string& prefix = "dsge.");
};

/// Row-wise affine lift of the L x 2 trajectory to L x hidden.
Var embed_gaze(Var gaze, const DsgeParams& p);

/// Input scaling, embedding and the stacked encoder layers; L x hidden.
Var dsge_encode(Var gaze, const DsgeParams& p, const DsgeConfig& cfg, bool training, Rng& rng,
                AttentionTrace* trace = nullptr);

/// Full aligned sequence g' = W2 x + b2 for every time step; L x out_dim.
Var dsge_aligned_sequence(Var gaze, const DsgeParams& p, const DsgeConfig& cfg, bool training, Rng& rng,
                          AttentionTrace* trace = nullptr);

/// The gaze feature g: the aligned feature of the first time step, 1 x out_dim.
/// Only that row is projected, which is the same value as row 0 of
/// dsge_aligned_sequence.
Var dsge_forward(Var gaze, const DsgeParams& p, const DsgeConfig& cfg, bool training, Rng& rng,
                 AttentionTrace* trace = nullptr);

/// Baseline gaze encoder: flatten -> affine -> ReLU -> affine.
struct MlpGazeConfig {
  Index seq_len = 176;
  Index in_dim = 2;
  Index hidden = 512;
  Index out_dim = 768;
  double init_std = 0.02;
  // Without a norm layer the first affine diverges on raw [0, 224]
  // coordinates at the desk learning rate.
  double input_scale = 1.0 / 224.0;

  void validate() const;
};

struct MlpGazeParams {
  Tensor w1, b1;  // hidden x (seq_len * in_dim), hidden
  Tensor w2, b2;  // out_dim x hidden, out_dim

  static MlpGazeParams init(const MlpGazeConfig& cfg, Rng& rng);
  void collect(ParamList& out, const std::string& prefix = "mlp.");
};

Var mlp_gaze_forward(Var gaze, const MlpGazeParams& p, double input_scale = 1.0);

}  // namespace gzf

#pragma once

#include <vector>

#include "gzf/transformer.hpp"

namespace gzf {

/// Patch transformer with one learned classification token and learned
/// positional embeddings. Defaults are the full-scale encoder.
struct VitConfig {
  Index image_size = 224;
  Index patch_size = 16;
  Index dim = 768;
  Index layers = 6;
  Index heads = 12;
  Index ffn_hidden = 3072;
  double dropout = 0.1;
  double init_std = 0.02;

  Index grid() const { return image_size / patch_size; }
  Index num_patches() const { return grid() * grid(); }
  Index seq_len() const { return num_patches() + 1; }
  Index patch_dim() const { return 3 * patch_size * patch_size; }
  void validate() const;
};

struct VitParams {
  Tensor patch_w, patch_b;  // dim x 3P^2, dim
  Tensor cls_token;         // dim
  Tensor pos_embed;         // (N + 1) x dim
  std::vector<EncoderLayerParams> layers;
  Tensor ln_gamma, ln_beta;  // dim

  static VitParams init(const VitConfig& cfg, Rng& rng);
  void collect(ParamList& out, const std::string& prefix = "vit.");
};

/// Splits a 3 x H x W image into non-overlapping P x P patches in row-major
/// patch order; each row is one patch flattened channel-major ([c][y][x]).
Matrix patchify(const Tensor& image, Index patch_size);

struct VitOutput {
  Var feature;  // classification-token feature, 1 x dim
  Var tokens;   // all final tokens after the last LayerNorm, (N + 1) x dim
};

VitOutput vit_encode(Graph& g, const Tensor& image, const VitParams& p, const VitConfig& cfg, bool training,
                     Rng& rng, AttentionTrace* trace = nullptr);

/// The image feature of the classification token.
inline Var vit_forward(Graph& g, const Tensor& image, const VitParams& p, const VitConfig& cfg, bool training,
                       Rng& rng, AttentionTrace* trace = nullptr) {
  return vit_encode(g, image, p, cfg, training, rng, trace).feature;
}

}  // namespace gzf

#pragma once

#include <optional>
#include <string>

#include "gzf/autodiff.hpp"
#include "gzf/params.hpp"
#include "gzf/transformer.hpp"

namespace gzf {

/// How the gaze feature reaches the classifier.
///   None                 image feature only (no gaze)
///   Add                  f'' = g + I
///   Layer                f'' = W3 [g; I] + b3 + I
///   CrossAttention       f'' = I + CA(g, tokens)
///   CrossAttentionLayer  f'' = W3 [CA(g, tokens); I] + b3 + I
enum class FusionMode { None, Add, Layer, CrossAttention, CrossAttentionLayer };

std::string to_string(FusionMode m);
FusionMode parse_fusion_mode(const std::string& s);

inline bool uses_fusion_layer(FusionMode m) {
  return m == FusionMode::Layer || m == FusionMode::CrossAttentionLayer;
}
inline bool uses_cross_attention(FusionMode m) {
  return m == FusionMode::CrossAttention || m == FusionMode::CrossAttentionLayer;
}

struct CrossAttentionParams {
  Tensor w_q, w_k, w_v, w_o;  // dim x dim
};

struct FusionParams {
  std::optional<Tensor> w_fuse, b_fuse;  // dim x 2dim, dim
  Tensor w_cls, b_cls;                   // C x dim, C
  std::optional<CrossAttentionParams> cross;

  static FusionParams init(Index dim, Index num_classes, FusionMode mode, double init_std, Rng& rng);
  void collect(ParamList& out, const std::string& prefix = "head.");
  Index dim() const { return w_cls.extent(1); }
};

/// f' = [g; I]; f'' = (W3 f' + b3) + I. `concatenated` receives f' when given.
Var fuse(Var gaze_feature, Var image_feature, const FusionParams& p, Matrix* concatenated = nullptr);

/// Classifier logits W4 f'' + b4, 1 x C.
Var classify_logits(Var fused, const FusionParams& p);

/// Probability vector softmax(W4 f'' + b4).
inline Var classify(Var fused, const FusionParams& p) { return softmax_rows(classify_logits(fused, p)); }

/// Single-head cross-attention: the gaze feature queries the image tokens.
/// Returns W_O (softmax(q K^T / sqrt(D)) V), 1 x D.
Var cross_attention_fuse(Var gaze_feature, Var image_tokens, const CrossAttentionParams& p,
                         AttentionTrace* trace = nullptr);

}  // namespace gzf

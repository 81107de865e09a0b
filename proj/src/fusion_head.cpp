#include "gzf/fusion_head.hpp"

#include <cmath>

namespace gzf {

std::string to_string(FusionMode m) {
  switch (m) {
    case FusionMode::None: return "none";
    case FusionMode::Add: return "add";
    case FusionMode::Layer: return "layer";
    case FusionMode::CrossAttention: return "ca";
    case FusionMode::CrossAttentionLayer: return "ca+layer";
  }
  return "none";
}

FusionMode parse_fusion_mode(const std::string& s) {
  if (s == "none") return FusionMode::None;
  if (s == "add") return FusionMode::Add;
  if (s == "layer") return FusionMode::Layer;
  if (s == "ca") return FusionMode::CrossAttention;
  if (s == "ca+layer") return FusionMode::CrossAttentionLayer;
  throw ConfigError("unknown fusion mode '" + s + "' (expected none|add|layer|ca|ca+layer)");
}

FusionParams FusionParams::init(Index dim, Index num_classes, FusionMode mode, double init_std, Rng& rng) {
  if (dim < 1 || num_classes < 1) throw ConfigError("head: dim and class count must be positive");
  FusionParams p;
  if (uses_cross_attention(mode)) {
    p.cross = CrossAttentionParams{normal_tensor({dim, dim}, init_std, rng), normal_tensor({dim, dim}, init_std, rng),
                                   normal_tensor({dim, dim}, init_std, rng), normal_tensor({dim, dim}, init_std, rng)};
  }
  if (uses_fusion_layer(mode)) {
    p.w_fuse = normal_tensor({dim, 2 * dim}, init_std, rng);
    p.b_fuse = Tensor({dim});
  }
  p.w_cls = normal_tensor({num_classes, dim}, init_std, rng);
  p.b_cls = Tensor({num_classes});
  return p;
}

void FusionParams::collect(ParamList& out, const std::string& prefix) {
  if (cross) {
    out.push_back({prefix + "ca_w_q", &cross->w_q});
    out.push_back({prefix + "ca_w_k", &cross->w_k});
    out.push_back({prefix + "ca_w_v", &cross->w_v});
    out.push_back({prefix + "ca_w_o", &cross->w_o});
  }
  if (w_fuse) {
    out.push_back({prefix + "w_fuse", &*w_fuse});
    out.push_back({prefix + "b_fuse", &*b_fuse});
  }
  out.push_back({prefix + "w_cls", &w_cls});
  out.push_back({prefix + "b_cls", &b_cls});
}

Var fuse(Var gaze_feature, Var image_feature, const FusionParams& p, Matrix* concatenated) {
  if (!p.w_fuse) throw ConfigError("fuse: head was built without a fusion layer");
  if (gaze_feature.cols() != image_feature.cols() || image_feature.cols() != p.w_fuse->extent(0)) {
    throw DimensionError("fuse: gaze width " + std::to_string(gaze_feature.cols()) + ", image width " +
                         std::to_string(image_feature.cols()) + ", fusion width " +
                         std::to_string(p.w_fuse->extent(0)));
  }
  Graph& g = image_feature.graph();
  const Var joined = concat_cols(gaze_feature, image_feature);
  if (concatenated) *concatenated = joined.value();
  return add(linear(joined, g.param(*p.w_fuse), g.param(*p.b_fuse)), image_feature);
}

Var classify_logits(Var fused, const FusionParams& p) {
  Graph& g = fused.graph();
  return linear(fused, g.param(p.w_cls), g.param(p.b_cls));
}

Var cross_attention_fuse(Var gaze_feature, Var image_tokens, const CrossAttentionParams& p, AttentionTrace* trace) {
  const Index d = p.w_q.extent(0);
  if (gaze_feature.cols() != d || image_tokens.cols() != d) {
    throw DimensionError("cross_attention: query width " + std::to_string(gaze_feature.cols()) +
                         ", token width " + std::to_string(image_tokens.cols()) + ", block width " +
                         std::to_string(d));
  }
  Graph& g = image_tokens.graph();
  const Var q = matmul_nt(gaze_feature, g.param(p.w_q));
  const Var k = matmul_nt(image_tokens, g.param(p.w_k));
  const Var v = matmul_nt(image_tokens, g.param(p.w_v));
  const Var attn = softmax_rows(scale(matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(d))));
  if (trace) trace->maps.push_back(attn.value());
  return matmul_nt(matmul(attn, v), g.param(p.w_o));
}

}  // namespace gzf

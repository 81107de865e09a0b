#include "gzf/model.hpp"

namespace gzf {

std::string to_string(GazeEncoderKind k) {
  switch (k) {
    case GazeEncoderKind::Dsge: return "dsge";
    case GazeEncoderKind::Mlp: return "mlp";
    case GazeEncoderKind::None: return "none";
  }
  return "none";
}

GazeEncoderKind parse_gaze_encoder(const std::string& s) {
  if (s == "dsge") return GazeEncoderKind::Dsge;
  if (s == "mlp") return GazeEncoderKind::Mlp;
  if (s == "none") return GazeEncoderKind::None;
  throw ConfigError("unknown gaze encoder '" + s + "' (expected dsge|mlp|none)");
}

void ModelConfig::validate() const {
  vit.validate();
  if (num_classes < 2) throw ConfigError("model: need at least two classes");
  if (!(head_dropout >= 0.0 && head_dropout < 1.0)) throw ConfigError("model: head dropout must lie in [0, 1)");
  if (gaze == GazeEncoderKind::None) {
    if (fusion != FusionMode::None) {
      throw ConfigError("model: fusion '" + to_string(fusion) + "' requires a gaze encoder");
    }
    return;
  }
  if (fusion == FusionMode::None) throw ConfigError("model: a gaze encoder needs a fusion mode");
  if (gaze == GazeEncoderKind::Dsge) {
    dsge.validate();
    if (dsge.out_dim != vit.dim) {
      throw ConfigError("model: dsge out_dim " + std::to_string(dsge.out_dim) + " != image dim " +
                        std::to_string(vit.dim));
    }
  } else {
    mlp.validate();
    if (mlp.out_dim != vit.dim) {
      throw ConfigError("model: mlp out_dim " + std::to_string(mlp.out_dim) + " != image dim " +
                        std::to_string(vit.dim));
    }
    if (mlp.seq_len != dsge.seq_len) throw ConfigError("model: mlp and dsge seq_len disagree");
  }
}

GazeClassifier::GazeClassifier(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  // Independent streams per component so toggling the gaze encoder leaves the
  // image encoder initialization unchanged.
  Rng vit_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Rng gaze_rng(seed ^ 0xbf58476d1ce4e5b9ULL);
  Rng head_rng(seed ^ 0x94d049bb133111ebULL);
  vit_ = VitParams::init(cfg_.vit, vit_rng);
  if (cfg_.gaze == GazeEncoderKind::Dsge) dsge_ = DsgeParams::init(cfg_.dsge, gaze_rng);
  if (cfg_.gaze == GazeEncoderKind::Mlp) mlp_ = MlpGazeParams::init(cfg_.mlp, gaze_rng);
  head_ = FusionParams::init(cfg_.vit.dim, cfg_.num_classes, cfg_.fusion, cfg_.head_init_std, head_rng);
}

Var GazeClassifier::logits(Graph& g, const Tensor& image, const Tensor& gaze, bool training, Rng& rng,
                           ForwardTrace* trace) const {
  const VitOutput img = vit_encode(g, image, vit_, cfg_.vit, training, rng, trace ? &trace->image_attention : nullptr);
  Var fused = img.feature;

  if (cfg_.gaze != GazeEncoderKind::None) {
    const Var gz = g.constant(gaze);
    const Var gfeat = cfg_.gaze == GazeEncoderKind::Dsge
                          ? dsge_forward(gz, *dsge_, cfg_.dsge, training, rng, trace ? &trace->gaze_attention : nullptr)
                          : mlp_gaze_forward(gz, *mlp_, cfg_.mlp.input_scale);
    if (trace) trace->gaze_feature = gfeat.value();
    switch (cfg_.fusion) {
      case FusionMode::Add:
        fused = add(gfeat, img.feature);
        break;
      case FusionMode::Layer:
        fused = fuse(gfeat, img.feature, head_, trace ? &trace->concatenated : nullptr);
        break;
      case FusionMode::CrossAttention:
        fused = add(img.feature, cross_attention_fuse(gfeat, img.tokens, *head_.cross,
                                                      trace ? &trace->cross_attention : nullptr));
        break;
      case FusionMode::CrossAttentionLayer:
        fused = fuse(cross_attention_fuse(gfeat, img.tokens, *head_.cross, trace ? &trace->cross_attention : nullptr),
                     img.feature, head_, trace ? &trace->concatenated : nullptr);
        break;
      case FusionMode::None:
        break;
    }
  }
  if (trace) {
    trace->image_feature = img.feature.value();
    trace->fused = fused.value();
  }
  return classify_logits(dropout(fused, cfg_.head_dropout, training, rng), head_);
}

Matrix GazeClassifier::predict(const Tensor& image, const Tensor& gaze) const {
  Graph g;
  Rng unused(0);
  return softmax_rows(logits(g, image, gaze, false, unused).value());
}

ParamList GazeClassifier::parameters() {
  ParamList out;
  vit_.collect(out);
  if (dsge_) dsge_->collect(out);
  if (mlp_) mlp_->collect(out);
  head_.collect(out);
  return out;
}

ParamList GazeClassifier::head_parameters() {
  ParamList out;
  head_.collect(out);
  return out;
}

}  // namespace gzf

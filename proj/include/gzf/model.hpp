#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gzf/fusion_head.hpp"
#include "gzf/gaze_encoder.hpp"
#include "gzf/image_encoder.hpp"

namespace gzf {

enum class GazeEncoderKind { Dsge, Mlp, None };

std::string to_string(GazeEncoderKind k);
GazeEncoderKind parse_gaze_encoder(const std::string& s);

/// Full classifier wiring: image encoder, optional gaze encoder, fusion head.
struct ModelConfig {
  GazeEncoderKind gaze = GazeEncoderKind::Dsge;
  FusionMode fusion = FusionMode::Layer;
  DsgeConfig dsge;
  MlpGazeConfig mlp;
  VitConfig vit;
  Index num_classes = 10;
  double head_dropout = 0.1;  // on f'' before the classifier
  double head_init_std = 0.02;

  /// Checks cross-component contracts (gaze out_dim == image dim, CA needs
  /// gaze, W/O uses no fusion).
  void validate() const;
};

struct ForwardTrace {
  AttentionTrace gaze_attention;
  AttentionTrace image_attention;
  AttentionTrace cross_attention;
  Matrix gaze_feature;  // g
  Matrix image_feature;  // I-hat
  Matrix concatenated;   // f' (fusion-layer modes only)
  Matrix fused;          // f''
};

class GazeClassifier {
 public:
  GazeClassifier() = default;
  GazeClassifier(ModelConfig cfg, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return cfg_; }

  /// Logits (1 x C) for one sample. `gaze` is L x 2 (ignored without a gaze encoder).
  Var logits(Graph& g, const Tensor& image, const Tensor& gaze, bool training, Rng& rng,
             ForwardTrace* trace = nullptr) const;

  /// Class probabilities for one sample in eval mode.
  Matrix predict(const Tensor& image, const Tensor& gaze) const;

  /// All parameters in a fixed order (image encoder, gaze encoder, head).
  ParamList parameters();
  /// Only the fusion head (used when the encoders are frozen).
  ParamList head_parameters();

  VitParams& vit() { return vit_; }
  const VitParams& vit() const { return vit_; }
  std::optional<DsgeParams>& dsge() { return dsge_; }
  std::optional<MlpGazeParams>& mlp() { return mlp_; }
  FusionParams& head() { return head_; }
  const FusionParams& head() const { return head_; }

 private:
  ModelConfig cfg_;
  VitParams vit_;
  std::optional<DsgeParams> dsge_;
  std::optional<MlpGazeParams> mlp_;
  FusionParams head_;
};

}  // namespace gzf

#pragma once

#include <string>
#include <vector>

#include "gzf/autodiff.hpp"
#include "gzf/params.hpp"

namespace gzf {

/// Weights of one post-norm encoder layer: multi-head self-attention with
/// bias-free Q/K/V/output projections, then a ReLU feed-forward block, each
/// followed by residual + LayerNorm.
struct EncoderLayerParams {
  Tensor w_q, w_k, w_v, w_o;      // d x d
  Tensor ln1_gamma, ln1_beta;     // d
  Tensor ffn_w1, ffn_b1;          // ffn x d, ffn
  Tensor ffn_w2, ffn_b2;          // d x ffn, d
  Tensor ln2_gamma, ln2_beta;     // d

  static EncoderLayerParams init(Index width, Index ffn_hidden, double stddev, Rng& rng);
  void collect(ParamList& out, const std::string& prefix);
  Index width() const { return w_q.extent(0); }
};

struct EncoderLayerOptions {
  Index heads = 1;
  double dropout = 0.0;
  bool training = false;
  double ln_eps = 1e-5;
};

/// Per-head attention matrices captured during a forward pass, one entry per
/// (layer, head) in execution order.
struct AttentionTrace {
  std::vector<Matrix> maps;
};

/// Multi-head self-attention: per head softmax(Q_h K_h^T / sqrt(d_h)) V_h,
/// heads concatenated and projected by W_O.
Var multi_head_attention(Var x, const EncoderLayerParams& p, Index heads, AttentionTrace* trace = nullptr);

/// x -> LN(x + Drop(MHA(x))) -> LN(. + Drop(FFN(.))). Shape-preserving.
Var encoder_layer(Var x, const EncoderLayerParams& p, const EncoderLayerOptions& opt, Rng& rng,
                  AttentionTrace* trace = nullptr);

}  // namespace gzf

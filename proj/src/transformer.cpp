#include "gzf/transformer.hpp"

#include <cmath>

namespace gzf {

EncoderLayerParams EncoderLayerParams::init(Index width, Index ffn_hidden, double stddev, Rng& rng) {
  EncoderLayerParams p;
  p.w_q = normal_tensor({width, width}, stddev, rng);
  p.w_k = normal_tensor({width, width}, stddev, rng);
  p.w_v = normal_tensor({width, width}, stddev, rng);
  p.w_o = normal_tensor({width, width}, stddev, rng);
  p.ln1_gamma = ones({width});
  p.ln1_beta = Tensor({width});
  p.ffn_w1 = normal_tensor({ffn_hidden, width}, stddev, rng);
  p.ffn_b1 = Tensor({ffn_hidden});
  p.ffn_w2 = normal_tensor({width, ffn_hidden}, stddev, rng);
  p.ffn_b2 = Tensor({width});
  p.ln2_gamma = ones({width});
  p.ln2_beta = Tensor({width});
  return p;
}

void EncoderLayerParams::collect(ParamList& out, const std::string& prefix) {
  out.push_back({prefix + "w_q", &w_q});
  out.push_back({prefix + "w_k", &w_k});
  out.push_back({prefix + "w_v", &w_v});
  out.push_back({prefix + "w_o", &w_o});
  out.push_back({prefix + "ln1_gamma", &ln1_gamma});
  out.push_back({prefix + "ln1_beta", &ln1_beta});
  out.push_back({prefix + "ffn_w1", &ffn_w1});
  out.push_back({prefix + "ffn_b1", &ffn_b1});
  out.push_back({prefix + "ffn_w2", &ffn_w2});
  out.push_back({prefix + "ffn_b2", &ffn_b2});
  out.push_back({prefix + "ln2_gamma", &ln2_gamma});
  out.push_back({prefix + "ln2_beta", &ln2_beta});
}

Var multi_head_attention(Var x, const EncoderLayerParams& p, Index heads, AttentionTrace* trace) {
  Graph& g = x.graph();
  const Index d = p.width();
  if (x.cols() != d) {
    throw DimensionError("attention: input width " + std::to_string(x.cols()) + " != layer width " +
                         std::to_string(d));
  }
  if (heads <= 0 || d % heads != 0) {
    throw DimensionError("attention: width " + std::to_string(d) + " not divisible by " +
                         std::to_string(heads) + " heads");
  }
  const Index dh = d / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  const Var q = matmul_nt(x, g.param(p.w_q));
  const Var k = matmul_nt(x, g.param(p.w_k));
  const Var v = matmul_nt(x, g.param(p.w_v));

  std::vector<Var> outs;
  outs.reserve(static_cast<std::size_t>(heads));
  for (Index h = 0; h < heads; ++h) {
    const Var qh = heads == 1 ? q : slice_cols(q, h * dh, dh);
    const Var kh = heads == 1 ? k : slice_cols(k, h * dh, dh);
    const Var vh = heads == 1 ? v : slice_cols(v, h * dh, dh);
    const Var attn = softmax_rows(scale(matmul_nt(qh, kh), inv_sqrt));
    if (trace) trace->maps.push_back(attn.value());
    outs.push_back(matmul(attn, vh));
  }
  const Var merged = heads == 1 ? outs.front() : concat_cols(outs);
  return matmul_nt(merged, g.param(p.w_o));
}

Var encoder_layer(Var x, const EncoderLayerParams& p, const EncoderLayerOptions& opt, Rng& rng,
                  AttentionTrace* trace) {
  Graph& g = x.graph();
  const Var attn = dropout(multi_head_attention(x, p, opt.heads, trace), opt.dropout, opt.training, rng);
  const Var h1 = layer_norm(add(x, attn), g.param(p.ln1_gamma), g.param(p.ln1_beta), opt.ln_eps);

  const Var hidden = relu(linear(h1, g.param(p.ffn_w1), g.param(p.ffn_b1)));
  const Var ffn = dropout(linear(hidden, g.param(p.ffn_w2), g.param(p.ffn_b2)), opt.dropout, opt.training, rng);
  return layer_norm(add(h1, ffn), g.param(p.ln2_gamma), g.param(p.ln2_beta), opt.ln_eps);
}

}  // namespace gzf

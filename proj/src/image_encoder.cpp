#include "gzf/image_encoder.hpp"

namespace gzf {

void VitConfig::validate() const {
  if (image_size < 1 || patch_size < 1 || dim < 1 || ffn_hidden < 1) {
    throw ConfigError("vit: all dimensions must be positive");
  }
  if (image_size % patch_size != 0) {
    throw ConfigError("vit: image size " + std::to_string(image_size) + " not divisible by patch size " +
                      std::to_string(patch_size));
  }
  if (layers < 1) throw ConfigError("vit: need at least one encoder layer");
  if (heads < 1 || dim % heads != 0) {
    throw ConfigError("vit: dim " + std::to_string(dim) + " not divisible by heads " + std::to_string(heads));
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("vit: dropout must lie in [0, 1)");
  if (!(init_std > 0.0)) throw ConfigError("vit: init_std must be positive");
}

VitParams VitParams::init(const VitConfig& cfg, Rng& rng) {
  cfg.validate();
  VitParams p;
  p.patch_w = normal_tensor({cfg.dim, cfg.patch_dim()}, cfg.init_std, rng);
  p.patch_b = Tensor({cfg.dim});
  p.cls_token = normal_tensor({cfg.dim}, cfg.init_std, rng);
  p.pos_embed = normal_tensor({cfg.seq_len(), cfg.dim}, cfg.init_std, rng);
  for (Index l = 0; l < cfg.layers; ++l) {
    p.layers.push_back(EncoderLayerParams::init(cfg.dim, cfg.ffn_hidden, cfg.init_std, rng));
  }
  p.ln_gamma = ones({cfg.dim});
  p.ln_beta = Tensor({cfg.dim});
  return p;
}

void VitParams::collect(ParamList& out, const std::string& prefix) {
  out.push_back({prefix + "patch_w", &patch_w});
  out.push_back({prefix + "patch_b", &patch_b});
  out.push_back({prefix + "cls_token", &cls_token});
  out.push_back({prefix + "pos_embed", &pos_embed});
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].collect(out, prefix + "layer" + std::to_string(l) + ".");
  }
  out.push_back({prefix + "ln_gamma", &ln_gamma});
  out.push_back({prefix + "ln_beta", &ln_beta});
}

Matrix patchify(const Tensor& image, Index patch_size) {
  if (image.rank() != 3 || image.extent(0) != 3) {
    throw DimensionError("patchify: expected a 3 x H x W image, got " + shape_string(image.shape()));
  }
  const Index h = image.extent(1);
  const Index w = image.extent(2);
  if (patch_size < 1 || h % patch_size != 0 || w % patch_size != 0) {
    throw DimensionError("patchify: image " + shape_string(image.shape()) + " not divisible by patch size " +
                         std::to_string(patch_size));
  }
  const Index gh = h / patch_size;
  const Index gw = w / patch_size;
  const Index pp = patch_size * patch_size;
  const Matrix& px = image.matrix();  // 3 x (H * W)
  Matrix out(gh * gw, 3 * pp);
  for (Index py = 0; py < gh; ++py) {
    for (Index pxi = 0; pxi < gw; ++pxi) {
      const Index patch = py * gw + pxi;
      for (Index c = 0; c < 3; ++c) {
        for (Index y = 0; y < patch_size; ++y) {
          const Index src = (py * patch_size + y) * w + pxi * patch_size;
          out.row(patch).segment(c * pp + y * patch_size, patch_size) = px.row(c).segment(src, patch_size);
        }
      }
    }
  }
  return out;
}

VitOutput vit_encode(Graph& g, const Tensor& image, const VitParams& p, const VitConfig& cfg, bool training,
                     Rng& rng, AttentionTrace* trace) {
  if (image.rank() != 3 || image.extent(1) != cfg.image_size || image.extent(2) != cfg.image_size) {
    throw DimensionError("vit: expected a 3 x " + std::to_string(cfg.image_size) + " x " +
                         std::to_string(cfg.image_size) + " image, got " + shape_string(image.shape()));
  }
  const Var patches = g.constant(patchify(image, cfg.patch_size));
  const Var embedded = linear(patches, g.param(p.patch_w), g.param(p.patch_b));
  Var x = add(concat_rows(g.param(p.cls_token), embedded), g.param(p.pos_embed));

  const EncoderLayerOptions opt{cfg.heads, cfg.dropout, training};
  for (const auto& layer : p.layers) x = encoder_layer(x, layer, opt, rng, trace);

  const Var tokens = layer_norm(x, g.param(p.ln_gamma), g.param(p.ln_beta));
  return {row(tokens, 0), tokens};
}

}  // namespace gzf

#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "gzf/transformer.hpp"
#include "test_util.hpp"

using namespace gzf;

namespace {

// Plain-loop reference of one post-norm encoder layer, written without any
// library kernel: per-head scaled dot-product attention, output projection,
// residual + LayerNorm, ReLU FFN, residual + LayerNorm.
using Grid = std::vector<std::vector<double>>;

Grid to_grid(const Matrix& m) {
  Grid g(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) g[i][j] = m(i, j);
  return g;
}

// x W^T (+ b)
Grid affine(const Grid& x, const Tensor& w, const Tensor* b) {
  const std::size_t out = static_cast<std::size_t>(w.extent(0));
  const std::size_t in = static_cast<std::size_t>(w.extent(1));
  Grid y(x.size(), std::vector<double>(out, 0.0));
  for (std::size_t r = 0; r < x.size(); ++r) {
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b ? (*b)[static_cast<Index>(o)] : 0.0;
      for (std::size_t k = 0; k < in; ++k) acc += x[r][k] * w.matrix()(static_cast<Index>(o), static_cast<Index>(k));
      y[r][o] = acc;
    }
  }
  return y;
}

Grid norm(const Grid& x, const Tensor& gamma, const Tensor& beta, double eps) {
  Grid y = x;
  for (std::size_t r = 0; r < x.size(); ++r) {
    const double n = static_cast<double>(x[r].size());
    double mean = 0.0;
    for (double v : x[r]) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x[r]) var += (v - mean) * (v - mean);
    var /= n;
    for (std::size_t j = 0; j < x[r].size(); ++j) {
      y[r][j] = (x[r][j] - mean) / std::sqrt(var + eps) * gamma[static_cast<Index>(j)] + beta[static_cast<Index>(j)];
    }
  }
  return y;
}

Grid oracle_layer(const Grid& x, const EncoderLayerParams& p, std::size_t heads, std::vector<Grid>* maps) {
  const std::size_t L = x.size();
  const std::size_t d = x[0].size();
  const std::size_t dh = d / heads;
  const Grid q = affine(x, p.w_q, nullptr);
  const Grid k = affine(x, p.w_k, nullptr);
  const Grid v = affine(x, p.w_v, nullptr);
  Grid concat(L, std::vector<double>(d, 0.0));
  for (std::size_t h = 0; h < heads; ++h) {
    Grid a(L, std::vector<double>(L, 0.0));
    for (std::size_t i = 0; i < L; ++i) {
      double mx = -1e300;
      for (std::size_t j = 0; j < L; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < dh; ++c) s += q[i][h * dh + c] * k[j][h * dh + c];
        a[i][j] = s / std::sqrt(static_cast<double>(dh));
        mx = std::max(mx, a[i][j]);
      }
      double z = 0.0;
      for (std::size_t j = 0; j < L; ++j) z += (a[i][j] = std::exp(a[i][j] - mx));
      for (std::size_t j = 0; j < L; ++j) a[i][j] /= z;
      for (std::size_t c = 0; c < dh; ++c) {
        double acc = 0.0;
        for (std::size_t j = 0; j < L; ++j) acc += a[i][j] * v[j][h * dh + c];
        concat[i][h * dh + c] = acc;
      }
    }
    if (maps) maps->push_back(a);
  }
  Grid attn = affine(concat, p.w_o, nullptr);
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t c = 0; c < d; ++c) attn[i][c] += x[i][c];
  const Grid x1 = norm(attn, p.ln1_gamma, p.ln1_beta, 1e-5);
  Grid hidden = affine(x1, p.ffn_w1, &p.ffn_b1);
  for (auto& r : hidden)
    for (double& vv : r) vv = std::max(0.0, vv);
  Grid ffn = affine(hidden, p.ffn_w2, &p.ffn_b2);
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t c = 0; c < d; ++c) ffn[i][c] += x1[i][c];
  return norm(ffn, p.ln2_gamma, p.ln2_beta, 1e-5);
}

EncoderLayerParams random_layer(Index d, Index ffn, Rng& rng) {
  EncoderLayerParams p = EncoderLayerParams::init(d, ffn, 0.4, rng);
  ParamList list;
  p.collect(list, "");
  std::normal_distribution<double> n(0.0, 0.2);
  for (auto& ref : list)
    for (double& v : ref.tensor->values()) v += n(rng);
  return p;
}

}  // namespace

TEST_CASE("encoder layer matches the plain-loop oracle") {
  Rng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const EncoderLayerParams p = random_layer(8, 16, rng);
    const Matrix x = testing::random_matrix(4, 8, rng);
    Graph g;
    AttentionTrace trace;
    const Matrix got = encoder_layer(g.constant(x), p, {2, 0.1, false, 1e-5}, rng, &trace).value();
    std::vector<Grid> maps;
    const Grid want = oracle_layer(to_grid(x), p, 2, &maps);
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 8; ++j) CHECK(std::abs(got(i, j) - want[i][j]) < 1e-10);
    REQUIRE(trace.maps.size() == 2);
    for (std::size_t h = 0; h < 2; ++h)
      for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j) CHECK(std::abs(trace.maps[h](i, j) - maps[h][i][j]) < 1e-12);
  }
}

TEST_CASE("attention structure") {
  Rng rng(5);
  const EncoderLayerParams p = random_layer(8, 16, rng);
  Graph g;

  SUBCASE("identical rows give uniform attention") {
    Matrix x(6, 8);
    const Matrix r = testing::random_matrix(1, 8, rng);
    for (Index i = 0; i < 6; ++i) x.row(i) = r;
    AttentionTrace trace;
    multi_head_attention(g.constant(x), p, 2, &trace);
    for (const auto& a : trace.maps) CHECK((a.array() - 1.0 / 6.0).abs().maxCoeff() < 1e-15);
  }

  SUBCASE("maps are row-stochastic and shape is preserved") {
    const Matrix x = testing::random_matrix(7, 8, rng, 3.0);
    AttentionTrace trace;
    Var y = encoder_layer(g.constant(x), p, {4, 0.0, false, 1e-5}, rng, &trace);
    CHECK(y.rows() == 7);
    CHECK(y.cols() == 8);
    CHECK(trace.maps.size() == 4);
    for (const auto& a : trace.maps) {
      CHECK(a.minCoeff() >= 0.0);
      CHECK((a.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
    }
  }

  SUBCASE("heads must divide the width") {
    const Matrix x = testing::random_matrix(3, 8, rng);
    CHECK_THROWS_AS(multi_head_attention(g.constant(x), p, 3), DimensionError);
  }

  SUBCASE("eval mode is deterministic and training mode drops") {
    const Matrix x = testing::random_matrix(5, 8, rng);
    Rng a(1), b(2);
    const Matrix e1 = encoder_layer(g.constant(x), p, {2, 0.5, false, 1e-5}, a).value();
    const Matrix e2 = encoder_layer(g.constant(x), p, {2, 0.5, false, 1e-5}, b).value();
    CHECK(e1 == e2);
    const Matrix t1 = encoder_layer(g.constant(x), p, {2, 0.5, true, 1e-5}, a).value();
    CHECK(t1 != e1);
  }
}

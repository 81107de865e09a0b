#include "doctest.h"

#include <array>
#include <cmath>
#include <functional>
#include <random>

#include "gzf/grad_check.hpp"
#include "gzf/transformer.hpp"
#include "test_util.hpp"

using namespace gzf;

TEST_CASE("backward examples") {
  SUBCASE("sum gives all ones") {
    Tensor x = Tensor::vector({1.5, -2.0, 4.0});
    Graph g;
    g.backward(sum(g.param(x)));
    CHECK(*g.grad(x) == Matrix::Ones(1, 3));
  }
  SUBCASE("sum of squares") {
    Tensor x = Tensor::vector({1.0, 2.0});
    Graph g;
    Var v = g.param(x);
    g.backward(sum(mul(v, v)));
    CHECK((*g.grad(x))(0, 0) == 2.0);
    CHECK((*g.grad(x))(0, 1) == 4.0);
  }
  SUBCASE("fan-out accumulates") {
    Tensor x = Tensor::vector({1.0, 2.0, 3.0});
    Graph g;
    Var v = g.param(x);
    g.backward(sum(add(v, v)));
    CHECK(*g.grad(x) == Matrix::Constant(1, 3, 2.0));
  }
  SUBCASE("binding twice gives one leaf") {
    Tensor x = Tensor::vector({3.0});
    Graph g;
    CHECK(g.param(x).id() == g.param(x).id());
  }
}

TEST_CASE("backward contract") {
  Tensor x = Tensor::vector({1.0, 2.0});
  Graph g;
  Var v = g.param(x);
  CHECK_THROWS_AS(g.backward(v), DimensionError);  // not a scalar
  Var s = sum(v);
  g.backward(s);
  CHECK_THROWS_AS(g.backward(s), GraphError);  // second sweep

  Graph h;
  Var c = sum(h.constant(x));
  CHECK_THROWS_AS(h.backward(c), GraphError);  // nothing to differentiate
}

TEST_CASE("cross_entropy examples") {
  Graph g;
  const std::array<int, 2> labels = {0, 2};
  Matrix confident(2, 3);
  confident << 60, 0, 0, 0, 0, 60;
  CHECK(cross_entropy(g.constant(confident), labels).value()(0, 0) == doctest::Approx(0.0).epsilon(1e-20));

  const std::array<int, 1> one = {7};
  const double uniform = cross_entropy(g.constant(Matrix::Zero(1, 10)), one).value()(0, 0);
  CHECK(uniform == doctest::Approx(std::log(10.0)).epsilon(1e-15));
  CHECK(uniform == doctest::Approx(2.302585).epsilon(1e-6));

  const std::array<int, 1> bad = {10};
  CHECK_THROWS_AS(cross_entropy(g.constant(Matrix::Zero(1, 10)), bad), DataError);

  Matrix probs(1, 10);
  probs.setConstant(0.1);
  CHECK(cross_entropy_probs(probs, one) == doctest::Approx(std::log(10.0)));
}

TEST_CASE("dropout") {
  Rng rng(11);
  Graph g;
  const Matrix x = Matrix::Constant(1, 100000, 1.0);
  Var in = g.constant(x);
  CHECK(dropout(in, 0.5, false, rng).value() == x);
  CHECK(dropout(in, 0.0, true, rng).value() == x);
  const Matrix y = dropout(in, 0.5, true, rng).value();
  const double zeros = static_cast<double>((y.array() == 0.0).count()) / static_cast<double>(y.size());
  CHECK(std::abs(zeros - 0.5) < 0.01);
  CHECK(((y.array() == 0.0) || (y.array() == 2.0)).all());
  CHECK_THROWS_AS(dropout(in, 1.0, true, rng), ConfigError);
}

TEST_CASE("grad_check contract") {
  Tensor w = Tensor::vector({0.3, -1.2, 2.0});
  ParamList params{{"w", &w}};
  const Tensor c = Tensor::vector({1.0, 2.0, 3.0});
  LossBuilder linear_loss = [&](Graph& g) { return sum(mul(g.param(w), g.constant(c))); };
  CHECK(grad_check(linear_loss, params, 1e-6).max_rel_error < 1e-10);
  CHECK_THROWS_AS(grad_check(linear_loss, params, 1e-2), ConfigError);
  CHECK_THROWS_AS(grad_check(linear_loss, params, 1e-8), ConfigError);

  const Tensor before = w;
  LossBuilder cubic = [&](Graph& g) {
    Var v = g.param(w);
    return sum(mul(mul(v, v), v));
  };
  grad_check(cubic, params);
  CHECK(w == before);  // restored bit-exactly
}

namespace {

// Builds a scalar loss from a random composition of ops on one parameter.
Var random_program(Graph& g, const Tensor& x, const Tensor& other, int kind) {
  Var v = g.param(x);
  Var o = g.constant(other);
  switch (kind % 10) {
    case 0: return sum(mul(matmul(matmul_nt(o, o), v), v));
    case 1: return sum(mul(softmax_rows(v), o));
    case 2: {
      Matrix gamma = Matrix::Constant(1, x.matrix().cols(), 1.3);
      Matrix beta = Matrix::Constant(1, x.matrix().cols(), -0.2);
      return sum(mul(layer_norm(v, g.constant(gamma), g.constant(beta)), o));
    }
    case 3: return sum(mul(relu(add(v, o)), o));
    case 4: return sum(mul(concat_cols(v, o), concat_cols(o, v)));
    case 5: return sum(mul(concat_rows(v, o), concat_rows(o, o)));
    case 6: return sum(mul(slice_cols(v, 1, 2), slice_cols(o, 0, 2)));
    case 7: {
      const std::array<int, 2> labels = {1, 0};
      return cross_entropy(add(v, o), labels);
    }
    case 8: return sum(scale(mul(reshape(v, x.matrix().cols(), x.matrix().rows()),
                                 reshape(o, x.matrix().cols(), x.matrix().rows())),
                             -0.7));
    default: return sum(mul(add_bias(mul(v, v), row(v, 1)), o));
  }
}

}  // namespace

TEST_CASE("reverse mode matches finite differences on random programs") {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 120; ++trial) {
    Tensor x = testing::random_tensor({2, 4}, rng);
    const Tensor other = testing::random_tensor({2, 4}, rng);
    ParamList params{{"x", &x}};
    const int kind = trial;
    const GradCheckResult r = grad_check([&](Graph& g) { return random_program(g, x, other, kind); }, params);
    INFO("program " << kind % 10 << " worst " << r.worst_index);
    CHECK(r.max_rel_error < 1e-6);
    ++checked;
  }
  CHECK(checked >= 100);
}

TEST_CASE("corrupted layer-norm rule is caught") {
  std::mt19937_64 rng(4);
  Tensor x = testing::random_tensor({3, 5}, rng);
  Tensor gamma = testing::random_tensor({5}, rng);
  Tensor beta = testing::random_tensor({5}, rng);
  const Tensor target = testing::random_tensor({3, 5}, rng);
  ParamList params{{"x", &x}, {"gamma", &gamma}, {"beta", &beta}};
  auto loss = [&](Graph& g) {
    return sum(mul(layer_norm(g.param(x), g.param(gamma), g.param(beta)), g.constant(target)));
  };
  CHECK(grad_check(loss, params).max_rel_error < 1e-6);
  debug::set_backward_fault(true);
  const GradCheckResult bad = grad_check(loss, params);
  debug::set_backward_fault(false);
  CHECK(bad.max_rel_error > 1e-3);
  CHECK(bad.worst_param == "gamma");
}

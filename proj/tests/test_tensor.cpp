#include "doctest.h"

#include <cmath>
#include <random>

#include "gzf/autodiff.hpp"
#include "test_util.hpp"

using namespace gzf;

TEST_CASE("tensor shapes and storage") {
  Tensor t({3, 4, 5});
  CHECK(t.rank() == 3);
  CHECK(t.size() == 60);
  CHECK(t.matrix().rows() == 3);
  CHECK(t.matrix().cols() == 20);
  CHECK(t.extent(2) == 5);

  Tensor v = Tensor::vector({1.0, 2.0, 3.0});
  CHECK(v.shape() == Shape{3});
  CHECK(v.matrix().rows() == 1);
  CHECK(v[2] == 3.0);

  CHECK_THROWS_AS(Tensor(Shape{}), DimensionError);
  CHECK_THROWS_AS(Tensor::matrix({{1.0, 2.0}, {3.0}}), DimensionError);
  CHECK_THROWS_AS(Tensor(Shape{2, 2}, Matrix::Zero(1, 3)), DimensionError);
}

TEST_CASE("matmul examples") {
  Graph g;
  const Tensor a = Tensor::matrix({{1, 2}, {3, 4}});
  const Tensor b = Tensor::matrix({{5, 6}, {7, 8}});
  Matrix expected(2, 2);
  expected << 19, 22, 43, 50;
  CHECK(matmul(g.constant(a), g.constant(b)).value() == expected);

  const Matrix eye = Matrix::Identity(2, 2);
  CHECK(matmul(g.constant(eye), g.constant(b)).value() == b.matrix());

  const Tensor c = Tensor::matrix({{1, 2, 3}});
  CHECK_THROWS_AS(matmul(g.constant(c), g.constant(b)), DimensionError);
}

TEST_CASE("softmax_rows examples") {
  Matrix x(2, 4);
  x << 0, 0, 0, 0, 0, std::log(3.0), -1e9, -1e9;
  const Matrix s = softmax_rows(x);
  for (Index j = 0; j < 4; ++j) CHECK(s(0, j) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(s(1, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(s(1, 1) == doctest::Approx(0.75).epsilon(1e-14));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix r = testing::random_matrix(3, 7, rng, 5.0);
    const Matrix p = softmax_rows(r);
    const Matrix shifted = softmax_rows((r.array() + 123.5).matrix());
    CHECK((p - shifted).cwiseAbs().maxCoeff() < 1e-12);
    for (Index i = 0; i < 3; ++i) CHECK(std::abs(p.row(i).sum() - 1.0) < 1e-12);
    CHECK(p.minCoeff() >= 0.0);
  }
}

TEST_CASE("layer_norm examples") {
  const Eigen::RowVectorXd gamma = Eigen::RowVectorXd::Ones(4);
  const Eigen::RowVectorXd beta = Eigen::RowVectorXd::Zero(4);
  Matrix constant = Matrix::Constant(1, 4, 3.7);
  const Matrix out = layer_norm_rows(constant, gamma, beta, 1e-5);
  CHECK(out.cwiseAbs().maxCoeff() <= std::sqrt(1e-5));

  Matrix pm(1, 2);
  pm << 1, -1;
  const Matrix n = layer_norm_rows(pm, Eigen::RowVectorXd::Ones(2), Eigen::RowVectorXd::Zero(2), 1e-14);
  CHECK(n(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(n(0, 1) == doctest::Approx(-1.0).epsilon(1e-12));

  std::mt19937_64 rng(9);
  const Matrix x = testing::random_matrix(5, 4, rng);
  Eigen::RowVectorXd b(4);
  b << 0.1, -0.2, 0.3, 0.4;
  const Matrix z = layer_norm_rows(x, Eigen::RowVectorXd::Zero(4), b, 1e-5);
  for (Index i = 0; i < 5; ++i) CHECK(z.row(i) == b);
}

TEST_CASE("elementwise and structural ops") {
  Graph g;
  CHECK(relu(g.constant(Tensor::vector({-1, 0, 2}))).value() == Tensor::vector({0, 0, 2}).matrix());

  std::mt19937_64 rng(1);
  const Matrix x = testing::random_matrix(3, 5, rng);
  CHECK(add(g.constant(x), g.constant(Matrix::Zero(3, 5))).value() == x);

  const Var joined = concat_cols(g.constant(Matrix::Ones(1, 768)), g.constant(Matrix::Zero(1, 768)));
  CHECK(joined.cols() == 1536);
  CHECK(joined.value().leftCols(768).isOnes());
  CHECK(slice_cols(joined, 768, 768).value().isZero());
  CHECK_THROWS_AS(add(g.constant(x), g.constant(Matrix::Zero(3, 4))), DimensionError);
}

TEST_CASE("matmul is associative up to rounding") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix a = testing::random_matrix(3, 4, rng);
    const Matrix b = testing::random_matrix(4, 2, rng);
    const Matrix c = testing::random_matrix(2, 5, rng);
    Graph g;
    const Matrix left = matmul(matmul(g.constant(a), g.constant(b)), g.constant(c)).value();
    const Matrix right = matmul(g.constant(a), matmul(g.constant(b), g.constant(c))).value();
    CHECK((left - right).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + left.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("ops reject non-finite results") {
  Graph g;
  Matrix big = Matrix::Constant(1, 2, 1e200);
  CHECK_THROWS_AS(matmul_nt(g.constant(big), g.constant(big)), NumericError);
  Matrix nan = Matrix::Constant(1, 1, std::nan(""));
  CHECK_THROWS_AS(scale(g.constant(nan), 2.0), NumericError);
}

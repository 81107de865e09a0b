#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gzf/error.hpp"

namespace gzf {

using Index = Eigen::Index;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = RowMatrix<double>;

using Shape = std::vector<Index>;

inline std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

inline std::string shape_string(Index rows, Index cols) { return shape_string(Shape{rows, cols}); }

/// Dense row-major tensor. Storage is a 2-D matrix whose row count is the
/// leading extent (1 for rank-1 tensors) and whose column count is the
/// product of the remaining extents, so every rank maps onto Eigen directly.
template <typename Scalar>
class BasicTensor {
 public:
  using MatrixType = RowMatrix<Scalar>;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape) : shape_(std::move(shape)) {
    check_shape(shape_);
    auto [r, c] = storage_extents(shape_);
    data_ = MatrixType::Zero(r, c);
  }

  BasicTensor(Shape shape, MatrixType data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    auto [r, c] = storage_extents(shape_);
    if (data_.size() != r * c) {
      throw DimensionError("tensor data of size " + std::to_string(data_.size()) +
                           " does not match shape " + shape_string(shape_));
    }
    if (data_.rows() != r) data_ = Eigen::Map<const MatrixType>(data_.data(), r, c).eval();
  }

  static BasicTensor from_matrix(MatrixType m) {
    Shape s{m.rows(), m.cols()};
    return BasicTensor(std::move(s), std::move(m));
  }

  static BasicTensor vector(std::initializer_list<Scalar> values) {
    MatrixType m(1, static_cast<Index>(values.size()));
    Index i = 0;
    for (Scalar v : values) m(0, i++) = v;
    Shape s{m.cols()};
    return BasicTensor(std::move(s), std::move(m));
  }

  static BasicTensor from_row(const Eigen::Ref<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>& v) {
    return BasicTensor(Shape{v.size()}, MatrixType(v));
  }

  static BasicTensor matrix(std::initializer_list<std::initializer_list<Scalar>> rows) {
    const Index r = static_cast<Index>(rows.size());
    const Index c = r ? static_cast<Index>(rows.begin()->size()) : 0;
    MatrixType m(r, c);
    Index i = 0;
    for (const auto& row : rows) {
      if (static_cast<Index>(row.size()) != c) throw DimensionError("ragged matrix literal");
      Index j = 0;
      for (Scalar v : row) m(i, j++) = v;
      ++i;
    }
    return from_matrix(std::move(m));
  }

  const Shape& shape() const noexcept { return shape_; }
  Index rank() const noexcept { return static_cast<Index>(shape_.size()); }
  Index size() const noexcept { return data_.size(); }
  Index extent(Index axis) const { return shape_.at(static_cast<std::size_t>(axis)); }

  MatrixType& matrix() noexcept { return data_; }
  const MatrixType& matrix() const noexcept { return data_; }

  std::span<Scalar> values() noexcept { return {data_.data(), static_cast<std::size_t>(data_.size())}; }
  std::span<const Scalar> values() const noexcept {
    return {data_.data(), static_cast<std::size_t>(data_.size())};
  }

  Scalar& operator[](Index i) { return data_.data()[i]; }
  Scalar operator[](Index i) const { return data_.data()[i]; }

  bool all_finite() const { return data_.allFinite(); }

  bool same_shape(const BasicTensor& other) const { return shape_ == other.shape_; }

  friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  static void check_shape(const Shape& shape) {
    if (shape.empty()) throw DimensionError("tensor shape must have at least one extent");
    for (Index e : shape) {
      if (e <= 0) throw DimensionError("tensor extents must be positive, got " + shape_string(shape));
    }
  }

  static std::pair<Index, Index> storage_extents(const Shape& shape) {
    if (shape.size() == 1) return {1, shape[0]};
    Index rest = std::accumulate(shape.begin() + 1, shape.end(), Index{1}, std::multiplies<>());
    return {shape[0], rest};
  }

  Shape shape_;
  MatrixType data_;
};

using Tensor = BasicTensor<double>;

// Value-level kernels shared by the autodiff graph. They work on any dense
// Eigen expression and return evaluated row-major matrices.

template <typename Derived>
RowMatrix<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  RowMatrix<Scalar> out = x;
  for (Index r = 0; r < out.rows(); ++r) {
    const Scalar m = out.row(r).maxCoeff();
    out.row(r) = (out.row(r).array() - m).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

template <typename Derived>
RowMatrix<typename Derived::Scalar> log_softmax_rows(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  RowMatrix<Scalar> out = x;
  for (Index r = 0; r < out.rows(); ++r) {
    const Scalar m = out.row(r).maxCoeff();
    const Scalar lse = m + std::log((out.row(r).array() - m).exp().sum());
    out.row(r).array() -= lse;
  }
  return out;
}

/// Per-row standardization (population variance) followed by an affine map.
/// `xhat` and `inv_std` receive the intermediates needed by the backward rule.
template <typename Derived, typename G, typename B>
RowMatrix<typename Derived::Scalar> layer_norm_rows(const Eigen::MatrixBase<Derived>& x,
                                                    const Eigen::MatrixBase<G>& gamma,
                                                    const Eigen::MatrixBase<B>& beta,
                                                    typename Derived::Scalar eps,
                                                    RowMatrix<typename Derived::Scalar>* xhat = nullptr,
                                                    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>* inv_std = nullptr) {
  using Scalar = typename Derived::Scalar;
  const Index rows = x.rows();
  const Index cols = x.cols();
  RowMatrix<Scalar> normalized(rows, cols);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> istd(rows);
  for (Index r = 0; r < rows; ++r) {
    const Scalar mean = x.row(r).mean();
    const auto centered = (x.row(r).array() - mean).eval();
    const Scalar var = centered.square().mean();
    istd(r) = Scalar(1) / std::sqrt(var + eps);
    normalized.row(r) = centered * istd(r);
  }
  RowMatrix<Scalar> out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    out.row(r) = normalized.row(r).cwiseProduct(gamma.derived().reshaped().transpose()) +
                 beta.derived().reshaped().transpose();
  }
  if (xhat) *xhat = std::move(normalized);
  if (inv_std) *inv_std = std::move(istd);
  return out;
}

}  // namespace gzf

#pragma once

#include <random>
#include <string>
#include <vector>

#include "gzf/tensor.hpp"

namespace gzf {

/// Named handle to a parameter tensor owned by a model component.
struct ParamRef {
  std::string name;
  Tensor* tensor;
};

using ParamList = std::vector<ParamRef>;

/// Fills `t` with N(0, stddev^2) draws in storage order.
template <typename Urbg>
void fill_normal(Tensor& t, double stddev, Urbg& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& v : t.values()) v = dist(rng);
}

inline Tensor normal_tensor(Shape shape, double stddev, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  fill_normal(t, stddev, rng);
  return t;
}

inline Tensor ones(Shape shape) {
  Tensor t(std::move(shape));
  t.matrix().setOnes();
  return t;
}

/// Total number of scalar parameters.
inline Index parameter_count(const ParamList& params) {
  Index n = 0;
  for (const auto& p : params) n += p.tensor->size();
  return n;
}

}  // namespace gzf

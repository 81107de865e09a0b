#pragma once

#include <functional>
#include <string>

#include "gzf/autodiff.hpp"
#include "gzf/params.hpp"

namespace gzf {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  Index worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
  Index coordinates = 0;
};

/// Builds a scalar loss in a fresh graph. Called once for the reverse pass and
/// twice per coordinate for central differences.
using LossBuilder = std::function<Var(Graph&)>;

inline constexpr double kGradCheckMinEps = 1e-6;
inline constexpr double kGradCheckMaxEps = 1e-3;
/// Small enough that truncation error stays below 1e-4 relative, large enough
/// that cancellation noise on gradients of order 1e-7 does too.
inline constexpr double kDefaultGradCheckEps = 3e-5;

/// Compares reverse-mode gradients of `loss` with central differences over
/// every coordinate of `params`. Relative error is |a - b| / max(1e-8, |a| + |b|).
/// Parameters are restored bit-exactly before returning.
GradCheckResult grad_check(const LossBuilder& loss, const ParamList& params, double eps = kDefaultGradCheckEps);

}  // namespace gzf

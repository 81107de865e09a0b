#include "gzf/grad_check.hpp"

#include <cmath>

namespace gzf {

namespace {

double evaluate(const LossBuilder& loss) {
  Graph g;
  const Var v = loss(g);
  if (v.rows() != 1 || v.cols() != 1) throw DimensionError("grad_check: loss must be scalar");
  const double out = v.value()(0, 0);
  if (!std::isfinite(out)) throw NumericError("grad_check: loss is not finite");
  return out;
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& loss, const ParamList& params, double eps) {
  if (!(eps >= kGradCheckMinEps && eps <= kGradCheckMaxEps)) {
    throw ConfigError("grad_check: eps " + std::to_string(eps) + " outside [1e-6, 1e-3]");
  }

  std::vector<Matrix> analytic;
  {
    Graph g;
    const Var v = loss(g);
    if (!std::isfinite(v.value()(0, 0))) throw NumericError("grad_check: loss is not finite");
    g.backward(v);
    for (const auto& p : params) analytic.push_back(g.grad_or_zero(*p.tensor));
  }

  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& t = *params[k].tensor;
    for (Index i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + eps;
      const double up = evaluate(loss);
      t[i] = saved - eps;
      const double down = evaluate(loss);
      t[i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[k].data()[i];
      const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      ++result.coordinates;
      if (rel > result.max_rel_error || result.worst_index < 0) {
        result.max_rel_error = rel;
        result.worst_param = params[k].name;
        result.worst_index = i;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace gzf

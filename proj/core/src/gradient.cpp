#include "meg/gradient.hpp"

#include <cmath>

namespace meg {

std::vector<double> grad_log_likelihood(const Params& params, const ModelContext& ctx) {
  return evaluate_likelihood(params, ctx, true).gradient.flatten();
}

std::vector<double> finite_difference_gradient(
    const std::function<double(std::span<const double>)>& f, std::span<const double> x,
    double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw InvalidArgument("finite-difference step must be positive, got " + std::to_string(step));
  }
  const double up = std::exp(step);
  const double down = std::exp(-step);
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double x0 = x[k];
    point[k] = x0 * up;
    const double f_up = f(point);
    point[k] = x0 * down;
    const double f_down = f(point);
    point[k] = x0;
    grad[k] = (f_up - f_down) / (x0 * up - x0 * down);
  }
  return grad;
}

std::vector<double> finite_difference_gradient(const Params& params, const ModelContext& ctx,
                                               double step) {
  Params work = params;
  const auto f = [&](std::span<const double> flat) {
    work.assign(flat);
    return log_likelihood(work, ctx);
  };
  const std::vector<double> x = params.flatten();
  return finite_difference_gradient(f, x, step);
}

}  // namespace meg

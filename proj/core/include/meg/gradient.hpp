#pragma once

#include <functional>
#include <span>
#include <vector>

#include "meg/likelihood.hpp"
#include "meg/params.hpp"

namespace meg {

/// d log L / d Psi, flattened in canonical Params order. The optimizer applies
/// the log-space chain factor itself.
std::vector<double> grad_log_likelihood(const Params& params, const ModelContext& ctx);

/// Central differences of f around x, perturbing each coordinate
/// multiplicatively: x_k * exp(+-step). Linear functions are differentiated
/// exactly. Requires step > 0 and positive x.
std::vector<double> finite_difference_gradient(
    const std::function<double(std::span<const double>)>& f, std::span<const double> x,
    double step);

/// Finite-difference gradient of log_likelihood.
std::vector<double> finite_difference_gradient(const Params& params, const ModelContext& ctx,
                                               double step);

}  // namespace meg

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "meg/event_index.hpp"
#include "meg/likelihood.hpp"
#include "meg/params.hpp"

namespace meg {

enum class InitVariant {
  standard,       // interaction baselines 1e-4
  sqrt_baseline,  // interaction baselines sqrt(u)
};

enum class RestartInit {
  jitter,   // init * exp(sigma * N(0, 1)) per entry
  uniform,  // every entry uniform in [uniform_low, uniform_high]
};

struct AdamConfig {
  double eta = 0.05;
  double rho1 = 0.9;
  double rho2 = 0.99;
  double epsilon = 1e-8;
  std::size_t max_iterations = 5000;
  double tolerance = 1e-6;  // on |change in log L| / (1 + |log L|)
  std::size_t window = 5;   // consecutive iterations below tolerance
  std::size_t restarts = 1;
  std::uint64_t seed = 0;
  RestartInit restart_init = RestartInit::jitter;
  double jitter_sigma = 0.5;
  double uniform_low = 0.1;
  double uniform_high = 1.0;
  bool warm_start = true;  // hawkes components start from a markov fit
};

struct FitReport {
  Params params;
  double log_likelihood = 0.0;
  std::vector<double> trace;  // log L per iteration of the best run
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t best_restart = 0;
  std::size_t failed_restarts = 0;
  std::vector<std::string> notes;
};

/// Start values from node activity: u_i = N_i / (n T) with n the number of
/// possible partners; alpha = mu = u, phi = 3u (likewise for destinations),
/// interaction factors 1e-4 (offsets 5e-4). With d > 1 the interaction block
/// gets Gaussian jitter (sd 2e-5) drawn from `seed`, redrawn until positive.
/// Nodes without events use u = 0.01 / (n T).
Params default_init(const EventIndex& index, const ModelSpec& spec, std::uint64_t seed = 0,
                    InitVariant variant = InitVariant::standard);

/// First and second moment estimates of one Adam run.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
};

/// One ascent step in log space: x <- x * exp(eta * mhat / (sqrt(vhat) + eps)),
/// with the moments fed g * x.
void adam_step(AdamState& state, std::span<double> x, std::span<const double> gradient,
               const AdamConfig& cfg);

/// Objective returning f(x) and writing df/dx into the second argument.
using Objective = std::function<double(std::span<const double>, std::span<double>)>;

struct AdamRun {
  std::vector<double> best;
  double best_value = 0.0;
  std::vector<double> trace;
  bool converged = false;
  std::size_t iterations = 0;
};

/// Maximises f over positive x from x0. Returns the best iterate seen. Throws
/// NumericFailure if f or its gradient stops being finite.
AdamRun adam_maximize(const Objective& f, std::span<const double> x0, const AdamConfig& cfg);

/// Maximum-likelihood fit with restarts; restart 0 starts at `init`.
FitReport adam_fit(const ModelContext& ctx, const Params& init, const AdamConfig& cfg);

}  // namespace meg

#include <cmath>
#include <random>

#include "doctest.h"
#include "instances.hpp"
#include "meg/excitation.hpp"
#include "meg/gradient.hpp"
#include "oracle.hpp"

using namespace meg;
using doctest::Approx;

namespace {

// Edge (0, 1) with source 0 and destination 1 of a 2-node directed graph.
Params cartoon_params(const GraphShape& shape, const ModelSpec& spec) {
  Params p = Params::filled(shape, spec, 1.0);
  p.source.base[0] = 0.2;
  p.source.jump[0] = 0.5;
  p.source.decay_offset[0] = 0.5;
  p.destination.base[1] = 0.1;
  p.destination.jump[1] = 0.8;
  p.destination.decay_offset[1] = 0.2;
  p.source_factors.base(0, 0) = 0.8;
  p.source_factors.jump(0, 0) = 0.9;
  p.source_factors.decay_offset(0, 0) = 1.1;
  p.destination_factors.base(1, 0) = 0.6;
  p.destination_factors.jump(1, 0) = 0.3;
  p.destination_factors.decay_offset(1, 0) = 0.2;
  return p;
}

}  // namespace

TEST_CASE("decayed mass and its rate derivative") {
  for (const double rate : {1e-6, 0.01, 0.5, 3.0}) {
    for (const double gap : {1e-3, 0.05, 1.0, 20.0}) {
      const double h = 1e-6 * rate;
      const double fd = (decayed_mass(rate + h, gap) - decayed_mass(rate - h, gap)) / (2 * h);
      CHECK(decayed_mass_rate_derivative(rate, gap) == Approx(fd).epsilon(1e-5));
      CHECK(decayed_mass(rate, gap) == Approx((1 - std::exp(-rate * gap)) / rate).epsilon(1e-9));
    }
  }
}

TEST_CASE("constant interaction baseline") {
  const auto shape = GraphShape::directed(2);
  ModelSpec spec{Memory::absent, Memory::poisson, 1, TauStrategy::zero};
  EventLog log;
  log.horizon = 10.0;
  auto inst = testing::make_instance(log, shape, spec, Params::filled(shape, spec, 1.0));
  inst.params.source_factors.base(0, 0) = 0.1;
  inst.params.destination_factors.base(1, 0) = 0.3;
  CHECK(intensity(inst.params, inst.context(), 0, 1, 4.0) == Approx(0.03).epsilon(1e-15));
}

TEST_CASE("edge event jump and markov bound") {
  const auto shape = GraphShape::directed(2);
  EventLog log;
  log.horizon = 20.0;
  log.events = {{1.0, 0, 1}, {1.5, 0, 0}, {2.0, 0, 1}, {2.1, 1, 1}, {2.2, 0, 1}, {2.25, 1, 1}};
  const double bound = 0.2 + 0.1 + 0.8 * 0.6 + 0.5 + 0.8 + 0.9 * 0.3;
  CHECK(bound == Approx(2.35));

  ModelSpec hawkes{Memory::hawkes, Memory::hawkes, 1, TauStrategy::zero};
  auto h = testing::make_instance(log, shape, hawkes, cartoon_params(shape, hawkes));
  const double before = intensity(h.params, h.context(), 0, 1, 1.0);
  const double after = intensity(h.params, h.context(), 0, 1, 1.0 + 1e-12);
  CHECK(after - before == Approx(1.57).epsilon(1e-9));

  ModelSpec markov{Memory::markov, Memory::markov, 1, TauStrategy::zero};
  auto m = testing::make_instance(log, shape, markov, cartoon_params(shape, markov));
  for (double t = 0.0; t < 5.0; t += 0.01) {
    CHECK(intensity(m.params, m.context(), 0, 1, t) <= bound + 1e-12);
  }
}

TEST_CASE("intensity before tau is rejected") {
  const auto shape = GraphShape::directed(2);
  EventLog log;
  log.horizon = 10.0;
  log.events = {{3.0, 0, 1}};
  ModelSpec spec{Memory::hawkes, Memory::absent, 1, TauStrategy::mle};
  auto inst = testing::make_instance(log, shape, spec, Params::filled(shape, spec, 0.5));
  CHECK_THROWS_AS(intensity(inst.params, inst.context(), 0, 1, 2.0), InvalidArgument);
  CHECK(compensator(inst.params, inst.context(), 1, 0, 10.0) == 0.0);
}

TEST_CASE("homogeneous poisson likelihood") {
  const auto shape = GraphShape::directed(2);
  EventLog log;
  log.horizon = 10.0;
  log.events = {{1.0, 0, 1}, {4.0, 0, 1}, {7.5, 0, 1}};
  ModelSpec spec{Memory::poisson, Memory::absent, 1, TauStrategy::adjacency};
  auto inst = testing::make_instance(log, shape, spec, Params::filled(shape, spec, 0.1));
  const double expected = 3 * std::log(0.2) - 2.0;
  CHECK(log_likelihood(inst.params, inst.context()) == Approx(expected).epsilon(1e-14));
  CHECK(compensator(inst.params, inst.context(), 0, 1, 10.0) == Approx(2.0).epsilon(1e-14));

  const auto grad = evaluate_likelihood(inst.params, inst.context(), true).gradient;
  CHECK(grad.source.base[0] == Approx(3 / 0.2 - 10.0).epsilon(1e-12));
}

TEST_CASE("event-less edge contributes its baseline exposure") {
  const auto shape = GraphShape::directed(2);
  EventLog log;
  log.horizon = 10.0;
  ModelSpec spec{Memory::poisson, Memory::poisson, 2, TauStrategy::zero};
  std::mt19937_64 rng(5);
  auto inst = testing::make_instance(log, shape, spec, testing::random_params(shape, spec, rng));
  const auto& p = inst.params;
  double expected = 0.0;
  for (NodeId i = 0; i < 2; ++i) {
    for (NodeId j = 0; j < 2; ++j) {
      double b = p.source.base[i] + p.destination.base[j];
      for (std::size_t q = 0; q < 2; ++q) b += p.source_factors.base(i, q) * p.destination_factors.base(j, q);
      expected -= b * 10.0;
    }
  }
  CHECK(log_likelihood(p, inst.context()) == Approx(expected).epsilon(1e-14));
}

TEST_CASE("recursive state matches direct sums") {
  std::mt19937_64 rng(17);
  const auto shape = GraphShape::directed(3);
  const auto log = testing::random_log(shape, 150, 50.0, rng);
  ModelSpec spec{Memory::hawkes, Memory::hawkes, 2, TauStrategy::mle};
  auto inst = testing::make_instance(log, shape, spec, testing::random_params(shape, spec, rng));
  const auto ctx = inst.context();
  for (const auto& edge : inst.index.edges()) {
    EdgeScanner scanner(inst.params, ctx, edge.source, edge.destination);
    while (!scanner.done()) {
      const auto step = scanner.next();
      const double direct = oracle::intensity(inst.params, ctx, edge.source, edge.destination, step.time);
      CHECK(step.intensity == Approx(direct).epsilon(1e-12));
      for (const double latent : scanner.state().latent) CHECK(latent >= 0.0);
    }
    CHECK(scanner.size() == edge.times.size());
  }
}

TEST_CASE("increments sum to the compensator") {
  std::mt19937_64 rng(23);
  const auto shape = GraphShape::bipartite(2, 3);
  const auto log = testing::random_log(shape, 120, 40.0, rng, 0.25);
  for (const Memory r : {Memory::poisson, Memory::markov, Memory::hawkes}) {
    ModelSpec spec{r, r, 2, TauStrategy::mle};
    auto inst = testing::make_instance(log, shape, spec, testing::random_params(shape, spec, rng));
    const auto ctx = inst.context();
    for (const auto& edge : inst.index.edges()) {
      double sum = 0.0;
      for (std::size_t k = 0; k < edge.times.size(); ++k) {
        sum += compensator_increment(inst.params, ctx, edge.source, edge.destination, k);
      }
      const double at_last = compensator(inst.params, ctx, edge.source, edge.destination,
                                         edge.times.back());
      CHECK(sum == Approx(at_last).epsilon(1e-10));
      CHECK(at_last == Approx(oracle::compensator(inst.params, ctx, edge.source,
                                                  edge.destination, edge.times.back()))
                           .epsilon(1e-10));
    }
  }
}

TEST_CASE("compensator is nondecreasing and zero at tau") {
  std::mt19937_64 rng(29);
  const auto shape = GraphShape::directed(3);
  const auto log = testing::random_log(shape, 80, 30.0, rng);
  ModelSpec spec{Memory::markov, Memory::hawkes, 1, TauStrategy::mle};
  auto inst = testing::make_instance(log, shape, spec, testing::random_params(shape, spec, rng));
  const auto ctx = inst.context();
  for (const auto& edge : inst.index.edges()) {
    const double tau = inst.tau(edge.source, edge.destination);
    CHECK(compensator(inst.params, ctx, edge.source, edge.destination, tau) == 0.0);
    double previous = 0.0;
    for (double t = tau; t <= 30.0; t += 0.37) {
      const double c = compensator(inst.params, ctx, edge.source, edge.destination, t);
      CHECK(c >= previous);
      previous = c;
    }
  }
}

TEST_CASE("likelihood is nondecreasing in tau before the first event") {
  const auto shape = GraphShape::directed(2);
  EventLog log;
  log.horizon = 20.0;
  log.events = {{2.0, 1, 0}, {3.0, 0, 1}, {6.0, 0, 1}, {7.0, 1, 0}};
  ModelSpec spec{Memory::hawkes, Memory::hawkes, 1, TauStrategy::zero};
  std::mt19937_64 rng(31);
  auto inst = testing::make_instance(log, shape, spec, testing::random_params(shape, spec, rng));
  double previous = -kInfinity;
  for (double tau = 0.0; tau < 3.0; tau += 0.25) {
    inst.tau(0, 1) = tau;
    const double ll = log_likelihood(inst.params, inst.context());
    CHECK(ll >= previous - 1e-12);
    previous = ll;
  }
}

TEST_CASE("recursive likelihood matches direct evaluation") {
  std::mt19937_64 rng(37);
  const auto shape = GraphShape::directed(4);
  for (const Memory r : {Memory::poisson, Memory::markov, Memory::hawkes}) {
    for (const TauStrategy s : {TauStrategy::mle, TauStrategy::zero, TauStrategy::adjacency}) {
      const auto log = testing::random_log(shape, 200, 60.0, rng);
      ModelSpec spec{r, r, 2, s};
      auto inst = testing::make_instance(log, shape, spec, testing::random_params(shape, spec, rng));
      const double direct = oracle::log_likelihood(inst.params, inst.context());
      CHECK(log_likelihood(inst.params, inst.context()) == Approx(direct).epsilon(1e-10));
    }
  }
}

TEST_CASE("finite differences") {
  const auto linear = [](std::span<const double> x) { return 3.0 * x[0] - 2.0 * x[1]; };
  const std::vector<double> x{0.7, 2.0};
  for (const double step : {1e-6, 1e-2, 0.5}) {
    const auto g = finite_difference_gradient(linear, x, step);
    CHECK(g[0] == Approx(3.0).epsilon(1e-9));
    CHECK(g[1] == Approx(-2.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(finite_difference_gradient(linear, x, 0.0), InvalidArgument);
  CHECK_THROWS_AS(finite_difference_gradient(linear, x, -1.0), InvalidArgument);
}

TEST_CASE("gradient matches finite differences") {
  std::mt19937_64 rng(41);
  const auto shape = GraphShape::directed(3);
  const auto log = testing::random_log(shape, 90, 30.0, rng, 0.1);
  for (const Memory r : {Memory::poisson, Memory::markov, Memory::hawkes}) {
    ModelSpec spec{r, r, 2, TauStrategy::mle};
    auto inst = testing::make_instance(log, shape, spec, testing::random_params(shape, spec, rng));
    const auto analytic = grad_log_likelihood(inst.params, inst.context());
    const auto numeric = finite_difference_gradient(inst.params, inst.context(), 1e-6);
    REQUIRE(analytic.size() == numeric.size());
    for (std::size_t k = 0; k < analytic.size(); ++k) {
      CHECK(analytic[k] == Approx(numeric[k]).epsilon(1e-4).scale(1.0));
    }
  }
}

TEST_CASE("inactive node parameters get zero gradient") {
  const auto shape = GraphShape::directed(3);
  EventLog log;
  log.horizon = 10.0;
  log.events = {{1.0, 0, 1}, {2.0, 1, 0}};
  ModelSpec spec{Memory::hawkes, Memory::hawkes, 1, TauStrategy::adjacency};
  std::mt19937_64 rng(43);
  auto inst = testing::make_instance(log, shape, spec, testing::random_params(shape, spec, rng));
  const auto grad = evaluate_likelihood(inst.params, inst.context(), true).gradient;
  CHECK(grad.source.base[2] == 0.0);
  CHECK(grad.destination.jump[2] == 0.0);
  CHECK(grad.source_factors.decay_offset(2, 0) == 0.0);
}

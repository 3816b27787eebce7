#include "meg/em.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "meg/random.hpp"

namespace meg {
namespace {

constexpr double kRatioCap = 1.0 - 1e-9;
constexpr std::size_t kInnerIterations = 100;
constexpr double kInnerTolerance = 1e-10;

void require_hawkes(const ModelSpec& spec) {
  validate(spec);
  const bool main_ok = !spec.has_main() || spec.main == Memory::hawkes;
  const bool inter_ok = !spec.has_interaction() || spec.interaction == Memory::hawkes;
  if (!main_ok || !inter_ok) {
    throw UnsupportedSpec("EM is available only when every present component is hawkes "
                          "(main=" + std::string(to_string(spec.main)) +
                          ", interaction=" + std::string(to_string(spec.interaction)) +
                          "); use the adam method instead");
  }
}

bool visible(double s, double t, double lag) {
  if (lag > 0.0) return t - s >= lag * (1.0 - 1e-6);
  return s < t;
}

struct KernelIntegral {
  double value = 0.0;       // integral of the unit kernel sum
  double derivative = 0.0;  // its derivative in the decay rate
};

// Sum over start times s in `starts` of the integral over [s, horizon].
KernelIntegral node_integral(std::span<const double> times, double rate, double lag,
                             std::span<const double> starts, double horizon) {
  ExcitationCursor cursor(times, rate, false, lag);
  KernelIntegral before;
  for (const double s : starts) {
    cursor.advance(s);
    before.value += cursor.integral();
    before.derivative += cursor.integral_derivative();
  }
  cursor.advance(horizon);
  const auto k = static_cast<double>(starts.size());
  return {k * cursor.integral() - before.value, k * cursor.integral_derivative() - before.derivative};
}

KernelIntegral edge_integral(std::span<const double> times, double rate, double lag, double start,
                             double horizon) {
  ExcitationCursor cursor(times, rate, false, lag);
  cursor.seek(start);
  cursor.advance(horizon);
  return {cursor.integral(), cursor.integral_derivative()};
}

struct BlockPoint {
  double ratio;
  double objective;
  double next_rate;  // fixed-point image of the rate
};

// Maximises the expected complete-data log-likelihood of one (ratio, rate)
// block. `eval(rate)` returns the optimal ratio for that rate, the objective
// there, and the fixed-point update. Returns false when the block is held.
bool solve_block(const std::function<BlockPoint(double)>& eval, double& ratio, double& rate) {
  double x = rate;
  BlockPoint current = eval(x);
  for (std::size_t it = 0; it < kInnerIterations; ++it) {
    double proposal = current.next_rate;
    if (!(proposal > 0.0) || !std::isfinite(proposal)) break;
    BlockPoint next = eval(proposal);
    double step = 1.0;
    while (next.objective < current.objective && step > 1e-6) {
      step *= 0.5;
      proposal = x + step * (current.next_rate - x);
      next = eval(proposal);
    }
    if (next.objective < current.objective) break;
    const double change = std::abs(proposal - x) / x;
    x = proposal;
    current = next;
    if (change < kInnerTolerance) break;
  }
  if (!std::isfinite(current.objective)) return false;
  ratio = current.ratio;
  rate = x;
  return true;
}

class MStep {
 public:
  MStep(const EmStatistics& stats, const TildeParams& tilde, const ModelContext& ctx,
        std::vector<std::string>* held)
      : stats_(stats), t_(tilde), ctx_(ctx), held_(held) {
    const GraphShape& shape = ctx.index.shape();
    horizon_ = ctx.horizon;
    lag_ = ctx.index.tie_offset();
    source_starts_.resize(shape.sources());
    destination_starts_.resize(shape.destinations());
    for (NodeId i = 0; i < shape.sources(); ++i) {
      for (NodeId j = 0; j < shape.destinations(); ++j) {
        const double s = ctx.tau(i, j);
        if (s < horizon_) {
          source_starts_[i].push_back(s);
          destination_starts_[j].push_back(s);
        }
      }
    }
    for (auto& v : source_starts_) std::sort(v.begin(), v.end());
    for (auto& v : destination_starts_) std::sort(v.begin(), v.end());
    source_edges_.resize(shape.sources());
    destination_edges_.resize(shape.destinations());
    for (std::size_t e = 0; e < stats.edges.size(); ++e) {
      source_edges_[stats.edges[e].source].push_back(e);
      destination_edges_[stats.edges[e].destination].push_back(e);
    }
  }

  TildeParams run() {
    const ModelSpec& spec = ctx_.spec;
    const GraphShape& shape = ctx_.index.shape();
    for (int side = 0; side < 2; ++side) {
      const bool src = side == 0;
      const std::size_t nodes = src ? shape.sources() : shape.destinations();
      for (NodeId k = 0; k < nodes; ++k) {
        if (spec.has_main()) update_main(src, k);
        if (spec.has_interaction()) {
          for (std::size_t q = 0; q < spec.dimension; ++q) {
            update_latent_base(src, k, q);
            update_latent_kernel(src, k, q);
          }
        }
      }
    }
    return t_;
  }

 private:
  double exposure(NodeId i, NodeId j) const {
    const double s = ctx_.tau(i, j);
    return s < horizon_ ? horizon_ - s : 0.0;
  }

  void hold(const char* block, NodeId k, std::size_t q = static_cast<std::size_t>(-1)) {
    if (held_ == nullptr) return;
    std::string name = std::string(block) + "[" + std::to_string(k);
    if (q != static_cast<std::size_t>(-1)) name += "," + std::to_string(q);
    held_->push_back(name + "]");
  }

  void update_main(bool src, NodeId k) {
    const GraphShape& shape = ctx_.index.shape();
    TildeNodeEffects& block = src ? t_.source : t_.destination;
    const EmStatistics::Node& s = src ? stats_.source[k] : stats_.destination[k];
    const auto& starts = src ? source_starts_[k] : destination_starts_[k];

    double total_exposure = 0.0;
    const std::size_t partners = src ? shape.destinations() : shape.sources();
    for (NodeId o = 0; o < partners; ++o) total_exposure += src ? exposure(k, o) : exposure(o, k);
    if (s.background > 0.0 && total_exposure > 0.0) {
      block.base[k] = s.background / total_exposure;
    } else {
      hold(src ? "source.base" : "destination.base", k);
    }

    if (block.ratio.empty()) return;
    if (!(s.mass > 0.0) || starts.empty()) {
      hold(src ? "source.jump" : "destination.jump", k);
      return;
    }
    const auto times = src ? ctx_.index.source_times(k) : ctx_.index.destination_times(k);
    const double z = s.mass;
    const double w = s.age;
    const auto eval = [&](double x) {
      const KernelIntegral in = node_integral(times, x, lag_, starts, horizon_);
      const double ratio = std::min(z / (x * in.value), kRatioCap);
      const double objective = z * (std::log(ratio) + std::log(x)) - x * w - ratio * x * in.value;
      const double next = z / (w + ratio * (in.value + x * in.derivative));
      return BlockPoint{ratio, objective, next};
    };
    double ratio = block.ratio[k];
    double rate = block.rate[k];
    const double before = main_objective(ratio, rate, z, w, times, starts);
    if (solve_block(eval, ratio, rate) && eval(rate).objective >= before) {
      block.ratio[k] = ratio;
      block.rate[k] = rate;
    }
  }

  // Objective at an arbitrary (ratio, rate), used to guard against decrease.
  double main_objective(double ratio, double rate, double z, double w,
                        std::span<const double> times, std::span<const double> starts) const {
    const KernelIntegral in = node_integral(times, rate, lag_, starts, horizon_);
    return z * (std::log(ratio) + std::log(rate)) - rate * w - ratio * rate * in.value;
  }

  void update_latent_base(bool src, NodeId k, std::size_t q) {
    const GraphShape& shape = ctx_.index.shape();
    TildeLatentFactors& mine = src ? t_.source_factors : t_.destination_factors;
    const TildeLatentFactors& other = src ? t_.destination_factors : t_.source_factors;
    double mass = 0.0;
    for (const std::size_t e : src ? source_edges_[k] : destination_edges_[k]) {
      mass += stats_.edges[e].background[q];
    }
    double denominator = 0.0;
    const std::size_t partners = src ? shape.destinations() : shape.sources();
    for (NodeId o = 0; o < partners; ++o) {
      denominator += other.base(o, q) * (src ? exposure(k, o) : exposure(o, k));
    }
    if (mass > 0.0 && denominator > 0.0) {
      mine.base(k, q) = mass / denominator;
    } else {
      hold(src ? "source_factors.base" : "destination_factors.base", k, q);
    }
  }

  void update_latent_kernel(bool src, NodeId k, std::size_t q) {
    TildeLatentFactors& mine = src ? t_.source_factors : t_.destination_factors;
    const TildeLatentFactors& other = src ? t_.destination_factors : t_.source_factors;
    if (mine.ratio.empty()) return;
    const auto& edges = src ? source_edges_[k] : destination_edges_[k];

    struct Term {
      double mass, age, other_ratio, other_rate, start;
      std::span<const double> times;
    };
    std::vector<Term> terms;
    double z = 0.0;
    for (const std::size_t e : edges) {
      const auto& st = stats_.edges[e];
      const NodeId o = src ? st.destination : st.source;
      const auto& edge = ctx_.index.edges()[e];
      terms.push_back({st.mass[q], st.age[q], other.ratio(o, q), other.rate(o, q),
                       ctx_.tau(st.source, st.destination), edge.times});
      z += st.mass[q];
    }
    if (!(z > 0.0)) {
      hold(src ? "source_factors.jump" : "destination_factors.jump", k, q);
      return;
    }
    const auto objective = [&](double ratio, double x, double* ratio_denominator,
                               double* rate_denominator) {
      double value = 0.0;
      double rd = 0.0;
      double xd = 0.0;
      for (const Term& term : terms) {
        const double c = x * term.other_rate;
        const KernelIntegral in = edge_integral(term.times, c, lag_, term.start, horizon_);
        value += term.mass * (std::log(ratio) + std::log(x)) - c * term.age -
                 ratio * term.other_ratio * c * in.value;
        rd += term.other_ratio * c * in.value;
        xd += term.other_rate * (term.age + ratio * term.other_ratio * (in.value + c * in.derivative));
      }
      if (ratio_denominator != nullptr) *ratio_denominator = rd;
      if (rate_denominator != nullptr) *rate_denominator = xd;
      return value;
    };
    const auto eval = [&](double x) {
      double rd = 0.0;
      objective(1.0, x, &rd, nullptr);
      const double ratio = std::min(z / rd, kRatioCap);
      double xd = 0.0;
      const double value = objective(ratio, x, nullptr, &xd);
      return BlockPoint{ratio, value, z / xd};
    };
    double ratio = mine.ratio(k, q);
    double rate = mine.rate(k, q);
    const double before = objective(ratio, rate, nullptr, nullptr);
    if (solve_block(eval, ratio, rate) && objective(ratio, rate, nullptr, nullptr) >= before) {
      mine.ratio(k, q) = ratio;
      mine.rate(k, q) = rate;
    }
  }

  const EmStatistics& stats_;
  TildeParams t_;
  const ModelContext& ctx_;
  std::vector<std::string>* held_;
  double horizon_ = 0.0;
  double lag_ = 0.0;
  std::vector<std::vector<double>> source_starts_;
  std::vector<std::vector<double>> destination_starts_;
  std::vector<std::vector<std::size_t>> source_edges_;
  std::vector<std::vector<std::size_t>> destination_edges_;
};

Params uniform_params(const Params& like, RandomStream& rng, double lo, double hi) {
  Params p = like;
  for_each_block(p, [&](std::string_view, std::vector<double>& values) {
    for (double& v : values) v = rng.uniform(lo, hi);
  });
  return p;
}

}  // namespace

TildeParams to_tilde(const Params& p) {
  TildeParams t;
  const auto node = [](const NodeEffects& in, TildeNodeEffects& out) {
    out.base = in.base;
    out.ratio.resize(in.jump.size());
    out.rate.resize(in.jump.size());
    for (std::size_t k = 0; k < in.jump.size(); ++k) {
      out.rate[k] = in.jump[k] + in.decay_offset[k];
      out.ratio[k] = in.jump[k] / out.rate[k];
    }
  };
  const auto latent = [](const LatentFactors& in, TildeLatentFactors& out) {
    out.base = in.base;
    out.ratio = Matrix(in.jump.rows(), in.jump.cols());
    out.rate = Matrix(in.jump.rows(), in.jump.cols());
    for (std::size_t k = 0; k < in.jump.values().size(); ++k) {
      const double rate = in.jump.values()[k] + in.decay_offset.values()[k];
      out.rate.values()[k] = rate;
      out.ratio.values()[k] = in.jump.values()[k] / rate;
    }
  };
  node(p.source, t.source);
  node(p.destination, t.destination);
  latent(p.source_factors, t.source_factors);
  latent(p.destination_factors, t.destination_factors);
  return t;
}

Params from_tilde(const TildeParams& t) {
  Params p;
  const auto node = [](const TildeNodeEffects& in, NodeEffects& out) {
    out.base = in.base;
    out.jump.resize(in.ratio.size());
    out.decay_offset.resize(in.ratio.size());
    for (std::size_t k = 0; k < in.ratio.size(); ++k) {
      out.jump[k] = in.ratio[k] * in.rate[k];
      out.decay_offset[k] = in.rate[k] * (1.0 - in.ratio[k]);
    }
  };
  const auto latent = [](const TildeLatentFactors& in, LatentFactors& out) {
    out.base = in.base;
    out.jump = Matrix(in.ratio.rows(), in.ratio.cols());
    out.decay_offset = Matrix(in.ratio.rows(), in.ratio.cols());
    for (std::size_t k = 0; k < in.ratio.values().size(); ++k) {
      out.jump.values()[k] = in.ratio.values()[k] * in.rate.values()[k];
      out.decay_offset.values()[k] = in.rate.values()[k] * (1.0 - in.ratio.values()[k]);
    }
  };
  node(t.source, p.source);
  node(t.destination, p.destination);
  latent(t.source_factors, p.source_factors);
  latent(t.destination_factors, p.destination_factors);
  return p;
}

double EventResponsibilities::total() const {
  double s = source_background + destination_background;
  for (const double v : latent_background) s += v;
  for (const double v : source_parents) s += v;
  for (const double v : destination_parents) s += v;
  for (const auto& row : latent_parents) {
    for (const double v : row) s += v;
  }
  return s;
}

EventResponsibilities event_responsibilities(const Params& p, const ModelContext& ctx,
                                             NodeId i, NodeId j, std::size_t k) {
  require_hawkes(ctx.spec);
  const auto e = ctx.index.find_edge(i, j);
  if (!e || k >= ctx.index.edges()[*e].times.size()) {
    throw InvalidArgument("edge (" + std::to_string(i) + ", " + std::to_string(j) +
                          ") has no event " + std::to_string(k));
  }
  const auto& edge = ctx.index.edges()[*e];
  const double t = edge.times[k];
  const double lag = ctx.index.tie_offset();
  const ModelSpec& spec = ctx.spec;

  EventResponsibilities r;
  const auto kernel_terms = [&](std::span<const double> times, double jump, double rate) {
    std::vector<double> out(times.size(), 0.0);
    for (std::size_t h = 0; h < times.size(); ++h) {
      if (visible(times[h], t, lag)) out[h] = jump * std::exp(-rate * (t - times[h]));
    }
    return out;
  };
  if (spec.has_main()) {
    r.source_background = p.source.base[i];
    r.destination_background = p.destination.base[j];
    r.source_parents = kernel_terms(ctx.index.source_times(i), p.source.jump[i],
                                    p.source.jump[i] + p.source.decay_offset[i]);
    r.destination_parents =
        kernel_terms(ctx.index.destination_times(j), p.destination.jump[j],
                     p.destination.jump[j] + p.destination.decay_offset[j]);
  }
  if (spec.has_interaction()) {
    for (std::size_t q = 0; q < spec.dimension; ++q) {
      r.latent_background.push_back(p.source_factors.base(i, q) * p.destination_factors.base(j, q));
      const double a = p.source_factors.jump(i, q);
      const double b = p.destination_factors.jump(j, q);
      const double rate = (a + p.source_factors.decay_offset(i, q)) *
                          (b + p.destination_factors.decay_offset(j, q));
      r.latent_parents.push_back(kernel_terms(edge.times, a * b, rate));
    }
  }
  const double lambda = r.total();
  if (!(lambda > 0.0)) throw NumericFailure("zero intensity at an event");
  const auto scale = [&](std::vector<double>& v) {
    for (double& x : v) x /= lambda;
  };
  r.source_background /= lambda;
  r.destination_background /= lambda;
  scale(r.latent_background);
  scale(r.source_parents);
  scale(r.destination_parents);
  for (auto& row : r.latent_parents) scale(row);
  return r;
}

EmStatistics e_step(const TildeParams& tilde, const ModelContext& ctx) {
  require_hawkes(ctx.spec);
  const Params p = from_tilde(tilde);
  const GraphShape& shape = ctx.index.shape();
  const ModelSpec& spec = ctx.spec;
  const std::size_t d = spec.has_interaction() ? spec.dimension : 0;

  EmStatistics stats;
  stats.source.resize(shape.sources());
  stats.destination.resize(shape.destinations());
  stats.edges.reserve(ctx.index.edges().size());
  for (const EdgeEvents& edge : ctx.index.edges()) {
    const NodeId i = edge.source;
    const NodeId j = edge.destination;
    EmStatistics::Edge es{i, j, std::vector<double>(d), std::vector<double>(d),
                          std::vector<double>(d)};
    EdgeScanner scanner(p, ctx, i, j);
    if (scanner.active() && scanner.start() <= ctx.horizon) {
      const auto tracks = scanner.tracks();
      while (!scanner.done()) {
        const double lambda = scanner.next().intensity;
        if (!(lambda > 0.0) || !std::isfinite(lambda)) {
          throw NumericFailure("non-positive or non-finite intensity on edge (" +
                               std::to_string(i) + ", " + std::to_string(j) + ")");
        }
        const double inv = 1.0 / lambda;
        if (spec.has_main()) {
          stats.source[i].background += p.source.base[i] * inv;
          stats.destination[j].background += p.destination.base[j] * inv;
        }
        for (std::size_t q = 0; q < d; ++q) {
          es.background[q] += p.source_factors.base(i, q) * p.destination_factors.base(j, q) * inv;
        }
        for (const ExcitationTrack& track : tracks) {
          const double mass = track.jump * track.cursor.value() * inv;
          const double age = -track.jump * track.cursor.derivative() * inv;
          switch (track.kind) {
            case TrackKind::source:
              stats.source[i].mass += mass;
              stats.source[i].age += age;
              break;
            case TrackKind::destination:
              stats.destination[j].mass += mass;
              stats.destination[j].age += age;
              break;
            case TrackKind::latent:
              es.mass[track.dimension] += mass;
              es.age[track.dimension] += age;
              break;
          }
        }
      }
    }
    stats.edges.push_back(std::move(es));
  }
  return stats;
}

TildeParams m_step(const EmStatistics& stats, const TildeParams& tilde, const ModelContext& ctx,
                   std::vector<std::string>* held) {
  require_hawkes(ctx.spec);
  if (stats.edges.size() != ctx.index.edges().size()) {
    throw InvalidArgument("EM statistics do not match the event index");
  }
  return MStep(stats, tilde, ctx, held).run();
}

FitReport em_fit(const ModelContext& ctx, const Params& init, const EmConfig& cfg) {
  require_hawkes(ctx.spec);
  validate(init, ctx.index.shape(), ctx.spec);
  if (cfg.restarts == 0) throw InvalidArgument("at least one restart is required");

  FitReport report;
  report.log_likelihood = -kInfinity;
  RandomStream rng(cfg.seed, 0xe3);
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    const Params start =
        r == 0 ? init : uniform_params(init, rng, cfg.uniform_low, cfg.uniform_high);
    try {
      TildeParams tilde = to_tilde(start);
      double ll = log_likelihood(start, ctx);
      std::vector<double> trace{ll};
      std::vector<std::string> held;
      bool converged = false;
      std::size_t it = 0;
      while (it < cfg.max_iterations) {
        ++it;
        held.clear();
        tilde = m_step(e_step(tilde, ctx), tilde, ctx, &held);
        const double next = log_likelihood(from_tilde(tilde), ctx);
        if (!std::isfinite(next)) throw NumericFailure("log-likelihood is not finite");
        trace.push_back(next);
        const bool calm = std::abs(next - ll) < cfg.tolerance * (1.0 + std::abs(next));
        ll = next;
        if (calm) {
          converged = true;
          break;
        }
      }
      if (ll > report.log_likelihood) {
        report.log_likelihood = ll;
        report.params = from_tilde(tilde);
        report.trace = std::move(trace);
        report.converged = converged;
        report.iterations = it;
        report.best_restart = r;
        report.notes.clear();
        for (const auto& h : held) report.notes.push_back("held " + h);
      }
    } catch (const NumericFailure& e) {
      ++report.failed_restarts;
      report.notes.push_back("restart " + std::to_string(r) + " failed: " + e.what());
    }
  }
  if (report.failed_restarts == cfg.restarts) {
    throw NumericFailure("all " + std::to_string(cfg.restarts) + " EM restarts failed");
  }
  return report;
}

}  // namespace meg

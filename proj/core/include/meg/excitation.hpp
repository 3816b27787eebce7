#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace meg {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      correction_ += (sum_ - t) + x;
    } else {
      correction_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + correction_; }

 private:
  double sum_ = 0.0;
  double correction_ = 0.0;
};

/// (1 - exp(-rate * gap)) / rate, accurate for small rate * gap.
double decayed_mass(double rate, double gap);

/// d/d(rate) of decayed_mass(rate, gap).
double decayed_mass_rate_derivative(double rate, double gap);

/// Walks forward in time over one sorted sequence of exciting events with a
/// unit-jump exponential kernel exp(-rate * (t - s)).
///
/// Tracks, at the current time t (left limit):
///   value      psi(t)    = sum over visible events s of exp(-rate (t - s))
///   derivative dpsi/drate
/// and accumulates the time integral of psi (and of its rate derivative) over
/// every stretch passed with advance(). With `markov` only the latest visible
/// event contributes. An event at s becomes visible once t - s >= lag (or
/// t > s when lag is zero).
class ExcitationCursor {
 public:
  ExcitationCursor() = default;
  ExcitationCursor(std::span<const double> times, double rate, bool markov, double lag,
                   double start = 0.0);

  /// Moves to t without integrating (t must not precede the current time).
  void seek(double t) { move_to(t, false); }
  /// Moves to t, integrating psi over the stretch.
  void advance(double t) { move_to(t, true); }

  double time() const noexcept { return now_; }
  double value() const noexcept { return psi_; }
  double derivative() const noexcept { return dpsi_; }
  std::size_t visible() const noexcept { return next_; }

  /// Integral of psi (and of dpsi/drate) since construction.
  double integral() const noexcept { return integral_; }
  double integral_derivative() const noexcept { return dintegral_; }

  /// Integral of psi since the previous call, then resets that accumulator.
  double take_segment() noexcept {
    const double v = segment_;
    segment_ = 0.0;
    return v;
  }

 private:
  bool visible_at(double s, double t) const noexcept;
  void move_to(double t, bool integrate);
  void drift(double t, bool integrate);
  void reveal(double s);

  std::span<const double> times_;
  double rate_ = 1.0;
  bool markov_ = false;
  double lag_ = 0.0;
  double tolerance_ = 0.0;
  std::size_t next_ = 0;
  double now_ = 0.0;
  double psi_ = 0.0;
  double dpsi_ = 0.0;
  double integral_ = 0.0;
  double dintegral_ = 0.0;
  double segment_ = 0.0;
};

}  // namespace meg

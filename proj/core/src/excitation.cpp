#include "meg/excitation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace meg {

double decayed_mass(double rate, double gap) {
  if (gap <= 0.0) return 0.0;
  const double x = rate * gap;
  if (x == 0.0) return gap;
  return -std::expm1(-x) / rate;
}

double decayed_mass_rate_derivative(double rate, double gap) {
  if (gap <= 0.0) return 0.0;
  const double x = rate * gap;
  if (x < 0.1) {
    // sum_{n>=1} (-1)^n n x^(n-1) / (n+1)!  scaled by gap^2
    double term = 0.5;  // x^(n-1) / (n+1)!
    double sum = 0.0;
    for (int n = 1; n <= 18; ++n) {
      sum += (n % 2 == 1 ? -1.0 : 1.0) * n * term;
      term *= x / (n + 2);
    }
    return gap * gap * sum;
  }
  const double e = std::exp(-x);
  return (gap * e - (1.0 - e) / rate) / rate;
}

ExcitationCursor::ExcitationCursor(std::span<const double> times, double rate, bool markov,
                                   double lag, double start)
    : times_(times),
      rate_(rate),
      markov_(markov),
      lag_(lag),
      tolerance_(lag * 1e-6),
      now_(start) {}

bool ExcitationCursor::visible_at(double s, double t) const noexcept {
  if (lag_ > 0.0) return t - s >= lag_ - tolerance_;
  return s < t;
}

void ExcitationCursor::drift(double t, bool integrate) {
  const double gap = t - now_;
  if (!(gap > 0.0)) return;
  if (integrate) {
    const double mass = decayed_mass(rate_, gap);
    const double step = psi_ * mass;
    integral_ += step;
    segment_ += step;
    dintegral_ += dpsi_ * mass + psi_ * decayed_mass_rate_derivative(rate_, gap);
  }
  const double decay = std::exp(-rate_ * gap);
  dpsi_ = decay * (dpsi_ - gap * psi_);
  psi_ *= decay;
  now_ = t;
}

void ExcitationCursor::reveal(double s) {
  const double age = std::max(now_ - s, 0.0);
  const double w = std::exp(-rate_ * age);
  if (markov_) {
    psi_ = w;
    dpsi_ = -age * w;
  } else {
    psi_ += w;
    dpsi_ -= age * w;
  }
}

void ExcitationCursor::move_to(double t, bool integrate) {
  while (next_ < times_.size() && visible_at(times_[next_], t)) {
    const double s = times_[next_];
    const double becomes_visible = std::min(s + lag_, t);
    drift(becomes_visible, integrate);
    reveal(s);
    ++next_;
  }
  drift(t, integrate);
}

}  // namespace meg

#pragma once

// sampling.hpp: deterministic random draws for stochastic simulation.
//
// All samplers are hand-rolled on top of std::mt19937_64 (whose output
// sequence the standard pins down exactly), so a given seed produces the
// same draws on every platform and compiler. std::normal_distribution and
// friends are deliberately avoided: their sequences are
// implementation-defined and would break bit-identical traces.

#include <cmath>
#include <cstdint>
#include <random>

#include "drainsim/core.hpp"

namespace drainsim {

// Thin wrapper so the rest of the library never touches the engine type.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in (0, 1): never returns 0, safe under log().
  double uniform() {
    // 53 random mantissa bits; +0.5 ulp offset keeps the draw strictly
    // positive without biasing the distribution measurably.
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (deterministic given uniform()).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape) {
    if (shape < 1.0) {
      // G(a) = G(a + 1) * U^(1/a)
      double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = uniform();
      double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Beta(a, b) from a pair of gammas. Tiny shapes would underflow the
  // direct draws (U^(1/a) goes subnormal for a near 0), turning the ratio
  // into 0/0; those are combined in log space instead — the same draw
  // pair, so sequences for ordinary shapes are untouched.
  double beta(double a, double b) {
    if (a < 0.1 || b < 0.1) {
      const double lx = log_gamma(a);
      const double ly = log_gamma(b);
      // x/(x+y) = 1/(1 + e^(ly-lx)); exp saturates cleanly to 0 or inf at
      // the extremes, so the result stays inside [0, 1].
      return 1.0 / (1.0 + std::exp(ly - lx));
    }
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
  }

 private:
  // log of a Gamma(shape, 1) draw; finite even where the draw itself
  // would underflow to zero.
  double log_gamma(double shape) {
    if (shape < 1.0) {
      return log_gamma(shape + 1.0) + std::log(uniform()) / shape;
    }
    return std::log(gamma(shape));
  }

  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Draws a per-trial drain time (minutes per reference quantum) honoring the
// component's configured mean, sd, and hard bounds.
//
// The draw is a scaled Beta on [min, max] whose parameters are solved so
// the distribution's mean and sd equal the configured values exactly. A
// normal truncated to these bounds cannot do that: on an interval a couple
// of sd wide, truncation both shifts the mean and shrinks the sd well
// beyond what the configured statistics describe (the bounded empirical
// spreads here need more edge mass than any truncated bell allows). When
// the requested sd is not representable on the bounds at all (sd >= the
// two-point-distribution limit), it is capped just below that limit.
inline double sample_drain_time(const ComponentSpec& c, Rng& rng) {
  const double lo = c.drain_time_min;
  const double hi = c.drain_time_max;
  const double width = hi - lo;
  if (!(width > 0.0) || !(c.drain_time_sd > 0.0)) return c.drain_time_mean;

  const double m = (c.drain_time_mean - lo) / width;  // mean in [0, 1]
  double s2 = (c.drain_time_sd / width) * (c.drain_time_sd / width);
  const double s2_max = m * (1.0 - m);
  if (!(s2_max > 0.0)) return c.drain_time_mean;  // mean sits on a bound
  if (s2 >= s2_max) s2 = 0.999 * s2_max;

  const double nu = s2_max / s2 - 1.0;
  const double a = m * nu;
  const double b = (1.0 - m) * nu;
  return lo + width * rng.beta(a, b);
}

}  // namespace drainsim

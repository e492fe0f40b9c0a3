#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "drainsim/core.hpp"
#include "drainsim/sampling.hpp"

using namespace drainsim;
using Catch::Approx;

namespace {

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

template <typename F>
Moments collect(int n, F&& draw) {
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = draw();
  Moments m;
  m.lo = xs[0];
  m.hi = xs[0];
  for (double x : xs) {
    m.mean += x;
    m.lo = std::min(m.lo, x);
    m.hi = std::max(m.hi, x);
  }
  m.mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.sd = std::sqrt(ss / (n - 1));
  return m;
}

ComponentSpec spec_with(double mean, double sd, double lo, double hi) {
  ComponentSpec c;
  c.id = "x";
  c.drain_time_mean = mean;
  c.drain_time_sd = sd;
  c.drain_time_min = lo;
  c.drain_time_max = hi;
  return c;
}

}  // namespace

TEST_CASE("rng is deterministic per seed") {
  Rng a(42), b(42), c(7);
  bool all_equal = true;
  bool any_differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.uniform();
    if (x != b.uniform()) all_equal = false;
    if (x != c.uniform()) any_differs = true;
  }
  CHECK(all_equal);
  CHECK(any_differs);
}

TEST_CASE("uniform stays inside the open unit interval") {
  Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("normal moments") {
  Rng rng(2);
  const Moments m = collect(200000, [&] { return rng.normal(); });
  CHECK(m.mean == Approx(0.0).margin(0.01));
  CHECK(m.sd == Approx(1.0).margin(0.01));
}

TEST_CASE("gamma moments, both shape regimes") {
  Rng rng(3);
  for (double shape : {0.5, 1.0, 3.0}) {
    const Moments m = collect(200000, [&] { return rng.gamma(shape); });
    CHECK(m.mean == Approx(shape).epsilon(0.02));
    CHECK(m.sd == Approx(std::sqrt(shape)).epsilon(0.03));
    CHECK(m.lo > 0.0);
  }
}

TEST_CASE("beta moments") {
  Rng rng(4);
  const double a = 2.0, b = 3.0;
  const Moments m = collect(200000, [&] { return rng.beta(a, b); });
  const double mean = a / (a + b);
  const double var = a * b / ((a + b) * (a + b) * (a + b + 1));
  CHECK(m.mean == Approx(mean).epsilon(0.01));
  CHECK(m.sd == Approx(std::sqrt(var)).epsilon(0.02));
  CHECK(m.lo > 0.0);
  CHECK(m.hi < 1.0);
}

TEST_CASE("drain-time sampling matches configured statistics") {
  // The two stress cases: a mean well off-center with a tight range, and a
  // spread close to the achievable maximum for the interval.
  SECTION("off-center mean (7.4, 1.075 on [6, 10])") {
    ComponentSpec c = spec_with(7.4, 1.075, 6, 10);
    Rng rng(5);
    const Moments m = collect(200000, [&] { return sample_drain_time(c, rng); });
    CHECK(m.mean == Approx(7.4).margin(0.02));
    CHECK(m.sd == Approx(1.075).margin(0.012));
    CHECK(m.lo >= 6.0);
    CHECK(m.hi <= 10.0);
  }

  SECTION("wide spread on a narrow range (19.4, 1.075 on [18, 21])") {
    ComponentSpec c = spec_with(19.4, 1.075, 18, 21);
    Rng rng(6);
    const Moments m = collect(200000, [&] { return sample_drain_time(c, rng); });
    CHECK(m.mean == Approx(19.4).margin(0.02));
    CHECK(m.sd == Approx(1.075).margin(0.012));
    CHECK(m.lo >= 18.0);
    CHECK(m.hi <= 21.0);
  }
}

TEST_CASE("degenerate spreads collapse to the mean") {
  SECTION("zero sd") {
    ComponentSpec c = spec_with(8.2, 0, 8.2, 8.2);
    Rng rng(7);
    for (int i = 0; i < 100; ++i) CHECK(sample_drain_time(c, rng) == 8.2);
  }

  SECTION("zero-width interval") {
    ComponentSpec c = spec_with(13, 0.5, 13, 13);
    Rng rng(8);
    for (int i = 0; i < 100; ++i) CHECK(sample_drain_time(c, rng) == 13.0);
  }
}

TEST_CASE("infeasibly large sd is capped, not crashed") {
  // sd larger than the interval can support: samples must still respect
  // the bounds, keep the configured mean, and spread out to just below
  // the two-point limit (all mass at the bounds), which for a centered
  // mean on a width-3 interval is sd = 1.5.
  ComponentSpec c = spec_with(9.5, 5.0, 8, 11);
  Rng rng(9);
  const Moments m = collect(50000, [&] { return sample_drain_time(c, rng); });
  CHECK(m.lo >= 8.0);
  CHECK(m.hi <= 11.0);
  CHECK(m.mean == Approx(9.5).margin(0.04));
  CHECK(m.sd == Approx(1.5 * std::sqrt(0.999)).margin(0.03));
}

TEST_CASE("sampling a component is reproducible per seed") {
  ComponentSpec c = spec_with(12.3, 1.059, 11, 14);
  Rng a(10), b(10);
  for (int i = 0; i < 1000; ++i) {
    CHECK(sample_drain_time(c, a) == sample_drain_time(c, b));
  }
}

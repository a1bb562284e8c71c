#include <cmath>

#include "doctest.h"
#include "hubnet/errors.hpp"
#include "hubnet/fluid.hpp"
#include "oracles.hpp"

using namespace hubnet;

namespace {

// RK4 on q' = -lambda p_k q + mu_k, q(0) = 1.
double rk4_hub(double a, double mu, double t, int steps = 4000) {
  auto f = [&](double q) { return -a * q + mu; };
  double q = 1.0;
  const double h = t / steps;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(q), k2 = f(q + h * k1 / 2), k3 = f(q + h * k2 / 2), k4 = f(q + h * k3);
    q += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6;
  }
  return q;
}

const FluidParams kMarkov{1.0, 1.0, 0.5};
const FluidParams kTwoStation{1.0, 0.5, 0.25};

}  // namespace

TEST_CASE("hub fluid solves the linear ODE") {
  for (const auto& fp : {kMarkov, kTwoStation, FluidParams{2.5, 0.3, 0.1}}) {
    CHECK(hub_fluid(fp, 0.0) == 1.0);
    for (double t : {0.1, 0.5, 1.0, 2.0, 4.0, 10.0}) {
      CHECK(hub_fluid(fp, t) == doctest::Approx(rk4_hub(fp.inflow(), fp.mu_k, t)).epsilon(1e-11));
      CHECK(hub_fluid(fp, t) + satellite_fluid(fp, t) == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK(hub_fluid(fp, 60.0) == doctest::Approx(fp.mu_k / fp.inflow()).epsilon(1e-12));
  }
  CHECK(hub_fluid(kMarkov, 1.0) == doctest::Approx(0.5 + 0.5 * std::exp(-1.0)));
}

TEST_CASE("q_bar decreases and its forward differences alternate in sign") {
  const double d = 0.25;
  double prev = hub_fluid(kTwoStation, 0.0);
  for (int i = 1; i < 40; ++i) {
    const double cur = hub_fluid(kTwoStation, i * d);
    CHECK(cur < prev);
    prev = cur;
  }
  std::vector<double> v;
  for (int i = 0; i < 8; ++i) v.push_back(hub_fluid(kTwoStation, i * d));
  for (int n = 1; n <= 4; ++n) {
    std::vector<double> next;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) next.push_back(v[i + 1] - v[i]);
    v = next;
    for (double x : v) CHECK((n % 2 ? x < 0 : x > 0));
  }
}

TEST_CASE("window average matches quadrature") {
  for (auto [t0, t1] : {std::pair{0.0, 1.0}, std::pair{2.0, 4.0}, std::pair{0.3, 0.31}}) {
    const double ref =
        oracle::simpson([](double t) { return hub_fluid(kTwoStation, t); }, t0, t1, 2000) / (t1 - t0);
    CHECK(hub_fluid_average(kTwoStation, t0, t1) == doctest::Approx(ref).epsilon(1e-12));
  }
  CHECK(hub_fluid_average(kTwoStation, 1.5, 1.5) == hub_fluid(kTwoStation, 1.5));
  CHECK_THROWS_AS(hub_fluid_average(kTwoStation, 2.0, 1.0), DomainError);
}

TEST_CASE("curve dump") {
  const auto c = hub_fluid_curve(kMarkov, {0.0, 0.5, 1.0});
  REQUIRE(c.values.size() == 3);
  CHECK(c.values[2] == hub_fluid(kMarkov, 1.0));
}

TEST_CASE("partition expansion: closed form equals the binomial sum") {
  for (double delta : {0.01, 0.05, 0.2}) {
    for (long i = 0; i <= 30; ++i) {
      const double x = kTwoStation.inflow() * delta;
      const double exact = 1.0 - kTwoStation.drain_fraction() *
                                     static_cast<double>(oracle::binomial_sum(i, x));
      CHECK(partition_expansion(kTwoStation, delta, i) == doctest::Approx(exact).epsilon(1e-14));
      CHECK(std::abs(partition_expansion_sum(kTwoStation, delta, i) -
                     partition_expansion(kTwoStation, delta, i)) <= 1e-10);
    }
  }
  CHECK(partition_expansion(kTwoStation, 0.1, 0) == 1.0);
}

TEST_CASE("partition expansion converges to q_bar at first order") {
  for (double t : {0.5, 1.0, 2.0}) {
    double prev_err = 0.0;
    for (int level = 0; level <= 4; ++level) {
      const double delta = std::ldexp(1.0, -6 - level);
      const long i = static_cast<long>(std::floor(t / delta));
      const double err = std::abs(partition_expansion(kMarkov, delta, i) - hub_fluid(kMarkov, t));
      if (level > 0) {
        INFO("t=", t, " level=", level);
        CHECK(prev_err / err > 1.7);
        CHECK(prev_err / err < 2.3);
      }
      prev_err = err;
    }
  }
}

TEST_CASE("difference quotients converge to their limits") {
  const auto target = difference_quotient_targets(kMarkov);
  CHECK(target.d1 == doctest::Approx(0.5));
  CHECK(target.d2 == doctest::Approx(0.5));
  CHECK(target.d3 == doctest::Approx(0.5));
  DifferenceQuotients prev{};
  for (int level = 0; level <= 4; ++level) {
    const double delta = std::ldexp(1.0, -6 - level);
    const auto q = difference_quotient_limits(kMarkov, delta);
    const double e1 = std::abs(q.d1 - target.d1), e2 = std::abs(q.d2 - target.d2),
                 e3 = std::abs(q.d3 - target.d3);
    if (level > 0) {
      CHECK(std::abs(prev.d1 - target.d1) / e1 == doctest::Approx(2.0).epsilon(0.15));
      CHECK(std::abs(prev.d2 - target.d2) / e2 == doctest::Approx(2.0).epsilon(0.15));
      CHECK(std::abs(prev.d3 - target.d3) / e3 == doctest::Approx(2.0).epsilon(0.15));
    }
    prev = q;
  }
}

TEST_CASE("unnormalised third difference has the opposite sign") {
  const FluidParams fp = kTwoStation;
  const double a = fp.inflow(), gap = a - fp.mu_k;
  for (double delta : {1e-2, 1e-3}) {
    const double q1 = hub_fluid(fp, delta), q2 = hub_fluid(fp, 2 * delta),
                 q3 = hub_fluid(fp, 3 * delta);
    const double raw = (q3 - 3 * q2 + 3 * q1 - 1) / (delta * delta * delta);
    CHECK(raw == doctest::Approx(-a * a * gap).epsilon(0.02));
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(hub_fluid({1.0, 0.5, 0.6}, 1.0), DomainError);  // not a bottleneck
  CHECK_THROWS_AS(hub_fluid({1.0, 0.0, 0.1}, 1.0), DomainError);
  CHECK_THROWS_AS(hub_fluid(kMarkov, -1.0), DomainError);
  CHECK_THROWS_AS(partition_expansion(kMarkov, 0.0, 3), DomainError);
  CHECK_THROWS_AS(partition_expansion(kMarkov, 1.5, 3), DomainError);
  CHECK_THROWS_AS(partition_expansion(kMarkov, 0.1, -1), DomainError);
}

#include <cmath>
#include <functional>

#include "doctest.h"
#include "hubnet/closeness.hpp"
#include "hubnet/errors.hpp"

using namespace hubnet;

namespace {

// Brute-force sup of |S(x+y)/S(y) - S(x)| on a dense uniform grid, with the
// survival function written out by hand.
double brute_deviation(const std::function<double(double)>& surv, double x_max, double y_max,
                       int n) {
  double best = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double y = y_max * i / n;
    const double sy = surv(y);
    if (sy < 1e-12) continue;
    for (int k = 0; k <= n; ++k) {
      const double x = x_max * k / n;
      best = std::max(best, std::abs(surv(x + y) / sy - surv(x)));
    }
  }
  return best;
}

double brute_kolmogorov(const std::function<double(double)>& cdf, double lambda, double x_max,
                        int n) {
  double best = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double x = x_max * k / n;
    best = std::max(best, std::abs(cdf(x) - (1 - std::exp(-lambda * x))));
  }
  return best;
}

std::vector<Distribution> zoo() {
  return {Distribution::exponential(1.3),         Distribution::erlang(2, 2.0),
          Distribution::erlang(5, 1.0),           Distribution::hyperexp2(0.5, 0.5, 2.0),
          Distribution::hyperexp2(0.5, 0.9, 1.1), Distribution::deterministic(1.0),
          Distribution::gamma(0.5, 1.0),          Distribution::gamma(3.0, 2.0)};
}

}  // namespace

TEST_CASE("exponential law is memoryless on the grid") {
  const auto d = Distribution::exponential(1.3);
  const auto rep = closeness_report(d);
  CHECK(rep.epsilon_hat < 1e-12);
  CHECK(rep.kolmogorov_exp < 1e-12);
  CHECK(rep.aging == AgingClass::Boundary);
}

TEST_CASE("deterministic law: deviation 1, Kolmogorov distance 1 - 1/e") {
  const auto d = Distribution::deterministic(1.0);
  const Grid g = make_grid(d);
  CHECK(memoryless_deviation(d, g) == doctest::Approx(1.0));
  CHECK(kolmogorov_to_exponential(d, g) == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-9));
  CHECK(aging_class(d, g) == AgingClass::NBU);
}

TEST_CASE("aging classes of the families") {
  CHECK(aging_class(Distribution::erlang(2, 2.0), make_grid(Distribution::erlang(2, 2.0))) ==
        AgingClass::NBU);
  CHECK(aging_class(Distribution::gamma(3.0, 2.0), make_grid(Distribution::gamma(3.0, 2.0))) ==
        AgingClass::NBU);
  const auto h = Distribution::hyperexp2(0.5, 0.5, 2.0);
  CHECK(aging_class(h, make_grid(h)) == AgingClass::NWU);
  const auto g = Distribution::gamma(0.5, 1.0);
  CHECK(aging_class(g, make_grid(g)) == AgingClass::NWU);
  CHECK(aging_name(AgingClass::Neither) == "Neither");
}

TEST_CASE("grid values agree with a dense brute-force scan") {
  const auto h = Distribution::hyperexp2(0.5, 0.5, 2.0);
  auto surv = [](double x) { return 0.5 * std::exp(-0.5 * x) + 0.5 * std::exp(-2.0 * x); };
  const Grid g = make_grid(h);
  const double brute = brute_deviation(surv, g.x.back(), g.y.back(), 1500);
  const double eps = memoryless_deviation(h, g);
  CHECK(eps >= brute - 1e-3);
  CHECK(eps <= brute + 1e-3);

  const auto e = Distribution::erlang(2, 2.0);
  auto cdf = [](double x) { return 1 - std::exp(-2 * x) * (1 + 2 * x); };
  const Grid ge = make_grid(e);
  const double kb = brute_kolmogorov(cdf, 1.0, ge.x.back(), 200000);
  CHECK(kolmogorov_to_exponential(e, ge) == doctest::Approx(kb).epsilon(1e-6));
  CHECK(kb > 0.05);
}

TEST_CASE("near-exponential mixture has a small positive deviation") {
  const auto d = Distribution::hyperexp2(0.5, 0.9, 1.1);
  const auto rep = closeness_report(d);
  CHECK(rep.epsilon_hat > 1e-4);
  CHECK(rep.epsilon_hat < 0.05);
  CHECK(rep.aging == AgingClass::NWU);
}

TEST_CASE("grid maxima are nondecreasing under refinement") {
  for (const auto& d : zoo()) {
    GridSpec spec;
    spec.x_points = 257;
    spec.y_points = 65;
    const GridSpec fine = spec.refined();
    const Grid g1 = make_grid(d, spec);
    const Grid g2 = make_grid(d, fine);
    INFO(d.describe());
    for (double x : g1.x) CHECK(std::binary_search(g2.x.begin(), g2.x.end(), x));
    CHECK(memoryless_deviation(d, g2) >= memoryless_deviation(d, g1));
    CHECK(kolmogorov_to_exponential(d, g2) >= kolmogorov_to_exponential(d, g1));
  }
}

TEST_CASE("closeness chain inequalities hold for every family") {
  for (const auto& d : zoo()) {
    const auto rep = closeness_report(d);
    const Grid& g = rep.grid;
    INFO(d.describe(), " eps=", rep.epsilon_hat, " ks=", rep.kolmogorov_exp);
    CHECK(rep.epsilon_hat >= 0.0);
    CHECK(rep.epsilon_hat <= 1.0);
    CHECK(rep.kolmogorov_exp <= 2 * rep.epsilon_hat + 2 * g.tolerance);
    if (rep.aging != AgingClass::Neither) {
      CHECK(rep.kolmogorov_exp <= rep.epsilon_hat + 2 * g.tolerance);
    }
  }
}

TEST_CASE("residual-law spread is at most twice the deviation") {
  for (const auto& d : zoo()) {
    GridSpec spec;
    spec.x_points = 257;
    spec.y_points = 65;
    const Grid g = make_grid(d, spec);
    INFO(d.describe());
    CHECK(residual_law_spread(d, g) <= 2 * memoryless_deviation(d, g) + g.tolerance);
  }
}

TEST_CASE("grid layout and empty grids") {
  const auto d = Distribution::gamma(3.0, 2.0);
  const Grid g = make_grid(d);
  CHECK(g.x.front() == 0.0);
  CHECK(std::is_sorted(g.x.begin(), g.x.end()));
  CHECK(g.x.back() >= d.quantile(1 - 1e-6) * (1 - 1e-12));
  for (double y : g.y) CHECK(d.survival(y) >= 1e-12);
  CHECK(g.tolerance > 0.0);
  CHECK_FALSE(g.describe().empty());

  Grid empty;
  CHECK_THROWS_AS(memoryless_deviation(d, empty), DomainError);
  CHECK_THROWS_AS(kolmogorov_to_exponential(d, empty), DomainError);
}

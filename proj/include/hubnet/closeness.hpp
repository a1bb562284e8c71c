#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hubnet/distributions.hpp"

namespace hubnet {

// Evaluation grid for the sup-type closeness metrics. Both axes are
// geometric (plus the point 0); x runs up to the (1 - x_tail) quantile of G,
// y is kept only where the survival function is at least survival_floor.
// Refining x_points from n to 2n - 1 (same for y) yields a superset grid, so
// every grid maximum is nondecreasing under that refinement.
struct GridSpec {
  int x_points = 4096;
  int y_points = 512;
  double x_tail = 1e-6;
  double y_tail = 1e-12;
  double survival_floor = 1e-12;
  double decades = 6.0;  // geometric span below the upper end

  GridSpec refined() const {
    GridSpec g = *this;
    g.x_points = 2 * x_points - 1;
    g.y_points = 2 * y_points - 1;
    return g;
  }
};

struct Grid {
  std::vector<double> x;
  std::vector<double> y;
  // Largest increment of G (left limits, atoms excluded) and of the matched
  // exponential CDF between neighbouring x points: the amount by which a
  // grid maximum can undershoot the true supremum.
  double tolerance = 0.0;
  GridSpec spec;

  std::string describe() const;
};

Grid make_grid(const Distribution& d, const GridSpec& spec = {});

// max over the grid of |G(x) - G_y(x)|, G_y(x) = P{zeta <= x + y | zeta > y}.
double memoryless_deviation(const Distribution& d, const Grid& grid);
// max over the grid of |G(x) - (1 - exp(-lambda x))|, lambda = 1 / mean.
double kolmogorov_to_exponential(const Distribution& d, const Grid& grid);
// max over (x, y1, y2) of |G_{y1}(x) - G_{y2}(x)|.
double residual_law_spread(const Distribution& d, const Grid& grid);

enum class AgingClass { NBU, NWU, Boundary, Neither };
std::string_view aging_name(AgingClass a) noexcept;

inline constexpr double kAgingTolerance = 1e-9;

// Sign of S(x + y) - S(x) S(y) over the grid.
AgingClass aging_class(const Distribution& d, const Grid& grid,
                       double tolerance = kAgingTolerance);

struct ClosenessReport {
  double epsilon_hat = 0.0;
  double kolmogorov_exp = 0.0;
  AgingClass aging = AgingClass::Neither;
  Grid grid;
};

ClosenessReport closeness_report(const Distribution& d, const GridSpec& spec = {});

}  // namespace hubnet

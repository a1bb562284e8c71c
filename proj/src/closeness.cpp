#include "hubnet/closeness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hubnet/errors.hpp"

namespace hubnet {
namespace {

// Geometric points lo * (hi/lo)^(i/(n-1)) computed as exp(log lo + i*step);
// halving the step reproduces every old point bit-for-bit.
std::vector<double> geometric_axis(double hi, double decades, int n) {
  std::vector<double> axis;
  axis.reserve(static_cast<std::size_t>(n) + 1);
  axis.push_back(0.0);
  if (n == 1) {
    axis.push_back(hi);
    return axis;
  }
  const double log_hi = std::log(hi);
  const double log_lo = log_hi - decades * std::log(10.0);
  const double step = (log_hi - log_lo) / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) {
    axis.push_back(std::exp(log_lo + static_cast<double>(i) * step));
  }
  return axis;
}

// Survival with left/right limits; sums x + y that land within rounding of
// an atom are snapped onto it so jumps of G_y are not lost.
class Evaluator {
 public:
  explicit Evaluator(const Distribution& d) : d_(d), atoms_(d.atoms()) {}

  bool has_atoms() const { return !atoms_.empty(); }
  const std::vector<double>& atoms() const { return atoms_; }

  double snap(double z) const {
    for (double a : atoms_) {
      if (std::abs(z - a) <= 1e-13 * a) return a;
    }
    return z;
  }
  double survival(double z) const { return d_.survival(z); }
  double survival_left(double z) const { return 1.0 - d_.cdf_left(z); }

  // Candidate x points: grid plus atom locations and atom - y offsets.
  std::vector<double> x_candidates(const Grid& g) const {
    std::vector<double> xs = g.x;
    for (double a : atoms_) {
      xs.push_back(a);
      for (double y : g.y) {
        if (a - y > 0.0) xs.push_back(a - y);
      }
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
  }

 private:
  const Distribution& d_;
  std::vector<double> atoms_;
};

struct PairScan {
  double memoryless = 0.0;
  double max_defect = -INFINITY;  // max of S(x+y) - S(x)S(y)
  double min_defect = INFINITY;
};

PairScan scan_pairs(const Distribution& d, const Grid& grid) {
  const Evaluator ev(d);
  const std::vector<double> xs = ev.x_candidates(grid);
  std::vector<double> sx(xs.size()), sx_left(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx[i] = ev.survival(xs[i]);
    sx_left[i] = ev.has_atoms() ? ev.survival_left(xs[i]) : sx[i];
  }
  PairScan out;
  for (double y : grid.y) {
    const double sy = ev.survival(y);
    const bool conditional_ok = sy >= grid.spec.survival_floor;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double z = ev.snap(xs[i] + y);
      const double sz = ev.survival(z);
      const double defect = sz - sx[i] * sy;
      out.max_defect = std::max(out.max_defect, defect);
      out.min_defect = std::min(out.min_defect, defect);
      if (!conditional_ok) continue;
      // |G(x) - G_y(x)| = |S_y(x) - S(x)| with S_y(x) = S(x+y)/S(y).
      double dev = std::abs(sz / sy - sx[i]);
      if (ev.has_atoms()) {
        const double sz_left = ev.survival_left(z);
        dev = std::max(dev, std::abs(sz_left / sy - sx_left[i]));
        const double defect_left = sz_left - sx_left[i] * sy;
        out.max_defect = std::max(out.max_defect, defect_left);
        out.min_defect = std::min(out.min_defect, defect_left);
      }
      out.memoryless = std::max(out.memoryless, dev);
    }
  }
  return out;
}

AgingClass classify(const PairScan& scan, double tolerance) {
  const bool nbu = scan.max_defect <= tolerance;
  const bool nwu = scan.min_defect >= -tolerance;
  if (nbu && nwu) return AgingClass::Boundary;
  if (nbu) return AgingClass::NBU;
  if (nwu) return AgingClass::NWU;
  return AgingClass::Neither;
}

void require_nonempty(const Grid& grid) {
  if (grid.x.empty() || grid.y.empty()) throw DomainError("closeness grid is empty");
}

}  // namespace

std::string_view aging_name(AgingClass a) noexcept {
  switch (a) {
    case AgingClass::NBU: return "NBU";
    case AgingClass::NWU: return "NWU";
    case AgingClass::Boundary: return "Boundary";
    case AgingClass::Neither: return "Neither";
  }
  return "Neither";
}

std::string Grid::describe() const {
  std::ostringstream os;
  os.precision(6);
  os << "x: " << x.size() << " pts (0 + geometric up to " << (x.empty() ? 0.0 : x.back())
     << "), y: " << y.size() << " pts (0 + geometric up to " << (y.empty() ? 0.0 : y.back())
     << ", survival >= " << spec.survival_floor << "), tolerance " << tolerance;
  return os.str();
}

Grid make_grid(const Distribution& d, const GridSpec& spec) {
  if (spec.x_points < 1 || spec.y_points < 1) {
    throw DomainError("grid needs at least one x and one y point");
  }
  Grid g;
  g.spec = spec;
  const double x_max = d.quantile(1.0 - spec.x_tail);
  const double y_max = d.quantile(1.0 - spec.y_tail);
  g.x = geometric_axis(x_max, spec.decades, spec.x_points);
  for (double y : geometric_axis(y_max, spec.decades, spec.y_points)) {
    if (d.survival(y) >= spec.survival_floor) g.y.push_back(y);
  }

  const auto atoms = d.atoms();
  const double lambda = d.rate();
  double tol = 0.0;
  for (std::size_t i = 0; i + 1 < g.x.size(); ++i) {
    const double a = g.x[i];
    const double b = g.x[i + 1];
    double jump = 0.0;
    for (double at : atoms) {
      if (at > a && at < b) jump += 1.0;
    }
    tol = std::max(tol, d.cdf_left(b) - d.cdf(a) - jump);
    tol = std::max(tol, std::exp(-lambda * a) - std::exp(-lambda * b));
  }
  g.tolerance = tol;
  return g;
}

double memoryless_deviation(const Distribution& d, const Grid& grid) {
  require_nonempty(grid);
  return scan_pairs(d, grid).memoryless;
}

double kolmogorov_to_exponential(const Distribution& d, const Grid& grid) {
  require_nonempty(grid);
  const Evaluator ev(d);
  std::vector<double> xs = grid.x;
  for (double a : ev.atoms()) xs.push_back(a);
  const double lambda = d.rate();
  double best = 0.0;
  for (double x : xs) {
    const double e = -std::expm1(-lambda * x);
    best = std::max(best, std::abs(d.cdf(x) - e));
    if (ev.has_atoms()) best = std::max(best, std::abs(d.cdf_left(x) - e));
  }
  return best;
}

double residual_law_spread(const Distribution& d, const Grid& grid) {
  require_nonempty(grid);
  const Evaluator ev(d);
  const std::vector<double> xs = ev.x_candidates(grid);
  std::vector<double> ys;
  std::vector<double> sys;
  for (double y : grid.y) {
    const double sy = ev.survival(y);
    if (sy >= grid.spec.survival_floor) {
      ys.push_back(y);
      sys.push_back(sy);
    }
  }
  double best = 0.0;
  for (double x : xs) {
    double hi = -INFINITY, lo = INFINITY;
    double hi_left = -INFINITY, lo_left = INFINITY;
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const double z = ev.snap(x + ys[j]);
      const double v = ev.survival(z) / sys[j];
      hi = std::max(hi, v);
      lo = std::min(lo, v);
      if (ev.has_atoms()) {
        const double vl = ev.survival_left(z) / sys[j];
        hi_left = std::max(hi_left, vl);
        lo_left = std::min(lo_left, vl);
      }
    }
    best = std::max(best, hi - lo);
    if (ev.has_atoms()) best = std::max(best, hi_left - lo_left);
  }
  return best;
}

AgingClass aging_class(const Distribution& d, const Grid& grid, double tolerance) {
  require_nonempty(grid);
  return classify(scan_pairs(d, grid), tolerance);
}

ClosenessReport closeness_report(const Distribution& d, const GridSpec& spec) {
  ClosenessReport r;
  r.grid = make_grid(d, spec);
  const PairScan scan = scan_pairs(d, r.grid);
  r.epsilon_hat = scan.memoryless;
  r.aging = classify(scan, kAgingTolerance);
  r.kolmogorov_exp = kolmogorov_to_exponential(d, r.grid);
  return r;
}

}  // namespace hubnet

#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "hubnet/distributions.hpp"

namespace hubnet {

struct SolverOptions {
  double tolerance = 1e-12;
  long max_iterations = 1'000'000;
  int max_bisections = 200;
  // Fixed-point plateau: contraction ratio above this for `plateau_window`
  // consecutive steps hands over to bisection.
  double plateau_ratio = 0.9999;
  long plateau_window = 10'000;
  // Keep every fixed-point iterate in RootResult::trace.
  bool record_trace = false;
};

enum class RootMethod { FixedPoint, Bisection };
std::string_view method_name(RootMethod m) noexcept;

// Least root in (0, 1] of z = F(z) for an increasing convex F with F(1) = 1.
struct RootResult {
  double root = 1.0;
  long iterations = 0;
  double residual = 0.0;  // |z - F(z)| at exit
  RootMethod method = RootMethod::FixedPoint;
  bool converged = false;
  // Stability margin fails (mean * mu <= 1); root reported as 1.
  bool degenerate = false;
  std::vector<double> trace;
};

using FixedPointMap = std::function<double(double)>;

// Monotone iteration z_{n+1} = F(z_n) from z_0 = 0, bisection fallback on
// g(z) = z - F(z) over [0, 1 - 1e-12].
RootResult solve_least_root(const FixedPointMap& rhs, const SolverOptions& opts = {});

// An LST together with the mean of its law (needed for the stability test).
struct LstFunction {
  std::function<double(double)> eval;
  double mean;
};

LstFunction lst_of(const Distribution& d);

// Least positive root of z = L(mu - mu z).
RootResult least_root_lst(const LstFunction& lst, double mu, const SolverOptions& opts = {});

// Least root of z = exp(-a_mu (1 - z)).
RootResult poisson_ell(double a_mu, const SolverOptions& opts = {});

// Satellite interarrival law H: geometric(p) sum of G-distributed hub
// services, time-scaled by the fluid hub occupancy q_bar.
class CompoundSpec {
 public:
  CompoundSpec(Distribution base, double branch_prob, double scale, double service_rate);

  const Distribution& base() const noexcept { return base_; }
  double branch_prob() const noexcept { return p_; }
  double scale() const noexcept { return q_bar_; }
  double service_rate() const noexcept { return mu_; }

  double lambda() const noexcept { return base_.rate(); }
  // mean of H = 1 / (lambda p q_bar).
  double mean() const noexcept { return 1.0 / (lambda() * p_ * q_bar_); }
  // mu > lambda p q_bar, i.e. the least root lies strictly inside (0, 1).
  bool non_bottleneck() const noexcept { return mu_ * mean() > 1.0; }

 private:
  Distribution base_;
  double p_;
  double q_bar_;
  double mu_;
};

// p G(s/q) / (1 - (1-p) G(s/q)).
double compound_lst(const CompoundSpec& c, double s);

// phi_j: least root of z = compound_lst(c, mu - mu z).
RootResult satellite_root(const CompoundSpec& c, const SolverOptions& opts = {});

// Finite-N version: the scaled hub law uses M = floor(N * occupancy) units,
// z = p G(mu N (1-z) / M) / (1 - (1-p) G(mu N (1-z) / M)).
RootResult finite_n_root(const CompoundSpec& c, long long N, double occupancy,
                         const SolverOptions& opts = {});

}  // namespace hubnet

#include "hubnet/roots.hpp"

#include <cmath>

#include "hubnet/errors.hpp"

namespace hubnet {
namespace {

constexpr double kUpperBracket = 1.0 - 1e-12;

double checked(double v) {
  if (!std::isfinite(v)) throw NumericError("non-finite value in fixed-point map");
  return v;
}

RootResult degenerate_result() {
  RootResult r;
  r.root = 1.0;
  r.converged = true;
  r.degenerate = true;
  return r;
}

void bisect(const FixedPointMap& rhs, double lo, const SolverOptions& opts, RootResult& r) {
  r.method = RootMethod::Bisection;
  auto g = [&](double z) { return z - checked(rhs(z)); };
  double hi = kUpperBracket;
  if (g(hi) <= 0.0) {
    // Root is within 1e-12 of 1: numerically indistinguishable from the
    // bottleneck boundary.
    r.root = 1.0;
    r.degenerate = true;
    r.converged = true;
    r.residual = 0.0;
    return;
  }
  for (int i = 0; i < opts.max_bisections && hi - lo > opts.tolerance; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < 0.0) lo = mid; else hi = mid;
    ++r.iterations;
  }
  r.root = 0.5 * (lo + hi);
  r.residual = std::abs(g(r.root));
  r.converged = hi - lo <= opts.tolerance;
}

}  // namespace

std::string_view method_name(RootMethod m) noexcept {
  return m == RootMethod::FixedPoint ? "fixed_point" : "bisection";
}

RootResult solve_least_root(const FixedPointMap& rhs, const SolverOptions& opts) {
  RootResult r;
  double z = 0.0;
  double prev_step = -1.0;
  long plateau = 0;
  for (long n = 0; n < opts.max_iterations; ++n) {
    const double next = checked(rhs(z));
    ++r.iterations;
    if (opts.record_trace) r.trace.push_back(next);
    const double step = next - z;
    const double ratio = prev_step > 0.0 ? step / prev_step : 0.0;
    z = next;
    // A posteriori bound on the distance to the fixed point for a
    // contraction with ratio `ratio`.
    const double err = ratio > 0.0 && ratio < 1.0 ? step * ratio / (1.0 - ratio) : step;
    if (step <= opts.tolerance && err <= opts.tolerance) {
      r.root = z;
      r.residual = std::abs(z - checked(rhs(z)));
      r.converged = true;
      return r;
    }
    plateau = ratio > opts.plateau_ratio ? plateau + 1 : 0;
    if (plateau >= opts.plateau_window) break;
    prev_step = step;
  }
  bisect(rhs, std::min(z, kUpperBracket), opts, r);
  return r;
}

LstFunction lst_of(const Distribution& d) {
  return LstFunction{[d](double s) { return d.lst(s); }, d.mean()};
}

RootResult least_root_lst(const LstFunction& lst, double mu, const SolverOptions& opts) {
  if (!(mu > 0.0)) throw DomainError("service rate mu must be positive");
  if (mu * lst.mean <= 1.0) return degenerate_result();
  return solve_least_root([&](double z) { return lst.eval(mu - mu * z); }, opts);
}

RootResult poisson_ell(double a_mu, const SolverOptions& opts) {
  if (!(a_mu > 1.0)) return degenerate_result();
  return solve_least_root([a_mu](double z) { return std::exp(-a_mu * (1.0 - z)); }, opts);
}

CompoundSpec::CompoundSpec(Distribution base, double branch_prob, double scale,
                           double service_rate)
    : base_(std::move(base)), p_(branch_prob), q_bar_(scale), mu_(service_rate) {
  if (!(p_ > 0.0 && p_ <= 1.0)) throw DomainError("branch probability must lie in (0, 1]");
  if (!(q_bar_ > 0.0 && q_bar_ <= 1.0)) throw DomainError("hub occupancy must lie in (0, 1]");
  if (!(mu_ > 0.0) || !std::isfinite(mu_)) throw DomainError("service rate must be positive");
}

double compound_lst(const CompoundSpec& c, double s) {
  const double g = c.base().lst(s / c.scale());
  const double p = c.branch_prob();
  return p * g / (1.0 - (1.0 - p) * g);
}

RootResult satellite_root(const CompoundSpec& c, const SolverOptions& opts) {
  if (!c.non_bottleneck()) return degenerate_result();
  const double mu = c.service_rate();
  return solve_least_root([&](double z) { return compound_lst(c, mu - mu * z); }, opts);
}

RootResult finite_n_root(const CompoundSpec& c, long long N, double occupancy,
                         const SolverOptions& opts) {
  if (N < 1) throw DomainError("unit count N must be positive");
  if (!(occupancy > 0.0 && occupancy <= 1.0)) {
    throw DomainError("occupancy must lie in (0, 1]");
  }
  const auto M = static_cast<long long>(std::floor(static_cast<double>(N) * occupancy));
  if (M < 1) throw DomainError("floor(N * occupancy) must be at least 1");
  const double ratio = static_cast<double>(N) / static_cast<double>(M);
  const double mu = c.service_rate();
  const double p = c.branch_prob();
  // Mean of the finite-N compound law is ratio / (lambda p).
  if (mu * ratio / (c.lambda() * p) <= 1.0) return degenerate_result();
  const Distribution& g = c.base();
  return solve_least_root(
      [&](double z) {
        const double gs = g.lst(mu * ratio * (1.0 - z));
        return p * gs / (1.0 - (1.0 - p) * gs);
      },
      opts);
}

}  // namespace hubnet

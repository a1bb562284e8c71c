#include "hubnet/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hubnet/errors.hpp"

namespace hubnet {

std::string_view variant_name(MomentVariant v) noexcept {
  return v == MomentVariant::Corrected ? "corrected" : "legacy";
}

std::string_view theorem_name(Theorem t) noexcept { return t == Theorem::T1 ? "T1" : "T2"; }

CompoundMoments wald_moments(const Distribution& d, double p, double q_bar,
                             MomentVariant variant) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("routing probability must lie in (0, 1)");
  if (!(q_bar > 0.0 && q_bar <= 1.0)) throw DomainError("q_bar must lie in (0, 1]");
  const double lambda = d.rate();
  const double r = d.second_moment();
  const double mean_tau = 1.0 / p;
  const double var_tau = variant == MomentVariant::Corrected
                             ? (1.0 - p) / (p * p)
                             : 1.0 / (1.0 - p) + (1.0 - 2.0 * p) / (p * p);
  // Summands have law G(q_bar x): mean 1/(lambda q_bar), variance
  // (r - 1/lambda^2) / q_bar^2.
  const double mean_xi = 1.0 / (lambda * q_bar);
  const double var_xi = (r - 1.0 / (lambda * lambda)) / (q_bar * q_bar);
  const double a = mean_xi * mean_tau;
  const double var_s = var_xi * mean_tau + var_tau * mean_xi * mean_xi;
  return CompoundMoments{a, var_s + a * a, variant};
}

RolskiBounds rolski_bounds(const CompoundMoments& m, double mu, const SolverOptions& opts) {
  if (!(mu > 0.0)) throw DomainError("service rate mu must be positive");
  RolskiBounds out;
  out.ell = poisson_ell(m.a * mu, opts);
  if (out.ell.degenerate) {
    out.degenerate = true;
    return out;
  }
  out.lo = out.ell.root;
  out.hi = 1.0 + (m.a * m.a / m.b) * (out.ell.root - 1.0);
  return out;
}

double continuity_gap(double kappa, const CompoundMoments& m, double mu,
                      const SolverOptions& opts) {
  const double threshold = 1.0 - m.a * m.a / m.b;
  if (!(kappa >= 0.0)) throw DomainError("kappa must be non-negative");
  if (!(kappa < threshold)) {
    throw PreconditionError(
        "kappa must be strictly below 1 - a^2/b = " + std::to_string(threshold), threshold);
  }
  const RootResult ell = poisson_ell(m.a * mu, opts);
  if (ell.degenerate) throw DomainError("continuity gap needs mu * a > 1");
  return kappa * (1.0 - ell.root);
}

double rho_of_t(double lambda, double p_j, double mu_j, double q_bar) {
  if (!(mu_j > 0.0)) throw DomainError("mu_j must be positive");
  return lambda * q_bar * p_j / mu_j;
}

BoundsReport theorem_envelope(const Distribution& d, double p_j, double mu_j, double q_bar,
                              double epsilon, Theorem theorem, MomentVariant variant,
                              const SolverOptions& opts) {
  if (!(epsilon >= 0.0)) throw DomainError("epsilon must be non-negative");
  BoundsReport rep;
  rep.theorem = theorem;
  rep.variant = variant;
  rep.f1_satisfied = check_condition_f1(d);
  const CompoundMoments m = wald_moments(d, p_j, q_bar, variant);
  rep.a = m.a;
  rep.b = m.b;
  rep.rho = rho_of_t(d.rate(), p_j, mu_j, q_bar);
  const RolskiBounds rb = rolski_bounds(m, mu_j, opts);
  if (rb.degenerate) {
    rep.degenerate = true;
    rep.lower = rep.upper = 1.0;
    return rep;
  }
  rep.ell = rb.lo;
  rep.rolski_lo = rb.lo;
  rep.rolski_hi = rb.hi;
  constexpr double kSlack = 1e-12;
  rep.f2_satisfied = rep.ell <= rep.rho + kSlack && rep.rho <= rep.rolski_hi + kSlack;
  const double factor = (theorem == Theorem::T1 ? 2.0 : 1.0) * epsilon / p_j;
  const double continuity = factor * (1.0 - rep.ell);
  rep.eps_lo = std::max(0.0, std::min(rep.rho - rep.ell, continuity));
  rep.eps_hi = std::max(0.0, std::min(rep.rolski_hi - rep.rho, continuity));
  rep.lower = rep.rho - rep.eps_lo;
  rep.upper = rep.rho + rep.eps_hi;
  return rep;
}

double QueueLengthLaw::tail(long i) const {
  if (i < 0) return 1.0;
  return rho * std::pow(phi, static_cast<double>(i));
}

QueueLengthLaw queue_length_law(double rho, double phi, long i_max) {
  if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("rho must lie in [0, 1)");
  if (!(phi > 0.0 && phi < 1.0)) throw DomainError("phi must lie in (0, 1)");
  QueueLengthLaw law{rho, phi, {}};
  if (i_max < 0) {
    if (rho == 0.0) {
      i_max = 0;
    } else {
      i_max = 0;
      while (i_max < kLawMaxSupport && law.tail(i_max) >= kLawTailMass) ++i_max;
    }
  }
  law.probabilities.resize(static_cast<std::size_t>(i_max) + 1);
  law.probabilities[0] = 1.0 - rho;
  double power = 1.0;  // phi^{i-1}
  for (long i = 1; i <= i_max; ++i) {
    law.probabilities[static_cast<std::size_t>(i)] = rho * power * (1.0 - phi);
    power *= phi;
  }
  return law;
}

}  // namespace hubnet

#pragma once

#include <string_view>
#include <vector>

#include "hubnet/distributions.hpp"
#include "hubnet/roots.hpp"

namespace hubnet {

// Which geometric-variance formula feeds the second compound moment.
//   Legacy: Var(tau) = 1/(1-p) + (1-2p)/p^2
//   Corrected:      Var(tau) = (1-p)/p^2
// The two coincide only at p = 1/2.
enum class MomentVariant { Legacy, Corrected };
std::string_view variant_name(MomentVariant v) noexcept;

// First two moments of H (geometric(p) sum of hub services scaled by q_bar).
struct CompoundMoments {
  double a;  // mean, 1 / (lambda p q_bar)
  double b;  // second moment
  MomentVariant variant;
};

CompoundMoments wald_moments(const Distribution& d, double p, double q_bar,
                             MomentVariant variant = MomentVariant::Corrected);

// Distribution-free sandwich for the least root of z = H(mu - mu z) given the
// two moments of H: ell <= root <= 1 + (a^2/b)(ell - 1), ell the root of
// z = exp(-a mu (1 - z)).
struct RolskiBounds {
  double lo = 1.0;
  double hi = 1.0;
  RootResult ell;
  bool degenerate = false;
};

RolskiBounds rolski_bounds(const CompoundMoments& m, double mu, const SolverOptions& opts = {});

// kappa (1 - ell): root-distance bound for two laws with moments (a, b) at
// Kolmogorov distance below kappa. Throws PreconditionError (threshold
// 1 - a^2/b) unless kappa < 1 - a^2/b.
double continuity_gap(double kappa, const CompoundMoments& m, double mu,
                      const SolverOptions& opts = {});

// rho_j = lambda q_bar p_j / mu_j; values >= 1 mean station j is saturated.
double rho_of_t(double lambda, double p_j, double mu_j, double q_bar);

enum class Theorem { T1, T2 };
std::string_view theorem_name(Theorem t) noexcept;

struct BoundsReport {
  double rho = 0.0;
  double ell = 1.0;
  double a = 0.0;
  double b = 0.0;
  double rolski_lo = 1.0;
  double rolski_hi = 1.0;
  double eps_lo = 0.0;  // epsilon_1 (T1) or epsilon_3 (T2), clamped at 0
  double eps_hi = 0.0;  // epsilon_2 (T1) or epsilon_4 (T2), clamped at 0
  double lower = 0.0;   // rho - eps_lo
  double upper = 0.0;   // rho + eps_hi
  Theorem theorem = Theorem::T1;
  MomentVariant variant = MomentVariant::Corrected;
  bool f1_satisfied = false;
  bool f2_satisfied = false;
  bool degenerate = false;
};

// Envelope rho - eps_lo <= phi_j <= rho + eps_hi with
//   eps_lo = min{rho - ell, c (1 - ell)}, eps_hi = min{hi - rho, c (1 - ell)},
// c = 2 eps / p_j (T1) or eps / p_j (T2). `epsilon` is any upper bound on the
// memoryless deviation of d; it is not re-measured here.
BoundsReport theorem_envelope(const Distribution& d, double p_j, double mu_j, double q_bar,
                              double epsilon, Theorem theorem,
                              MomentVariant variant = MomentVariant::Corrected,
                              const SolverOptions& opts = {});

// Queue-length law P{Q = 0} = 1 - rho, P{Q = i} = rho phi^{i-1} (1 - phi).
struct QueueLengthLaw {
  double rho;
  double phi;
  std::vector<double> probabilities;  // index i = queue length 0..i_max

  double mean() const noexcept { return rho / (1.0 - phi); }
  // P{Q > i}.
  double tail(long i) const;
};

inline constexpr double kLawTailMass = 1e-12;
inline constexpr long kLawMaxSupport = 10'000;

// i_max < 0 selects the smallest i_max with tail mass below 1e-12 (capped
// at 10^4).
QueueLengthLaw queue_length_law(double rho, double phi, long i_max = -1);

}  // namespace hubnet

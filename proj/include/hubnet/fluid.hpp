#pragma once

#include <vector>

namespace hubnet {

// Rates seen by the bottleneck station k: hub rate lambda, routing
// probability p_k and service rate mu_k, with mu_k < lambda p_k.
struct FluidParams {
  double lambda;
  double p_k;
  double mu_k;

  // Throws DomainError unless the bottleneck condition holds.
  void validate() const;
  double inflow() const noexcept { return lambda * p_k; }
  // (lambda p_k - mu_k) / (lambda p_k): fraction of units eventually stuck
  // at the bottleneck.
  double drain_fraction() const noexcept { return (inflow() - mu_k) / inflow(); }
};

// Normalised hub occupancy q_bar(t) = 1 - c (1 - exp(-lambda p_k t)).
double hub_fluid(const FluidParams& fp, double t);
// Normalised bottleneck queue q(t) = 1 - q_bar(t).
double satellite_fluid(const FluidParams& fp, double t);
// (1 / (t1 - t0)) * integral of q_bar over [t0, t1]; q_bar(t0) when t0 == t1.
double hub_fluid_average(const FluidParams& fp, double t0, double t1);

struct FluidCurve {
  std::vector<double> times;
  std::vector<double> values;  // q_bar(t)
};

FluidCurve hub_fluid_curve(const FluidParams& fp, const std::vector<double>& times);

// Hub occupancy after i partition steps of width delta:
// U(i, delta) = 1 - c [1 - (1 - lambda p_k delta)^i].
double partition_expansion(const FluidParams& fp, double delta, long i);
// Same quantity from the alternating binomial sum
// sum_{l=1}^{i} (-1)^{l+1} C(i, l) (lambda p_k delta)^l, compensated summation.
double partition_expansion_sum(const FluidParams& fp, double delta, long i);

// Sign-normalised forward differences of q_bar at 0, (-1)^n Delta^n / delta^n:
//   d1 = (1 - q(d)) / d                         -> lambda p_k - mu_k
//   d2 = (q(2d) - 2 q(d) + 1) / d^2             -> lambda p_k (lambda p_k - mu_k)
//   d3 = (1 - 3 q(d) + 3 q(2d) - q(3d)) / d^3   -> (lambda p_k)^2 (lambda p_k - mu_k)
struct DifferenceQuotients {
  double d1;
  double d2;
  double d3;
};

DifferenceQuotients difference_quotient_limits(const FluidParams& fp, double delta);
// The limits the quotients converge to as delta -> 0.
DifferenceQuotients difference_quotient_targets(const FluidParams& fp);

}  // namespace hubnet

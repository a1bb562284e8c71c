#include "hubnet/fluid.hpp"

#include <cmath>

#include "hubnet/errors.hpp"

namespace hubnet {
namespace {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void require_time(double t) {
  if (!(t >= 0.0)) throw DomainError("time must be non-negative");
}

}  // namespace

void FluidParams::validate() const {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  if (!(p_k > 0.0 && p_k <= 1.0)) throw DomainError("p_k must lie in (0, 1]");
  if (!(mu_k > 0.0)) throw DomainError("mu_k must be positive");
  if (!(mu_k < lambda * p_k)) {
    throw DomainError("bottleneck condition mu_k < lambda p_k violated");
  }
}

double hub_fluid(const FluidParams& fp, double t) {
  fp.validate();
  require_time(t);
  // 1 - c (1 - e^{-at}) written with expm1 for small t.
  return 1.0 + fp.drain_fraction() * std::expm1(-fp.inflow() * t);
}

double satellite_fluid(const FluidParams& fp, double t) {
  fp.validate();
  require_time(t);
  return -fp.drain_fraction() * std::expm1(-fp.inflow() * t);
}

double hub_fluid_average(const FluidParams& fp, double t0, double t1) {
  fp.validate();
  require_time(t0);
  if (!(t1 >= t0)) throw DomainError("window end precedes its start");
  if (t1 == t0) return hub_fluid(fp, t0);
  const double a = fp.inflow();
  const double c = fp.drain_fraction();
  const double decay = std::exp(-a * t0) * -std::expm1(-a * (t1 - t0));
  return (1.0 - c) + c * decay / (a * (t1 - t0));
}

FluidCurve hub_fluid_curve(const FluidParams& fp, const std::vector<double>& times) {
  FluidCurve curve;
  curve.times = times;
  curve.values.reserve(times.size());
  for (double t : times) curve.values.push_back(hub_fluid(fp, t));
  return curve;
}

double partition_expansion(const FluidParams& fp, double delta, long i) {
  fp.validate();
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  if (i < 0) throw DomainError("partition index must be non-negative");
  const double x = fp.inflow() * delta;
  if (!(x < 1.0)) throw DomainError("lambda p_k delta must be below 1");
  return 1.0 - fp.drain_fraction() * -std::expm1(static_cast<double>(i) * std::log1p(-x));
}

double partition_expansion_sum(const FluidParams& fp, double delta, long i) {
  fp.validate();
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  if (i < 0) throw DomainError("partition index must be non-negative");
  const double x = fp.inflow() * delta;
  if (!(x < 1.0)) throw DomainError("lambda p_k delta must be below 1");
  CompensatedSum sum;
  double term = 1.0;  // C(i, l) x^l, built incrementally
  for (long l = 1; l <= i; ++l) {
    term *= x * static_cast<double>(i - l + 1) / static_cast<double>(l);
    sum.add(l % 2 == 1 ? term : -term);
  }
  return 1.0 - fp.drain_fraction() * sum.value();
}

DifferenceQuotients difference_quotient_limits(const FluidParams& fp, double delta) {
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  const double q1 = hub_fluid(fp, delta);
  const double q2 = hub_fluid(fp, 2.0 * delta);
  const double q3 = hub_fluid(fp, 3.0 * delta);
  return DifferenceQuotients{
      (1.0 - q1) / delta,
      (q2 - 2.0 * q1 + 1.0) / (delta * delta),
      (1.0 - 3.0 * q1 + 3.0 * q2 - q3) / (delta * delta * delta),
  };
}

DifferenceQuotients difference_quotient_targets(const FluidParams& fp) {
  fp.validate();
  const double a = fp.inflow();
  const double gap = a - fp.mu_k;
  return DifferenceQuotients{gap, a * gap, a * a * gap};
}

}  // namespace hubnet

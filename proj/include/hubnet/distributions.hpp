#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hubnet/rng.hpp"

namespace hubnet {

enum class Family { Exponential, ErlangK, HyperExp2, Deterministic, GammaShapeRate };

std::string_view family_name(Family f) noexcept;

namespace law {
struct Exponential {
  double rate;
  bool operator==(const Exponential&) const = default;
};
struct Erlang {
  int k;
  double rate;
  bool operator==(const Erlang&) const = default;
};
// Mixture: with probability `weight` Exp(rate1), otherwise Exp(rate2).
struct HyperExp2 {
  double weight;
  double rate1;
  double rate2;
  bool operator==(const HyperExp2&) const = default;
};
struct Deterministic {
  double value;
  bool operator==(const Deterministic&) const = default;
};
struct Gamma {
  double shape;
  double rate;
  bool operator==(const Gamma&) const = default;
};
}  // namespace law

struct Moments {
  double mean;
  double second_moment;
};

// Service-time law G of a positive random variable with finite second
// moment. Immutable after construction; every family has a closed-form LST.
class Distribution {
 public:
  using Params = std::variant<law::Exponential, law::Erlang, law::HyperExp2,
                              law::Deterministic, law::Gamma>;

  static Distribution exponential(double rate);
  static Distribution erlang(int k, double rate);
  static Distribution hyperexp2(double weight, double rate1, double rate2);
  static Distribution deterministic(double value);
  static Distribution gamma(double shape, double rate);

  Family family() const noexcept;
  const Params& params() const noexcept { return params_; }

  // Right-continuous CDF G(x) and its left limit G(x-).
  double cdf(double x) const;
  double cdf_left(double x) const;
  // 1 - G(x), computed directly so that tails keep relative accuracy.
  double survival(double x) const;
  // Density of the absolutely continuous part (0 for Deterministic).
  double pdf(double x) const;

  // Laplace-Stieltjes transform; throws DomainError for s < 0.
  double lst(double s) const;

  Moments moments() const noexcept;
  double mean() const noexcept { return moments().mean; }
  double second_moment() const noexcept { return moments().second_moment; }
  // lambda = 1 / mean.
  double rate() const noexcept { return 1.0 / mean(); }

  // Generalised inverse of the CDF, u in (0, 1).
  double quantile(double u) const;
  double sample(RngStream& rng) const { return quantile(rng.uniform()); }

  // Jump locations of the CDF.
  std::vector<double> atoms() const;

  std::string describe() const;

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  explicit Distribution(Params p) : params_(p) {}
  Params params_;
};

// Duration of a hub service that starts with K units present: X / K with
// X ~ G, so the mean is 1 / (K lambda).
double scaled_service_sample(const Distribution& d, long long K, RngStream& rng);

// Condition r > 2 / lambda^2 (strict).
bool check_condition_f1(const Distribution& d) noexcept;

}  // namespace hubnet

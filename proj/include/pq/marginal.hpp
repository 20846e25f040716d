#pragma once

#include <string>

#include "pq/random.hpp"

namespace pq {

/// Continuous, strictly increasing univariate law with closed-form quantile.
class Marginal {
 public:
  enum class Family { Uniform, Normal, Exponential };

  static Marginal uniform(double a, double b);
  static Marginal normal(double mean, double sd);
  static Marginal exponential(double rate);

  Family family() const noexcept { return family_; }
  double param1() const noexcept { return p1_; }
  double param2() const noexcept { return p2_; }

  double cdf(double x) const;
  double survival(double x) const;
  double quantile(double u) const;
  double density(double x) const;
  double sample(Rng& rng) const;

  /// Interval carrying all but ~1e-15 of the mass.
  double lower_bound() const;
  double upper_bound() const;

  std::string describe() const;

 private:
  Marginal(Family f, double p1, double p2) : family_(f), p1_(p1), p2_(p2) {}

  Family family_;
  double p1_;
  double p2_;
};

}  // namespace pq

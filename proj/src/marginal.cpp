#include "pq/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "pq/error.hpp"

namespace pq {

Marginal Marginal::uniform(double a, double b) {
  if (!(a < b)) throw Error(ErrorCode::InvalidArgument, "uniform(a,b) needs a < b");
  return {Family::Uniform, a, b};
}

Marginal Marginal::normal(double mean, double sd) {
  if (!(sd > 0.0)) throw Error(ErrorCode::InvalidArgument, "normal sd must be positive");
  return {Family::Normal, mean, sd};
}

Marginal Marginal::exponential(double rate) {
  if (!(rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "exponential rate must be positive");
  return {Family::Exponential, rate, 0.0};
}

double Marginal::cdf(double x) const {
  switch (family_) {
    case Family::Uniform: return std::clamp((x - p1_) / (p2_ - p1_), 0.0, 1.0);
    case Family::Normal: return 0.5 * std::erfc(-(x - p1_) / (p2_ * std::sqrt(2.0)));
    case Family::Exponential: return x <= 0.0 ? 0.0 : -std::expm1(-p1_ * x);
  }
  return 0.0;
}

double Marginal::survival(double x) const {
  switch (family_) {
    case Family::Uniform: return std::clamp((p2_ - x) / (p2_ - p1_), 0.0, 1.0);
    case Family::Normal: return 0.5 * std::erfc((x - p1_) / (p2_ * std::sqrt(2.0)));
    case Family::Exponential: return x <= 0.0 ? 1.0 : std::exp(-p1_ * x);
  }
  return 0.0;
}

double Marginal::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw Error(ErrorCode::TauOutOfRange, "quantile level outside [0,1]");
  switch (family_) {
    case Family::Uniform: return p1_ + u * (p2_ - p1_);
    case Family::Normal:
      if (u == 0.0) return -INFINITY;
      if (u == 1.0) return INFINITY;
      return boost::math::quantile(boost::math::normal_distribution<double>(p1_, p2_), u);
    case Family::Exponential: return u == 1.0 ? INFINITY : -std::log1p(-u) / p1_;
  }
  return 0.0;
}

double Marginal::density(double x) const {
  switch (family_) {
    case Family::Uniform: return (x >= p1_ && x <= p2_) ? 1.0 / (p2_ - p1_) : 0.0;
    case Family::Normal: {
      const double z = (x - p1_) / p2_;
      return std::exp(-0.5 * z * z) / (p2_ * std::sqrt(2.0 * M_PI));
    }
    case Family::Exponential: return x < 0.0 ? 0.0 : p1_ * std::exp(-p1_ * x);
  }
  return 0.0;
}

double Marginal::sample(Rng& rng) const {
  switch (family_) {
    case Family::Uniform: return std::uniform_real_distribution<double>(p1_, p2_)(rng);
    case Family::Normal: return std::normal_distribution<double>(p1_, p2_)(rng);
    case Family::Exponential: return std::exponential_distribution<double>(p1_)(rng);
  }
  return 0.0;
}

double Marginal::lower_bound() const {
  switch (family_) {
    case Family::Uniform: return p1_;
    case Family::Normal: return p1_ - 8.0 * p2_;
    case Family::Exponential: return 0.0;
  }
  return 0.0;
}

double Marginal::upper_bound() const {
  switch (family_) {
    case Family::Uniform: return p2_;
    case Family::Normal: return p1_ + 8.0 * p2_;
    case Family::Exponential: return 35.0 / p1_;
  }
  return 0.0;
}

std::string Marginal::describe() const {
  std::ostringstream os;
  switch (family_) {
    case Family::Uniform: os << "uniform(" << p1_ << "," << p2_ << ")"; break;
    case Family::Normal: os << "normal(" << p1_ << "," << p2_ << ")"; break;
    case Family::Exponential: os << "exponential(" << p1_ << ")"; break;
  }
  return os.str();
}

}  // namespace pq

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ncmart {

// Exponent of a non-commutative L^p norm.  Valid values satisfy 1 <= p <= inf;
// infinity is a first-class value and selects the operator norm.
class PExponent {
 public:
  // Implicit on purpose: call sites read schatten_norm(x, 2.0).
  PExponent(double value) : value_(value) {
    if (std::isnan(value) || value < 1.0) {
      throw std::invalid_argument("PExponent: need 1 <= p <= inf, got " +
                                  std::to_string(value));
    }
  }

  static PExponent inf() {
    return PExponent(std::numeric_limits<double>::infinity());
  }

  double value() const { return value_; }
  bool is_inf() const { return std::isinf(value_); }

  // 1/p, with 1/inf = 0.
  double reciprocal() const { return is_inf() ? 0.0 : 1.0 / value_; }

  // Conjugate exponent q with 1/p + 1/q = 1.
  PExponent conjugate() const {
    if (is_inf()) return PExponent(1.0);
    if (value_ == 1.0) return inf();
    return PExponent(value_ / (value_ - 1.0));
  }

  friend bool operator==(const PExponent& a, const PExponent& b) {
    return a.value_ == b.value_ || (a.is_inf() && b.is_inf());
  }
  friend bool operator!=(const PExponent& a, const PExponent& b) {
    return !(a == b);
  }

 private:
  double value_;
};

}  // namespace ncmart

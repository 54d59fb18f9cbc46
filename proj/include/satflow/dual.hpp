#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace satflow {

/// Forward-mode dual number: a value and one directional derivative.
///
/// Kinks follow a fixed subgradient convention: pos_part and neg_part have
/// zero derivative at 0, abs has zero derivative at 0, and max/min pick the
/// first argument on ties.
struct Dual {
  double val = 0.0;
  double der = 0.0;

  constexpr Dual() = default;
  constexpr Dual(double v) : val(v) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(double v, double d) : val(v), der(d) {}

  Dual& operator+=(const Dual& o) {
    val += o.val;
    der += o.der;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    val -= o.val;
    der -= o.der;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    der = der * o.val + val * o.der;
    val *= o.val;
    return *this;
  }
  Dual& operator/=(const Dual& o);
};

class DualDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator-(const Dual& a) { return {-a.val, -a.der}; }
inline Dual operator+(const Dual& a) { return a; }

inline Dual& Dual::operator/=(const Dual& o) {
  if (o.val == 0.0) throw DualDomainError("dual division by zero");
  der = (der * o.val - val * o.der) / (o.val * o.val);
  val /= o.val;
  return *this;
}
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }

inline bool operator==(const Dual& a, const Dual& b) { return a.val == b.val; }
inline bool operator!=(const Dual& a, const Dual& b) { return a.val != b.val; }
inline bool operator<(const Dual& a, const Dual& b) { return a.val < b.val; }
inline bool operator>(const Dual& a, const Dual& b) { return a.val > b.val; }
inline bool operator<=(const Dual& a, const Dual& b) { return a.val <= b.val; }
inline bool operator>=(const Dual& a, const Dual& b) { return a.val >= b.val; }

inline std::ostream& operator<<(std::ostream& os, const Dual& a) {
  return os << a.val << "+" << a.der << "e";
}

inline Dual exp(const Dual& a) {
  const double e = std::exp(a.val);
  return {e, e * a.der};
}
inline Dual log(const Dual& a) {
  if (!(a.val > 0.0)) throw DualDomainError("dual log of non-positive value");
  return {std::log(a.val), a.der / a.val};
}
inline Dual sqrt(const Dual& a) {
  if (a.val < 0.0) throw DualDomainError("dual sqrt of negative value");
  const double s = std::sqrt(a.val);
  return {s, s > 0.0 ? a.der / (2.0 * s) : 0.0};
}
inline Dual pow(const Dual& a, double p) {
  if (p == 0.0) return {1.0, 0.0};
  if (p == 1.0) return a;
  const double v = std::pow(a.val, p);
  const double d = a.val == 0.0 ? (p > 1.0 ? 0.0 : std::numeric_limits<double>::infinity())
                                : p * std::pow(a.val, p - 1.0);
  return {v, d * a.der};
}
inline Dual abs(const Dual& a) {
  if (a.val > 0.0) return a;
  if (a.val < 0.0) return -a;
  return {0.0, 0.0};
}
inline Dual max(const Dual& a, const Dual& b) { return b.val > a.val ? b : a; }
inline Dual min(const Dual& a, const Dual& b) { return b.val < a.val ? b : a; }

// a_+ = max{a,0}; derivative 0 at a = 0.
inline Dual pos_part(const Dual& a) { return a.val > 0.0 ? a : Dual{0.0, 0.0}; }
// a_- = min{a,0}; derivative 0 at a = 0.
inline Dual neg_part(const Dual& a) { return a.val < 0.0 ? a : Dual{0.0, 0.0}; }

inline double pos_part(double a) { return a > 0.0 ? a : 0.0; }
inline double neg_part(double a) { return a < 0.0 ? a : 0.0; }

inline double value_of(double a) { return a; }
inline double value_of(const Dual& a) { return a.val; }

/// Clamp into [lo, hi]; the derivative is dropped outside the interval.
inline Dual clamp(const Dual& a, double lo, double hi) {
  if (a.val < lo) return {lo, 0.0};
  if (a.val > hi) return {hi, 0.0};
  return a;
}
inline double clamp(double a, double lo, double hi) { return a < lo ? lo : (a > hi ? hi : a); }

}  // namespace satflow

namespace Eigen {

template <>
struct NumTraits<satflow::Dual> : NumTraits<double> {
  using Real = satflow::Dual;
  using NonInteger = satflow::Dual;
  using Nested = satflow::Dual;
  using Literal = satflow::Dual;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 2,
    MulCost = 3
  };
};

template <typename BinaryOp>
struct ScalarBinaryOpTraits<satflow::Dual, double, BinaryOp> {
  using ReturnType = satflow::Dual;
};
template <typename BinaryOp>
struct ScalarBinaryOpTraits<double, satflow::Dual, BinaryOp> {
  using ReturnType = satflow::Dual;
};

}  // namespace Eigen

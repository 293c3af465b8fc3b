#pragma once

// Forward-mode dual numbers a + b*eps with eps^2 = 0.
//
// Dual<T> is closed under nesting: Dual<Dual<double>> carries mixed second
// derivatives, which the Jacobi-identity and Hamilton-Jacobi checks need.

#include <cmath>
#include <type_traits>

namespace slicekit {

template <typename T>
struct Dual {
  T val{};
  T der{};

  constexpr Dual() = default;
  constexpr Dual(T v) : val(v), der{} {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(T v, T d) : val(v), der(d) {}

  constexpr Dual& operator+=(const Dual& o) { val += o.val; der += o.der; return *this; }
  constexpr Dual& operator-=(const Dual& o) { val -= o.val; der -= o.der; return *this; }
  constexpr Dual& operator*=(const Dual& o) {
    der = der * o.val + val * o.der;
    val *= o.val;
    return *this;
  }
  constexpr Dual& operator/=(const Dual& o) {
    const T q = val / o.val;
    der = (der - q * o.der) / o.val;
    val = q;
    return *this;
  }
};

template <typename T> struct is_dual : std::false_type {};
template <typename T> struct is_dual<Dual<T>> : std::true_type {};
template <typename T> inline constexpr bool is_dual_v = is_dual<T>::value;

/// Innermost real value of a (possibly nested) dual number.
inline double primal(double x) { return x; }
template <typename T>
double primal(const Dual<T>& x) { return primal(x.val); }

template <typename T> constexpr Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <typename T> constexpr Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <typename T> constexpr Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <typename T> constexpr Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }
template <typename T> constexpr Dual<T> operator-(const Dual<T>& a) { return {-a.val, -a.der}; }

template <typename T> constexpr Dual<T> operator+(Dual<T> a, double b) { a.val += b; return a; }
template <typename T> constexpr Dual<T> operator+(double a, Dual<T> b) { b.val += a; return b; }
template <typename T> constexpr Dual<T> operator-(Dual<T> a, double b) { a.val -= b; return a; }
template <typename T> constexpr Dual<T> operator-(double a, const Dual<T>& b) { return {a - b.val, -b.der}; }
template <typename T> constexpr Dual<T> operator*(const Dual<T>& a, double b) { return {a.val * b, a.der * b}; }
template <typename T> constexpr Dual<T> operator*(double a, const Dual<T>& b) { return {a * b.val, a * b.der}; }
template <typename T> constexpr Dual<T> operator/(const Dual<T>& a, double b) { return {a.val / b, a.der / b}; }
template <typename T> constexpr Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(T(a)) / b; }

template <typename T> Dual<T> sin(const Dual<T>& a) { using std::sin, std::cos; return {sin(a.val), cos(a.val) * a.der}; }
template <typename T> Dual<T> cos(const Dual<T>& a) { using std::sin, std::cos; return {cos(a.val), -(sin(a.val) * a.der)}; }
template <typename T> Dual<T> tan(const Dual<T>& a) {
  using std::tan;
  const T t = tan(a.val);
  return {t, (1.0 + t * t) * a.der};
}
template <typename T> Dual<T> exp(const Dual<T>& a) { using std::exp; const T e = exp(a.val); return {e, e * a.der}; }
template <typename T> Dual<T> log(const Dual<T>& a) { using std::log; return {log(a.val), a.der / a.val}; }
template <typename T> Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  const T s = sqrt(a.val);
  return {s, a.der / (2.0 * s)};
}
// d|u| = sign(u) du, with sign(0) = 0.
template <typename T> Dual<T> abs(const Dual<T>& a) {
  const double p = primal(a.val);
  if (p > 0) return a;
  if (p < 0) return -a;
  return {a.val * 0.0, a.der * 0.0};
}
template <typename T> Dual<T> atan2(const Dual<T>& y, const Dual<T>& x) {
  using std::atan2;
  const T r2 = x.val * x.val + y.val * y.val;
  return {atan2(y.val, x.val), (x.val * y.der - y.val * x.der) / r2};
}
/// u^c for a real constant exponent.
template <typename T> Dual<T> pow(const Dual<T>& a, double c) {
  using std::pow;
  return {pow(a.val, c), c * pow(a.val, c - 1.0) * a.der};
}

}  // namespace slicekit

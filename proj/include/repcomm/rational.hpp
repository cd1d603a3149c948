#pragma once

#include <gmpxx.h>

#include <cmath>
#include <string>
#include <type_traits>

namespace repcomm {

using Rational = mpq_class;

// Decimal snap: inputs like 0.30000000000000004 become 3/10.
inline Rational to_rational(double x, int digits = 12) {
    mpz_class scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    double scaled = std::round(x * std::pow(10.0, digits));
    mpz_class num;
    num.set_str(std::to_string(static_cast<long long>(scaled)), 10);
    Rational q(num, scale);
    q.canonicalize();
    return q;
}

inline double to_double(const Rational& q) { return q.get_d(); }
inline double to_double(double x) { return x; }

template <class T>
struct Scalar;

template <>
struct Scalar<double> {
    static constexpr double tol = 1e-12;
    static double from(double x) { return x; }
    static bool is_zero(double x) { return std::abs(x) <= tol; }
    static bool geq(double a, double b) { return a >= b - tol; }
};

template <>
struct Scalar<Rational> {
    static Rational from(double x) { return to_rational(x); }
    static bool is_zero(const Rational& x) { return sgn(x) == 0; }
    static bool geq(const Rational& a, const Rational& b) { return a >= b; }
};

}  // namespace repcomm

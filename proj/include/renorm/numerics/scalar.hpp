#pragma once

// Scalar types used throughout the library and the handful of operations
// whose meaning differs between exact and floating arithmetic.

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>

#include "renorm/errors.hpp"

namespace renorm {

using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;
using Extended = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                               boost::multiprecision::et_off>;

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

template <class T>
concept Scalar = std::is_same_v<T, Rational> || std::is_same_v<T, long double> ||
                 std::is_same_v<T, Extended>;

/// Expands MACRO once for every supported scalar type (explicit instantiation).
#define RENORM_FOR_EACH_SCALAR(MACRO) \
    MACRO(::renorm::Rational)         \
    MACRO(long double)                \
    MACRO(::renorm::Extended)

/// Same, restricted to floating types (operations needing log/exp).
#define RENORM_FOR_EACH_FLOAT(MACRO) \
    MACRO(long double)               \
    MACRO(::renorm::Extended)

namespace num {

/// Sets the working precision of Extended values for the lifetime of the guard.
/// The precision is process-wide, so guards must not race with running kernels.
class ScopedPrecision {
public:
    explicit ScopedPrecision(unsigned float_bits);
    ~ScopedPrecision();
    ScopedPrecision(const ScopedPrecision&) = delete;
    ScopedPrecision& operator=(const ScopedPrecision&) = delete;

private:
    unsigned saved_digits10_;
};

/// Decimal digits needed for Extended to carry at least `float_bits` mantissa bits.
unsigned digits10_for_bits(unsigned float_bits);

/// Mantissa bits actually carried by T under the current precision.
template <Scalar T>
unsigned mantissa_bits();

/// 2^(1 - mantissa bits); zero for exact arithmetic.
template <Scalar T>
T unit_roundoff();

/// Accepts decimal notation ("0.25", "1e-20") and, for rationals, "p/q".
template <Scalar T>
T parse(std::string_view text);

/// Full-precision decimal for floats; exact "p/q" (or integer) for rationals.
template <Scalar T>
std::string format(const T& value, int digits);

template <Scalar T>
long double to_ld(const T& value);

template <Scalar T>
T from_ld(long double value);

template <Scalar T>
T from_int(std::int64_t value) {
    return T(value);
}

template <Scalar T>
T abs(const T& x) {
    return x < 0 ? T(-x) : x;
}

template <Scalar T>
T log(const T& x);

template <Scalar T>
T exp(const T& x);

/// Exact for perfect-square rationals, throws Inexact otherwise.
template <Scalar T>
T sqrt(const T& x);

template <Scalar T>
T pow(const T& x, const T& y);

/// Ceil(bits * 0.302) + 2, the digit count used for serialization.
int serialization_digits(unsigned float_bits);

}  // namespace num
}  // namespace renorm

#include "renorm/numerics/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <limits>
#include <sstream>

namespace renorm::num {

unsigned digits10_for_bits(unsigned float_bits) {
    return static_cast<unsigned>(std::ceil(float_bits * 0.30103)) + 1;
}

ScopedPrecision::ScopedPrecision(unsigned float_bits)
    : saved_digits10_(Extended::default_precision()) {
    Extended::default_precision(digits10_for_bits(float_bits));
}

ScopedPrecision::~ScopedPrecision() {
    Extended::default_precision(saved_digits10_);
}

int serialization_digits(unsigned float_bits) {
    return static_cast<int>(std::ceil(float_bits * 0.302)) + 2;
}

template <>
unsigned mantissa_bits<long double>() {
    return std::numeric_limits<long double>::digits;
}

template <>
unsigned mantissa_bits<Extended>() {
    return static_cast<unsigned>(
        boost::multiprecision::detail::digits10_2_2(Extended::default_precision()));
}

template <>
unsigned mantissa_bits<Rational>() {
    return std::numeric_limits<unsigned>::max();
}

template <>
long double unit_roundoff<long double>() {
    return std::ldexp(1.0L, 1 - static_cast<int>(mantissa_bits<long double>()));
}

template <>
Extended unit_roundoff<Extended>() {
    return boost::multiprecision::ldexp(Extended(1), 1 - static_cast<int>(mantissa_bits<Extended>()));
}

template <>
Rational unit_roundoff<Rational>() {
    return Rational(0);
}

template <>
long double to_ld<long double>(const long double& value) {
    return value;
}

template <>
long double to_ld<Extended>(const Extended& value) {
    return value.convert_to<long double>();
}

template <>
long double to_ld<Rational>(const Rational& value) {
    return value.convert_to<long double>();
}

template <>
long double from_ld<long double>(long double value) {
    return value;
}

template <>
Extended from_ld<Extended>(long double value) {
    return Extended(value);
}

template <>
Rational from_ld<Rational>(long double value) {
    return Rational(value);
}

namespace {

Rational parse_decimal_rational(std::string_view text) {
    std::string s(text);
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        auto strip = [](std::string t) {
            std::size_t sign = (!t.empty() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
            while (t.size() > sign + 1 && t[sign] == '0') t.erase(sign, 1);
            if (!t.empty() && t[0] == '+') t.erase(0, 1);
            return t;
        };
        BigInt p(strip(s.substr(0, slash)));
        BigInt q(strip(s.substr(slash + 1)));
        if (q == 0) throw ConfigError("zero denominator in '" + s + "'");
        return Rational(p, q);
    }
    // Decimal with optional exponent, converted exactly.
    long exponent = 0;
    auto epos = s.find_first_of("eE");
    if (epos != std::string::npos) {
        exponent = std::stol(s.substr(epos + 1));
        s = s.substr(0, epos);
    }
    bool negative = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
        negative = s[0] == '-';
        s = s.substr(1);
    }
    auto dot = s.find('.');
    std::string digits = s;
    if (dot != std::string::npos) {
        digits = s.substr(0, dot) + s.substr(dot + 1);
        exponent -= static_cast<long>(s.size() - dot - 1);
    }
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("not a number: '" + std::string(text) + "'");
    digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
    BigInt mant(digits);
    BigInt ten_pow = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::labs(exponent)));
    Rational r = exponent >= 0 ? Rational(mant * ten_pow) : Rational(mant, ten_pow);
    return negative ? Rational(-r) : r;
}

}  // namespace

template <>
Rational parse<Rational>(std::string_view text) {
    return parse_decimal_rational(text);
}

template <>
long double parse<long double>(std::string_view text) {
    std::string s(text);
    if (s.find('/') != std::string::npos) {
        Rational r = parse_decimal_rational(s);
        return to_ld(r);
    }
    char* end = nullptr;
    long double v = std::strtold(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw ConfigError("not a number: '" + s + "'");
    return v;
}

template <>
Extended parse<Extended>(std::string_view text) {
    std::string s(text);
    if (s.find('/') != std::string::npos) {
        Rational r = parse_decimal_rational(s);
        return Extended(numerator(r)) / Extended(denominator(r));
    }
    try {
        return Extended(s);
    } catch (const std::exception&) {
        throw ConfigError("not a number: '" + s + "'");
    }
}

template <>
std::string format<Rational>(const Rational& value, int /*digits*/) {
    return value.str();
}

template <>
std::string format<long double>(const long double& value, int digits) {
    std::ostringstream os;
    os << std::setprecision(digits) << std::scientific << value;
    return os.str();
}

template <>
std::string format<Extended>(const Extended& value, int digits) {
    return value.str(digits, std::ios_base::scientific);
}

template <>
long double log<long double>(const long double& x) {
    return std::log(x);
}

template <>
Extended log<Extended>(const Extended& x) {
    return boost::multiprecision::log(x);
}

template <>
Rational log<Rational>(const Rational& x) {
    if (x == 1) return Rational(0);
    throw Inexact("log of " + x.str() + " is not rational");
}

template <>
long double exp<long double>(const long double& x) {
    return std::exp(x);
}

template <>
Extended exp<Extended>(const Extended& x) {
    return boost::multiprecision::exp(x);
}

template <>
Rational exp<Rational>(const Rational& x) {
    if (x == 0) return Rational(1);
    throw Inexact("exp of " + x.str() + " is not rational");
}

template <>
long double sqrt<long double>(const long double& x) {
    return std::sqrt(x);
}

template <>
Extended sqrt<Extended>(const Extended& x) {
    return boost::multiprecision::sqrt(x);
}

template <>
Rational sqrt<Rational>(const Rational& x) {
    if (x < 0) throw Inexact("sqrt of negative rational");
    BigInt p = numerator(x), q = denominator(x);
    BigInt rp = boost::multiprecision::sqrt(p), rq = boost::multiprecision::sqrt(q);
    if (rp * rp != p || rq * rq != q) throw Inexact("sqrt of " + x.str() + " is not rational");
    return Rational(rp, rq);
}

template <>
long double pow<long double>(const long double& x, const long double& y) {
    return std::pow(x, y);
}

template <>
Extended pow<Extended>(const Extended& x, const Extended& y) {
    return boost::multiprecision::pow(x, y);
}

template <>
Rational pow<Rational>(const Rational& x, const Rational& y) {
    if (denominator(y) == 1 && y >= 0 && y <= 64) {
        Rational r(1);
        for (int i = 0; i < y.convert_to<int>(); ++i) r *= x;
        return r;
    }
    throw Inexact("non-integer power in exact arithmetic");
}

}  // namespace renorm::num

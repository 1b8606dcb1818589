#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mdalab {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// "num/den" (or just "num" when the denominator is one).
inline std::string to_string(const Rational& r) {
    const BigInt& num = boost::multiprecision::numerator(r);
    const BigInt& den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

/// Parses "a/b", "a" or a terminating decimal such as "0.25" exactly.
inline Rational parse_rational(const std::string& text) {
    // cpp_int reads a leading 0 as octal and 0x as hex, so only plain decimal digits get through.
    auto decimal = [&text](std::string s) {
        bool neg = !s.empty() && (s[0] == '-' || s[0] == '+');
        if (neg) {
            neg = s[0] == '-';
            s.erase(0, 1);
        }
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("not a rational: '" + text + "'");
        s.erase(0, std::min(s.find_first_not_of('0'), s.size() - 1));
        BigInt v(s);
        return neg ? BigInt(-v) : v;
    };
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        BigInt num = decimal(text.substr(0, slash));
        BigInt den = decimal(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
        return Rational(num, den);
    }
    auto dot = text.find('.');
    if (dot == std::string::npos) return Rational(decimal(text));
    std::string frac = text.substr(dot + 1);
    std::string digits = text.substr(0, dot) + frac;
    if (frac.empty() || frac.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("not a rational: '" + text + "'");
    BigInt den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    return Rational(decimal(digits), den);
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace mdalab

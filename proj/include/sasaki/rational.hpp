#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>
#include <string>

namespace sasaki {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Error type carried by every failure in this library. The message is
/// expected to be self-contained (it surfaces verbatim in CLI reports).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A mathematical negative (obstruction found), as opposed to a
/// computational failure; the CLI maps these to exit code 2.
class ObstructionError : public Error {
public:
    explicit ObstructionError(const std::string& what) : Error(what) {}
};

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// Parses "p", "-p" or "p/q" into an exact rational. Throws on bad syntax
/// or zero denominator.
inline Rational parse_rational(const std::string& text) {
    const auto slash = text.find('/');
    try {
        if (slash == std::string::npos) return Rational(Integer(text));
        Integer num(text.substr(0, slash));
        Integer den(text.substr(slash + 1));
        if (den == 0) throw Error("rational with zero denominator: " + text);
        return Rational(num, den);
    } catch (const std::runtime_error&) {
        throw Error("cannot parse rational: '" + text + "'");
    }
}

inline std::string to_string(const Rational& q) { return q.str(); }

inline Rational rational_pow(const Rational& base, unsigned exp) {
    Rational r(1);
    for (unsigned i = 0; i < exp; ++i) r *= base;
    return r;
}

inline Rational rational_abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

inline int sign(const Rational& q) { return q > 0 ? 1 : (q < 0 ? -1 : 0); }

} // namespace sasaki

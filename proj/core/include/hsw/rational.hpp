#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include <string>
#include <string_view>

namespace hsw {

// Expression templates off: boost::rational does not cope with them.
using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>, boost::multiprecision::et_off>;
using Rational = boost::rational<BigInt>;

/// Parses "p/q", "p" or "-p/q". Throws std::invalid_argument on malformed input
/// or a zero denominator.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" form; integers are still written with a "/1" denominator so
/// that every serialized rational has the same shape.
std::string to_string(const Rational& r);

double to_double(const Rational& r);

/// Exact rational value of a finite double (binary fraction).
Rational from_double(double x);

inline bool is_integer(const Rational& r) { return r.denominator() == 1; }

}  // namespace hsw

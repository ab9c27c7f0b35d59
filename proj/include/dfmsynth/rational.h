#ifndef DFMSYNTH_RATIONAL_H_
#define DFMSYNTH_RATIONAL_H_

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace dfmsynth {

// Exact arbitrary-precision arithmetic. Nothing on a verdict path uses
// floating point.
using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Accepts "p/q", "p" and finite decimals such as "7.5" or "-0.25".
Rational parse_rational(std::string_view text);

// Canonical "p/q" form, or "p" when the denominator is 1.
std::string to_string(const Rational& value);

// Exact decimal expansion when the reduced denominator has only factors 2
// and 5 ("1.25"), otherwise the canonical "p/q" form.
std::string to_decimal_string(const Rational& value);

Integer floor(const Rational& value);
Integer ceil(const Rational& value);

// Narrowing with a range check; throws ParameterError on overflow.
std::int64_t to_int64(const Integer& value);

Integer lcm(const Integer& a, const Integer& b);

}  // namespace dfmsynth

#endif  // DFMSYNTH_RATIONAL_H_

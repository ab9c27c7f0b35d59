#include "dfmsynth/rational.h"

#include <cctype>
#include <limits>

#include "dfmsynth/errors.h"

namespace dfmsynth {
namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

Integer parse_integer(std::string_view s, std::string_view whole) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) {
    throw ConfigError("malformed rational '" + std::string(whole) + "'");
  }
  Integer value{std::string(s)};
  return negative ? Integer(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw ConfigError("empty rational");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Integer num = parse_integer(text.substr(0, slash), text);
    std::string_view den_text = text.substr(slash + 1);
    if (!all_digits(den_text)) {
      throw ConfigError("malformed rational '" + std::string(text) + "'");
    }
    Integer den(std::string{den_text});
    if (den == 0) throw ConfigError("zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
  }

  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = text.substr(0, dot);
    std::string_view frac_part = text.substr(dot + 1);
    bool negative = !int_part.empty() && int_part.front() == '-';
    if (!int_part.empty() && (int_part.front() == '-' || int_part.front() == '+')) {
      int_part.remove_prefix(1);
    }
    if ((!int_part.empty() && !all_digits(int_part)) || !all_digits(frac_part)) {
      throw ConfigError("malformed rational '" + std::string(text) + "'");
    }
    Integer whole = int_part.empty() ? Integer(0) : Integer(std::string(int_part));
    Integer frac(std::string{frac_part});
    Integer scale = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(frac_part.size()));
    Rational magnitude = Rational(whole) + Rational(frac, scale);
    return negative ? Rational(-magnitude) : magnitude;
  }

  return Rational(parse_integer(text, text));
}

std::string to_string(const Rational& value) {
  const Integer num = boost::multiprecision::numerator(value);
  const Integer den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

std::string to_decimal_string(const Rational& value) {
  Integer den = boost::multiprecision::denominator(value);
  unsigned twos = 0;
  unsigned fives = 0;
  while (den % 2 == 0) {
    den /= 2;
    ++twos;
  }
  while (den % 5 == 0) {
    den /= 5;
    ++fives;
  }
  if (den != 1) return to_string(value);

  const unsigned digits = std::max(twos, fives);
  if (digits == 0) return boost::multiprecision::numerator(value).str();

  const Rational scaled = value * Rational(boost::multiprecision::pow(Integer(10), digits));
  Integer n = boost::multiprecision::numerator(scaled);
  const bool negative = n < 0;
  if (negative) n = -n;
  std::string s = n.str();
  if (s.size() <= digits) s.insert(0, digits + 1 - s.size(), '0');
  s.insert(s.size() - digits, ".");
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return negative ? "-" + s : s;
}

Integer floor(const Rational& value) {
  const Integer num = boost::multiprecision::numerator(value);
  const Integer den = boost::multiprecision::denominator(value);
  Integer q = num / den;
  if (num % den != 0 && num < 0) q -= 1;
  return q;
}

Integer ceil(const Rational& value) {
  const Integer num = boost::multiprecision::numerator(value);
  const Integer den = boost::multiprecision::denominator(value);
  Integer q = num / den;
  if (num % den != 0 && num > 0) q += 1;
  return q;
}

std::int64_t to_int64(const Integer& value) {
  if (value > std::numeric_limits<std::int64_t>::max() ||
      value < std::numeric_limits<std::int64_t>::min()) {
    throw ParameterError("integer " + value.str() + " exceeds 64-bit range");
  }
  return value.convert_to<std::int64_t>();
}

Integer lcm(const Integer& a, const Integer& b) {
  if (a == 0 || b == 0) return 0;
  Integer g = boost::multiprecision::gcd(a, b);
  Integer r = a / g * b;
  return r < 0 ? Integer(-r) : r;
}

}  // namespace dfmsynth

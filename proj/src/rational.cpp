#include "shapq/rational.hpp"

#include <cctype>
#include <sstream>

namespace shapq {

Integer factorial(std::size_t n) {
  Integer result = 1;
  for (std::size_t i = 2; i <= n; ++i) result *= static_cast<unsigned>(i);
  return result;
}

Integer binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  Integer result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    result *= static_cast<unsigned>(n - k + i);
    result /= static_cast<unsigned>(i);
  }
  return result;
}

std::vector<Integer> binomial_row(std::size_t n) {
  std::vector<Integer> row(n + 1);
  row[0] = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    row[k] = row[k - 1] * static_cast<unsigned>(n - k + 1) /
             static_cast<unsigned>(k);
  }
  return row;
}

Rational harmonic(std::size_t n) {
  Rational sum = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    sum += Rational(1, static_cast<unsigned>(i));
  }
  return sum;
}

std::string to_decimal_string(const Rational& value, int digits) {
  if (digits < 0) fail(errc::out_of_range, "negative digit count");
  Integer num = boost::multiprecision::numerator(value);
  Integer den = boost::multiprecision::denominator(value);
  bool negative = num < 0;
  if (negative) num = -num;
  Integer scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  // Round half away from zero on the scaled value.
  Integer scaled = (num * scale * 2 + den) / (den * 2);
  Integer whole = scaled / scale;
  Integer frac = scaled % scale;
  std::ostringstream out;
  if (negative && (whole != 0 || frac != 0)) out << '-';
  out << whole;
  if (digits > 0) {
    std::string f = frac.str();
    out << '.' << std::string(static_cast<std::size_t>(digits) - f.size(), '0')
        << f;
  }
  return out.str();
}

std::string to_fraction_string(const Rational& value) {
  Integer num = boost::multiprecision::numerator(value);
  Integer den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

namespace {

Integer parse_integer_part(const std::string& s) {
  std::size_t i = (!s.empty() && s[0] == '-') ? 1 : 0;
  if (i == s.size()) fail(errc::syntax_error, "expected integer, got '" + s + "'");
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      fail(errc::syntax_error, "expected integer, got '" + s + "'");
    }
  }
  return Integer(s);
}

}  // namespace

Rational parse_rational(const std::string& text) {
  std::size_t slash = text.find('/');
  if (slash == std::string::npos) {
    return Rational(parse_integer_part(text));
  }
  Integer num = parse_integer_part(text.substr(0, slash));
  Integer den = parse_integer_part(text.substr(slash + 1));
  if (den == 0) fail(errc::syntax_error, "zero denominator in '" + text + "'");
  return Rational(num, den);
}

std::vector<Integer> convolve(const std::vector<Integer>& a,
                              const std::vector<Integer>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<Integer> out(a.size() + b.size() - 1, Integer(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (b[j] != 0) out[i + j] += a[i] * b[j];
    }
  }
  return out;
}

std::vector<Integer> pad_binomial(const std::vector<Integer>& a,
                                  std::size_t extra) {
  if (extra == 0) return a;
  return convolve(a, binomial_row(extra));
}

}  // namespace shapq

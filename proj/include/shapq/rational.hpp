#ifndef SHAPQ_RATIONAL_HPP
#define SHAPQ_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <string>
#include <vector>

#include "shapq/errors.hpp"

namespace shapq {

// All numeric quantities are exact. Integer is an arbitrary-precision signed
// integer; Rational is kept in canonical form (lowest terms, positive
// denominator) by the backing library.
using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

Integer factorial(std::size_t n);

// Binomial coefficient C(n, k); zero when k > n.
Integer binomial(std::size_t n, std::size_t k);

// The full row C(n, 0..n).
std::vector<Integer> binomial_row(std::size_t n);

// n-th partial sum of the harmonic series, H(0) = 0.
Rational harmonic(std::size_t n);

// Renders p/q in decimal with the given number of fractional digits
// (round half away from zero). Display only; never fed back into computation.
std::string to_decimal_string(const Rational& value, int digits);

// Canonical fraction rendering: "p/q", or just "p" for integers.
std::string to_fraction_string(const Rational& value);

// Parses "p", "-p", or "p/q". Throws SyntaxError on malformed input.
Rational parse_rational(const std::string& text);

// Convolution of count vectors: result[k] = sum_j a[j] * b[k-j]. The result
// has length |a| + |b| - 1 (empty when either input is empty).
std::vector<Integer> convolve(const std::vector<Integer>& a,
                              const std::vector<Integer>& b);

// Pads a count vector with `extra` free elements: convolution with the
// binomial row C(extra, ·).
std::vector<Integer> pad_binomial(const std::vector<Integer>& a,
                                  std::size_t extra);

}  // namespace shapq

#endif  // SHAPQ_RATIONAL_HPP

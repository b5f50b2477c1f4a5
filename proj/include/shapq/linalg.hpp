#ifndef SHAPQ_LINALG_HPP
#define SHAPQ_LINALG_HPP

#include <cstddef>
#include <vector>

#include "shapq/rational.hpp"

namespace shapq {

// Dense matrix of exact rationals, row-major.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Rational> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  Rational& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const Rational& at(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
};

Matrix identity_matrix(std::size_t n);

// Kronecker product: block (r, c) of the result is a.at(r, c) * b.
Matrix kronecker(const Matrix& a, const Matrix& b);

std::vector<Rational> multiply(const Matrix& a,
                               const std::vector<Rational>& x);

// Solves L * x = b exactly by Gaussian elimination, choosing as pivot the
// entry with the largest numerator magnitude in the current column.
// DimensionMismatch when L is not square or b has the wrong length;
// SingularMatrix when no nonzero pivot exists.
std::vector<Rational> exact_solve(Matrix l, std::vector<Rational> b);

}  // namespace shapq

#endif  // SHAPQ_LINALG_HPP

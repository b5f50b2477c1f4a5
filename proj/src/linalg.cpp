#include "shapq/linalg.hpp"

#include <utility>

#include "shapq/errors.hpp"

namespace shapq {

Matrix identity_matrix(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows * b.rows, a.cols * b.cols);
  for (std::size_t ar = 0; ar < a.rows; ++ar) {
    for (std::size_t ac = 0; ac < a.cols; ++ac) {
      const Rational& scale = a.at(ar, ac);
      for (std::size_t br = 0; br < b.rows; ++br) {
        for (std::size_t bc = 0; bc < b.cols; ++bc) {
          out.at(ar * b.rows + br, ac * b.cols + bc) = scale * b.at(br, bc);
        }
      }
    }
  }
  return out;
}

std::vector<Rational> multiply(const Matrix& a,
                               const std::vector<Rational>& x) {
  if (x.size() != a.cols) {
    fail(errc::dimension_mismatch,
         "vector of length " + std::to_string(x.size()) + " against " +
             std::to_string(a.rows) + "x" + std::to_string(a.cols) +
             " matrix");
  }
  std::vector<Rational> out(a.rows);
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t c = 0; c < a.cols; ++c) {
      out[r] += a.at(r, c) * x[c];
    }
  }
  return out;
}

std::vector<Rational> exact_solve(Matrix l, std::vector<Rational> b) {
  if (l.rows != l.cols) {
    fail(errc::dimension_mismatch, "matrix is " + std::to_string(l.rows) +
                                       "x" + std::to_string(l.cols));
  }
  if (b.size() != l.rows) {
    fail(errc::dimension_mismatch,
         "right-hand side has length " + std::to_string(b.size()) +
             " for a " + std::to_string(l.rows) + "-row matrix");
  }
  const std::size_t n = l.rows;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    Integer best = abs(numerator(l.at(col, col)));
    for (std::size_t r = col + 1; r < n; ++r) {
      Integer mag = abs(numerator(l.at(r, col)));
      if (mag > best) {
        best = mag;
        pivot = r;
      }
    }
    if (l.at(pivot, col) == 0) {
      fail(errc::singular_matrix,
           "no pivot in column " + std::to_string(col));
    }
    if (pivot != col) {
      for (std::size_t c = col; c < n; ++c) {
        std::swap(l.at(col, c), l.at(pivot, c));
      }
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      if (l.at(r, col) == 0) continue;
      const Rational factor = l.at(r, col) / l.at(col, col);
      l.at(r, col) = 0;
      for (std::size_t c = col + 1; c < n; ++c) {
        l.at(r, c) -= factor * l.at(col, c);
      }
      b[r] -= factor * b[col];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t r = n; r-- > 0;) {
    Rational acc = b[r];
    for (std::size_t c = r + 1; c < n; ++c) acc -= l.at(r, c) * x[c];
    x[r] = acc / l.at(r, r);
  }
  return x;
}

}  // namespace shapq

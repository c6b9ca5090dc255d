#pragma once

#include <array>
#include <complex>
#include <vector>

#include "virodyn/polyalg.hpp"

namespace viro {

/// Dense real matrix of dimension 1..4, row major.
struct SquareMatrix {
  int n = 0;
  std::array<double, 16> a{};

  SquareMatrix() = default;
  explicit SquareMatrix(int dim) : n(dim) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i * n + j)]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i * n + j)]; }

  static SquareMatrix identity(int dim);
  SquareMatrix minor_without(int k) const;  // drop row k and column k
};

double trace(const SquareMatrix& m);
SquareMatrix matmul(const SquareMatrix& x, const SquareMatrix& y);

/// Characteristic polynomial det(xI - M), monic, ascending coefficients
/// (Faddeev-LeVerrier).
RealPolynomial characteristic_polynomial(const SquareMatrix& m);

/// Eigenvalues of an n<=4 matrix. Rows/columns whose off-diagonal entries are
/// exactly zero are deflated first (the diagonal entry is an exact eigenvalue),
/// the rest goes through the characteristic polynomial with a Rayleigh
/// quotient polish via one inverse-iteration step.
std::vector<std::complex<double>> eigenvalues(const SquareMatrix& m);

/// Solve A x = b for complex A (partial pivoting). Returns false if singular
/// to working precision.
bool solve_complex(int n, std::array<std::complex<double>, 16>& A,
                   std::array<std::complex<double>, 4>& b);

/// Solve the real n x n system in place (partial pivoting), n <= 6.
bool solve_real(int n, std::vector<double>& A, std::vector<double>& b);

/// Eigenvector for a given (polished) eigenvalue via inverse iteration.
std::array<std::complex<double>, 4> eigenvector(const SquareMatrix& m, std::complex<double> lambda);

}  // namespace viro

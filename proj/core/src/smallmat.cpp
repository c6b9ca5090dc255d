#include "virodyn/smallmat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace viro {

SquareMatrix SquareMatrix::identity(int dim) {
  SquareMatrix m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

SquareMatrix SquareMatrix::minor_without(int k) const {
  SquareMatrix m(n - 1);
  int r = 0;
  for (int i = 0; i < n; ++i) {
    if (i == k) continue;
    int c = 0;
    for (int j = 0; j < n; ++j) {
      if (j == k) continue;
      m(r, c) = (*this)(i, j);
      ++c;
    }
    ++r;
  }
  return m;
}

double trace(const SquareMatrix& m) {
  double t = 0.0;
  for (int i = 0; i < m.n; ++i) t += m(i, i);
  return t;
}

SquareMatrix matmul(const SquareMatrix& x, const SquareMatrix& y) {
  SquareMatrix r(x.n);
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < x.n; ++j) {
      double s = 0.0;
      for (int k = 0; k < x.n; ++k) s += x(i, k) * y(k, j);
      r(i, j) = s;
    }
  return r;
}

RealPolynomial characteristic_polynomial(const SquareMatrix& m) {
  const int n = m.n;
  std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
  c[static_cast<std::size_t>(n)] = 1.0;
  SquareMatrix M = m;
  double ck = -trace(M);
  c[static_cast<std::size_t>(n - 1)] = ck;
  for (int k = 2; k <= n; ++k) {
    SquareMatrix T = M;
    for (int i = 0; i < n; ++i) T(i, i) += ck;
    M = matmul(m, T);
    ck = -trace(M) / k;
    c[static_cast<std::size_t>(n - k)] = ck;
  }
  return RealPolynomial(std::move(c));
}

bool solve_complex(int n, std::array<std::complex<double>, 16>& A,
                   std::array<std::complex<double>, 4>& b) {
  using C = std::complex<double>;
  auto at = [&](int i, int j) -> C& { return A[static_cast<std::size_t>(i * n + j)]; };
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(at(col, col));
    for (int r = col + 1; r < n; ++r)
      if (std::abs(at(r, col)) > best) {
        best = std::abs(at(r, col));
        piv = r;
      }
    if (best < 1e-300) return false;
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(at(piv, j), at(col, j));
      std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(col)]);
    }
    for (int r = col + 1; r < n; ++r) {
      C f = at(r, col) / at(col, col);
      at(r, col) = 0.0;
      for (int j = col + 1; j < n; ++j) at(r, j) -= f * at(col, j);
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    C s = b[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j) s -= at(i, j) * b[static_cast<std::size_t>(j)];
    b[static_cast<std::size_t>(i)] = s / at(i, i);
  }
  return true;
}

bool solve_real(int n, std::vector<double>& A, std::vector<double>& b) {
  auto at = [&](int i, int j) -> double& { return A[static_cast<std::size_t>(i * n + j)]; };
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(at(col, col));
    for (int r = col + 1; r < n; ++r)
      if (std::abs(at(r, col)) > best) {
        best = std::abs(at(r, col));
        piv = r;
      }
    if (best < 1e-300) return false;
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(at(piv, j), at(col, j));
      std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(col)]);
    }
    for (int r = col + 1; r < n; ++r) {
      double f = at(r, col) / at(col, col);
      at(r, col) = 0.0;
      for (int j = col + 1; j < n; ++j) at(r, j) -= f * at(col, j);
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j) s -= at(i, j) * b[static_cast<std::size_t>(j)];
    b[static_cast<std::size_t>(i)] = s / at(i, i);
  }
  return true;
}

namespace {

using C = std::complex<double>;

// one inverse-iteration step with a Rayleigh quotient update
C rayleigh_polish(const SquareMatrix& m, C lambda) {
  const int n = m.n;
  std::array<C, 16> A{};
  std::array<C, 4> rhs{};
  const C shift = lambda * (1.0 + 1e-10) + C(0.0, 1e-12);  // avoid exact singularity
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A[static_cast<std::size_t>(i * n + j)] = m(i, j);
    A[static_cast<std::size_t>(i * n + i)] -= shift;
    rhs[static_cast<std::size_t>(i)] = C(1.0 / (i + 1.5), 0.3 / (i + 1.0));
  }
  if (!solve_complex(n, A, rhs)) return lambda;
  double norm = 0.0;
  for (int i = 0; i < n; ++i) norm += std::norm(rhs[static_cast<std::size_t>(i)]);
  if (norm <= 0.0 || !std::isfinite(norm)) return lambda;
  C num = 0.0;
  for (int i = 0; i < n; ++i) {
    C mi = 0.0;
    for (int j = 0; j < n; ++j) mi += m(i, j) * rhs[static_cast<std::size_t>(j)];
    num += std::conj(rhs[static_cast<std::size_t>(i)]) * mi;
  }
  C polished = num / norm;
  return std::isfinite(polished.real()) && std::isfinite(polished.imag()) ? polished : lambda;
}

void eig_recurse(const SquareMatrix& m, std::vector<C>& out) {
  const int n = m.n;
  if (n == 0) return;
  if (n == 1) {
    out.emplace_back(m(0, 0), 0.0);
    return;
  }
  // exact block deflation: a row or column with all zero off-diagonal entries
  for (int k = 0; k < n; ++k) {
    bool row_zero = true, col_zero = true;
    for (int j = 0; j < n; ++j) {
      if (j == k) continue;
      if (m(k, j) != 0.0) row_zero = false;
      if (m(j, k) != 0.0) col_zero = false;
    }
    if (row_zero || col_zero) {
      out.emplace_back(m(k, k), 0.0);
      eig_recurse(m.minor_without(k), out);
      return;
    }
  }
  RealPolynomial chi = characteristic_polynomial(m);
  auto roots = all_roots(chi);
  for (auto& r : roots) {
    C better = rayleigh_polish(m, r);
    // keep the polish only if it reduces the characteristic residual
    if (std::abs(chi.eval(better)) < std::abs(chi.eval(r))) r = better;
    out.push_back(r);
  }
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(const SquareMatrix& m) {
  if (m.n < 1 || m.n > 4) throw std::invalid_argument("eigenvalues: dimension must be 1..4");
  std::vector<C> out;
  eig_recurse(m, out);
  std::sort(out.begin(), out.end(), [](const C& a, const C& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

std::array<std::complex<double>, 4> eigenvector(const SquareMatrix& m, std::complex<double> lambda) {
  const int n = m.n;
  std::array<C, 4> v{};
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = C(1.0 / (i + 1.0), 0.1 * (i + 1.0));
  for (int iter = 0; iter < 3; ++iter) {
    std::array<C, 16> A{};
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) A[static_cast<std::size_t>(i * n + j)] = m(i, j);
      A[static_cast<std::size_t>(i * n + i)] -= lambda + C(1e-12, 1e-12);
    }
    std::array<C, 4> b = v;
    if (!solve_complex(n, A, b)) break;
    double norm = 0.0;
    for (int i = 0; i < n; ++i) norm += std::norm(b[static_cast<std::size_t>(i)]);
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm)) break;
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] / norm;
  }
  return v;
}

}  // namespace viro

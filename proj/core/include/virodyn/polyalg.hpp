#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace viro {

/// Real-coefficient polynomial, coefficients stored by ascending degree.
/// Trailing (near-)zero coefficients are trimmed on construction, so
/// degree() == coeffs().size() - 1 for any nonzero polynomial.
class RealPolynomial {
 public:
  RealPolynomial() = default;
  explicit RealPolynomial(std::vector<double> ascending_coeffs);

  static RealPolynomial constant(double c) { return RealPolynomial({c}); }
  static RealPolynomial identity() { return RealPolynomial({0.0, 1.0}); }

  bool is_zero() const { return c_.empty(); }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<double>& coeffs() const { return c_; }
  double coeff(int k) const;  // 0 outside stored range
  double leading() const;

  double eval(double x) const;
  std::complex<double> eval(std::complex<double> x) const;
  RealPolynomial derivative() const;

  /// Coefficients of p(s + x) as a polynomial in x (repeated synthetic division).
  RealPolynomial taylor_shift(double s) const;

  /// Strict sign alternations among nonzero coefficients (Descartes bound).
  int sign_changes() const;

  /// max |coefficient|; 0 for the zero polynomial.
  double coeff_scale() const;

  RealPolynomial operator+(const RealPolynomial& o) const;
  RealPolynomial operator-(const RealPolynomial& o) const;
  RealPolynomial operator*(const RealPolynomial& o) const;
  RealPolynomial operator*(double s) const;
  friend RealPolynomial operator*(double s, const RealPolynomial& p) { return p * s; }

 private:
  std::vector<double> c_;  // ascending; empty == zero polynomial
};

struct RealRoot {
  double x = 0.0;
  int multiplicity = 1;
  bool clustered = false;  // merged from an ill-separated cluster
};

struct RootOptions {
  // |p(r)| <= residual_factor * max|coeff| * max(1,|r|)^deg after polishing.
  double residual_factor = 1e-10;
  // roots closer than cluster_factor * scale are reported once with multiplicity.
  double cluster_factor = 1e-7;
};

/// All real roots of p, ascending, restricted to a closed interval when given.
/// Degree <= 3 uses closed forms, degree 4 the resolvent-cubic route, higher
/// degrees a derivative-recursion bracketing fallback; every root is Newton
/// polished. Throws std::invalid_argument for the zero polynomial.
std::vector<RealRoot> real_roots(const RealPolynomial& p,
                                 std::optional<std::pair<double, double>> interval = std::nullopt,
                                 const RootOptions& opts = {});

/// All complex roots (degree <= 4 closed form + polish; higher via real
/// isolation of the real/imag resolution is not needed here and unsupported).
std::vector<std::complex<double>> all_roots(const RealPolynomial& p);

/// Discriminant of a degree-3 polynomial a3 x^3 + a2 x^2 + a1 x + a0.
/// Positive iff three distinct real roots. Throws unless degree == 3.
double cubic_discriminant(const RealPolynomial& p);

}  // namespace viro

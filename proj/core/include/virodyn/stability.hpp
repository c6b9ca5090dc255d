#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "virodyn/equilibria.hpp"
#include "virodyn/model.hpp"
#include "virodyn/polyalg.hpp"
#include "virodyn/smallmat.hpp"

namespace viro {

enum class Classification { stable, unstable, non_hyperbolic };

struct RHVerdict {
  bool pass = false;
  std::vector<double> margins;  // each inequality as value-required-positive
};

struct StabilityReport {
  std::vector<std::complex<double>> eigenvalues;
  Classification classification = Classification::non_hyperbolic;
  std::optional<RHVerdict> rh_verdict;
  double leading_real_part = 0.0;
  std::string notes;
};

std::string classification_name(Classification c);
std::string stability_report_to_json(const StabilityReport& r);

/// Characteristic polynomial x^3 + a1 x^2 + a2 x + a3: pass iff
/// a1 > 0, a3 > 0, a1 a2 - a3 > 0. Margins in that order.
RHVerdict routh_hurwitz3(double a1, double a2, double a3);

/// x^4 + a1 x^3 + a2 x^2 + a3 x + a4, written against the Jacobian minor sums
/// (a1 = -Tr, a2 = M2, a3 = -M3, a4 = Det): pass iff Tr < 0, M2 > 0, M3 < 0,
/// Det > 0 and Tr (M2 M3 - Tr Det) - M3^2 > 0. Margins in that order.
RHVerdict routh_hurwitz4(double a1, double a2, double a3, double a4);

/// H(b) = a1 a2 - a3 for the three-compartment model at E*, K = gamma = 1.
/// Positive iff E* is locally stable (the other order-3 conditions always
/// hold here). Requires b > 1.
double stability_function_H(const ModelParams& p, double b);

/// The quartic numerator Phi of H(b) (sign-equivalent to H for b > 1):
/// H(b) = delta lambda Phi(b) / ((b-1)^3 beta^2 ((b-1) beta + delta lambda)).
/// Coefficients ascending in b. The model is rescaled to K = gamma = 1
/// internally (b and the sign structure are scale invariant).
RealPolynomial phi_polynomial(const ModelParams& p);

/// Coefficients of Phi(b0 + x), ascending, from the closed-form list
/// (cross-checkable against phi_polynomial(p).taylor_shift(b0)).
std::array<double, 5> shifted_phi(const ModelParams& p);

/// Unique zero of H in the bracket (bisection + secant refinement); at the
/// result the characteristic polynomial at E* has a pure imaginary pair
/// +- i sqrt(a2). Throws if H does not change sign over the bracket.
double locate_bH(const ModelParams& p, std::pair<double, double> bracket);

/// Eigenvalues plus structural facts for a specific equilibrium.
StabilityReport classify(const ModelParams& p, const Equilibrium& eq,
                         double hyperbolic_tol = 1e-9);

/// Classification purely from eigenvalue real parts.
Classification classify_eigenvalues(const std::vector<std::complex<double>>& ev,
                                    double hyperbolic_tol = 1e-9);

}  // namespace viro

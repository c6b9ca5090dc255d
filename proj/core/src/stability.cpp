#include "virodyn/stability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace viro {

std::string classification_name(Classification c) {
  switch (c) {
    case Classification::stable: return "stable";
    case Classification::unstable: return "unstable";
    case Classification::non_hyperbolic: return "non_hyperbolic";
  }
  return "?";
}

std::string stability_report_to_json(const StabilityReport& r) {
  nlohmann::ordered_json j;
  auto evs = nlohmann::ordered_json::array();
  for (const auto& e : r.eigenvalues) evs.push_back({e.real(), e.imag()});
  j["eigenvalues"] = evs;
  j["classification"] = classification_name(r.classification);
  j["leading_real_part"] = r.leading_real_part;
  if (r.rh_verdict) {
    j["rh"] = {{"pass", r.rh_verdict->pass}, {"margins", r.rh_verdict->margins}};
  }
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j.dump(2);
}

RHVerdict routh_hurwitz3(double a1, double a2, double a3) {
  RHVerdict v;
  v.margins = {a1, a3, a1 * a2 - a3};
  v.pass = a1 > 0.0 && a3 > 0.0 && a1 * a2 - a3 > 0.0;
  return v;
}

RHVerdict routh_hurwitz4(double a1, double a2, double a3, double a4) {
  const double tr = -a1, m2 = a2, m3 = -a3, det = a4;
  RHVerdict v;
  v.margins = {-tr, m2, -m3, det, tr * (m2 * m3 - tr * det) - m3 * m3};
  v.pass = true;
  for (double m : v.margins)
    if (!(m > 0.0)) v.pass = false;
  return v;
}

namespace {

// coefficients of the E* characteristic polynomial for the 3D model,
// K = gamma = 1
struct HCoeffs {
  double a1, a2, a3;
};

HCoeffs h_coeffs(double lambda, double beta, double delta, double b) {
  HCoeffs h;
  h.a1 = (beta * (b + b * delta - 1.0) + delta * lambda) / ((b - 1.0) * beta);
  h.a2 = delta * lambda *
         ((b - 1.0) * beta * (beta - 1.0 + delta + b * (1.0 - beta + delta)) +
          ((b - 1.0) * (b - 1.0) * beta + b * delta * delta) * lambda) /
         ((b - 1.0) * (b - 1.0) * beta * ((b - 1.0) * beta + delta * lambda));
  h.a3 = delta * lambda * (1.0 + delta / (beta * (1.0 - b)));
  return h;
}

}  // namespace

double stability_function_H(const ModelParams& p0, double b) {
  if (!(b > 1.0)) throw std::invalid_argument("stability_function_H: requires b > 1");
  const ModelParams p = rescale(p0).params;
  HCoeffs h = h_coeffs(p.lambda, p.beta, p.delta, b);
  return h.a1 * h.a2 - h.a3;
}

RealPolynomial phi_polynomial(const ModelParams& p0) {
  const ModelParams p = rescale(p0).params;
  const double beta = p.beta, delta = p.delta, lambda = p.lambda;
  const double B4 = -beta * beta * beta;
  const double B3 = beta * beta * (-beta * (delta - 3.0) + delta * (delta + 3.0) + lambda + 1.0);
  const double B2 =
      beta * (beta * beta * (2.0 * delta - 3.0) - 3.0 * beta * (2.0 * delta + lambda + 1.0) +
              delta * lambda * (delta * (delta + 3.0) + lambda + 1.0));
  const double B1 = -beta * beta * beta * (delta - 1.0) +
                    beta * beta * (-delta * delta + 3.0 * delta + 3.0 * lambda + 3.0) -
                    beta * delta * lambda * (3.0 * delta + 2.0 * lambda + 2.0) +
                    delta * delta * delta * lambda * lambda;
  const double B0 = beta * (lambda + 1.0) * (delta * lambda - beta);
  return RealPolynomial({B0, B1, B2, B3, B4});
}

std::array<double, 5> shifted_phi(const ModelParams& p0) {
  const ModelParams p = rescale(p0).params;
  const double beta = p.beta, delta = p.delta, lambda = p.lambda;
  const double d2 = delta * delta, d3 = d2 * delta;
  std::array<double, 5> t{};
  t[0] = d3 * (lambda + 1.0) * (beta + delta + 1.0) * (beta + delta + lambda + 1.0) / beta;
  t[1] = d2 * (beta * (2.0 * delta * lambda + 3.0 * delta + 3.0 * lambda + 3.0) +
               (delta + 2.0) * lambda * lambda + 2.0 * delta * (delta + 3.0) * lambda +
               delta * (3.0 * delta + 5.0) + 5.0 * lambda + 3.0);
  t[2] = beta * delta *
         (-beta * beta + delta * (delta + 3.0) * lambda + 3.0 * delta * (delta + 1.0) +
          lambda * lambda + 4.0 * lambda + 3.0);
  t[3] = beta * beta * (-beta * (delta + 1.0) + (delta - 1.0) * delta + lambda + 1.0);
  t[4] = -beta * beta * beta;
  return t;
}

double locate_bH(const ModelParams& p, std::pair<double, double> bracket) {
  auto H = [&](double b) { return stability_function_H(p, b); };
  double lo = bracket.first, hi = bracket.second;
  if (!(lo > 1.0) || !(hi > lo)) throw std::invalid_argument("locate_bH: bad bracket");
  double flo = H(lo), fhi = H(hi);
  if ((flo < 0.0) == (fhi < 0.0))
    throw std::invalid_argument("locate_bH: H does not change sign over the bracket");
  // bisection with a secant refinement once the bracket is tight
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = H(mid);
    if (fm == 0.0) return mid;
    if ((flo < 0.0) == (fm < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
    if (hi - lo <= 1e-13 * std::max(1.0, std::abs(lo))) break;
  }
  double s = (flo != fhi) ? lo - flo * (hi - lo) / (fhi - flo) : 0.5 * (lo + hi);
  if (!(s >= lo && s <= hi)) s = 0.5 * (lo + hi);
  return s;
}

Classification classify_eigenvalues(const std::vector<std::complex<double>>& ev,
                                    double hyperbolic_tol) {
  double lead = -std::numeric_limits<double>::infinity();
  for (const auto& e : ev) lead = std::max(lead, e.real());
  if (std::abs(lead) < hyperbolic_tol) return Classification::non_hyperbolic;
  return lead < 0.0 ? Classification::stable : Classification::unstable;
}

StabilityReport classify(const ModelParams& p, const Equilibrium& eq, double hyperbolic_tol) {
  StabilityReport rep;
  SquareMatrix J = jacobian(p, eq.point);
  rep.eigenvalues = eigenvalues(J);
  double lead = -std::numeric_limits<double>::infinity();
  for (const auto& e : rep.eigenvalues) lead = std::max(lead, e.real());
  rep.leading_real_part = lead;
  rep.classification = classify_eigenvalues(rep.eigenvalues, hyperbolic_tol);

  RealPolynomial chi = characteristic_polynomial(J);
  if (chi.degree() == 4) {
    rep.rh_verdict = routh_hurwitz4(chi.coeff(3), chi.coeff(2), chi.coeff(1), chi.coeff(0));
  }

  const double R0 = basic_reproduction_number(p);
  switch (eq.tag) {
    case EqTag::E0:
      rep.notes = "saddle: lambda > 0 along x";
      rep.classification = Classification::unstable;
      break;
    case EqTag::EK:
      if (p.epsilon == 1) {
        // the z row vanishes: exact zero eigenvalue
        if (R0 < 1.0) {
          rep.notes = "locally stable (non-hyperbolic, Lyapunov-Malkin); zero eigenvalue in z";
          rep.classification = Classification::non_hyperbolic;
        } else {
          rep.notes = "unstable (R0 > 1); zero eigenvalue in z";
          rep.classification = Classification::unstable;
        }
      } else {
        rep.notes = R0 < 1.0 ? "stable (R0 < 1)" : "unstable (R0 > 1)";
      }
      break;
    case EqTag::Estar: {
      // block structure: the z eigenvalue is c_e + beta_z y* exactly
      const double ce = p.epsilon == 0 ? -p.c : 0.0;
      const double zeig = ce + p.beta_z * eq.point.y;
      if (p.epsilon == 1 && eq.point.y > 0.0) {
        rep.notes = "unstable: z eigenvalue beta_z y* > 0";
      } else if (p.epsilon == 0) {
        const double ye = p.c / p.beta_z;
        rep.notes = zeig > 0.0 ? "unstable: y* > y_e" : "z direction contracting (y* < y_e)";
      }
      break;
    }
    case EqTag::EN:
      rep.notes = "outside the nonnegative domain";
      break;
    case EqTag::Interior:
      break;
  }
  return rep;
}

}  // namespace viro

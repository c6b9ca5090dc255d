#include "virodyn/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace viro {

namespace {

double field_residual(const ModelParams& p, const State& s) {
  return norm(vector_field(p, s));
}

Equilibrium make_eq(const ModelParams& p, State s, EqTag tag, InteriorBranch br, bool feasible,
                    std::string note = {}) {
  Equilibrium e;
  e.point = s;
  e.tag = tag;
  e.branch = br;
  e.feasible = feasible;
  e.residual = field_residual(p, s);
  e.note = std::move(note);
  return e;
}

constexpr double kFeasTol = 1e-12;

}  // namespace

std::string tag_name(EqTag tag) {
  switch (tag) {
    case EqTag::E0: return "E0";
    case EqTag::EK: return "EK";
    case EqTag::Estar: return "Estar";
    case EqTag::EN: return "EN";
    case EqTag::Interior: return "interior";
  }
  return "?";
}

std::string branch_name(InteriorBranch br) {
  switch (br) {
    case InteriorBranch::none: return "";
    case InteriorBranch::minus: return "E_minus";
    case InteriorBranch::im: return "E_im";
    case InteriorBranch::plus: return "E_plus";
  }
  return "?";
}

double basic_reproduction_number(const ModelParams& p) {
  return p.beta * p.K * p.b / (p.beta * p.K + p.delta);
}

double critical_burst(const ModelParams& p) { return 1.0 + p.delta / (p.beta * p.K); }

State estar_point(const ModelParams& p) {
  const double R0 = basic_reproduction_number(p);
  const double xs = p.delta / (p.beta * (p.b - 1.0));
  const double ys = xs * p.b * p.lambda * (R0 - 1.0) /
                    (p.lambda * (p.b - R0) + (p.b - 1.0) * p.gamma * R0);
  const double vs = p.gamma * (p.b - 1.0) * ys / p.delta;
  return {xs, ys, vs, 0.0};
}

std::vector<Equilibrium> boundary_equilibria(const ModelParams& p) {
  p.validate();
  std::vector<Equilibrium> out;
  out.push_back(make_eq(p, State{0, 0, 0, 0}, EqTag::E0, InteriorBranch::none, true));
  out.push_back(make_eq(p, State{p.K, 0, 0, 0}, EqTag::EK, InteriorBranch::none, true));

  if (p.b > 1.0 && p.delta > 0.0) {
    State es = estar_point(p);
    bool feas = es.y >= -kFeasTol && in_domain(p, es, 1e-9);
    out.push_back(make_eq(p, es, EqTag::Estar, InteriorBranch::none, feas,
                          feas ? "" : "outside nonnegative domain (R0 <= 1)"));
  } else {
    Equilibrium e;
    e.tag = EqTag::Estar;
    e.feasible = false;
    e.note = "undefined: requires b > 1 and delta > 0";
    e.point = State{std::numeric_limits<double>::quiet_NaN(), 0, 0, 0};
    e.residual = std::numeric_limits<double>::quiet_NaN();
    out.push_back(e);
    return out;
  }

  // E_N: the x = 0, z != 0 factorization branch; always a negative witness
  if (p.beta_y > 0.0) {
    const double ye = p.c / p.beta_z;
    State en;
    if (p.epsilon == 0) {
      const double den = p.gamma * p.beta_v - p.delta * p.beta_y;
      en = {0.0, ye, den != 0.0 ? -ye * p.b * p.gamma * p.beta_y / den
                                : -std::numeric_limits<double>::infinity(),
            -p.gamma / p.beta_y};
    } else {
      const double den = p.gamma * p.beta_v - p.delta * p.beta_y;
      en = {0.0, -ye * p.gamma / p.beta_y,
            den != 0.0 ? ye * p.gamma * p.gamma * p.b / den
                       : std::numeric_limits<double>::infinity(),
            -p.gamma / p.beta_y};
    }
    if (std::isfinite(en.v)) {
      Equilibrium e = make_eq(p, en, EqTag::EN, InteriorBranch::none, false,
                              "always outside the nonnegative domain");
      out.push_back(e);
    }
  }
  return out;
}

namespace {

// epsilon = 0, K = gamma = 1 cubic in v. Expands
//   beta v h(v) g(v) - y_e g(v) - y_e beta_y f(v)
// with h = (1 - y_e) - (beta/lambda) v, g = beta_y y_e + beta_v v,
// f = y_e (b-1) - delta v, then normalizes the sign of the leading term.
// The expansion keeps beta_v = 0 well defined (degree drops to 2).
RealPolynomial interior_poly_eps0_scaled(const ModelParams& p) {
  const double ye = p.c / p.beta_z;
  RealPolynomial v = RealPolynomial::identity();
  RealPolynomial h({1.0 - ye, -p.beta / p.lambda});
  RealPolynomial g({p.beta_y * ye, p.beta_v});
  RealPolynomial f({ye * (p.b - 1.0), -p.delta});
  RealPolynomial expr = (p.beta * v) * h * g - ye * g - (ye * p.beta_y) * f;
  if (expr.leading() < 0.0) expr = expr * -1.0;
  return expr;
}

// epsilon = 1, general K: Q(y) = lambda f g (1 - y/K) - lambda h g^2/(beta K)
// - beta y f^2 with f = c gamma (b-1) - y beta_y beta_z,
// g = beta_v beta_z y + delta c, h = y beta_z beta_y / c + gamma.
RealPolynomial interior_poly_eps1(const ModelParams& p) {
  RealPolynomial y = RealPolynomial::identity();
  RealPolynomial f({p.c * p.gamma * (p.b - 1.0), -p.beta_y * p.beta_z});
  RealPolynomial g({p.delta * p.c, p.beta_v * p.beta_z});
  RealPolynomial h({p.gamma, p.beta_z * p.beta_y / p.c});
  RealPolynomial one_minus({1.0, -1.0 / p.K});
  return p.lambda * f * g * one_minus - (p.lambda / (p.beta * p.K)) * (h * g * g) -
         p.beta * (y * f * f);
}

// Branch names follow the root's rank inside the full cubic root set (complex
// roots ordered by real part): lowest = E_minus, middle = E_im, highest =
// E_plus. This keeps a lone surviving point correctly named on either side of
// a fold.
InteriorBranch branch_from_rank(const RealPolynomial& poly, double coord) {
  if (poly.degree() != 3) return InteriorBranch::im;
  auto roots = all_roots(poly);
  std::vector<double> res;
  for (const auto& r : roots) res.push_back(r.real());
  std::sort(res.begin(), res.end());
  int rank = 0;
  double bestd = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(res.size()); ++i) {
    const double d = std::abs(res[static_cast<std::size_t>(i)] - coord);
    if (d < bestd) {
      bestd = d;
      rank = i;
    }
  }
  return rank == 0 ? InteriorBranch::minus : (rank == 1 ? InteriorBranch::im : InteriorBranch::plus);
}

std::vector<Equilibrium> interior_eps0(const ModelParams& p0) {
  // the reduction to the cubic assumes K = gamma = 1; rescale, solve, map back
  Rescaled rs = rescale(p0);
  const ModelParams& p = rs.params;
  std::vector<Equilibrium> out;
  const double ye = p.c / p.beta_z;
  if (ye > 1.0) return out;  // no interior points
  if (p.beta_y == 0.0 && p.beta_v == 0.0) return out;  // immune action absent

  RealPolynomial P = interior_poly_eps0_scaled(p);
  if (P.degree() < 1) return out;
  const double v_cap = std::min(p.lambda * (1.0 - ye) / p.beta,
                                p.delta > 0.0 ? ye * (p.b - 1.0) / p.delta
                                              : std::numeric_limits<double>::infinity());
  std::vector<State> pts;
  for (const RealRoot& r : real_roots(P)) {
    const double v = r.x;
    if (v <= kFeasTol) continue;
    const double x = 1.0 - ye - v * p.beta / p.lambda;
    const double fg = ye * (p.b - 1.0) - p.delta * v;
    const double gg = p.beta_y * ye + p.beta_v * v;
    if (gg == 0.0) continue;
    const double z = fg / gg;
    if (x <= kFeasTol || z <= kFeasTol) continue;  // equivalent to v < v_cap
    if (v >= v_cap) continue;
    pts.push_back({x, ye, v, z});
  }
  std::sort(pts.begin(), pts.end(), [](const State& a, const State& b) { return a.v < b.v; });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    // map back to original scales
    State s{pts[i].x * rs.state_scale, pts[i].y * rs.state_scale, pts[i].v * rs.state_scale,
            pts[i].z * rs.state_scale};
    InteriorBranch br = P.degree() == 3 ? branch_from_rank(P, pts[i].v)
                                        : (i == 0 ? InteriorBranch::im : InteriorBranch::plus);
    out.push_back(make_eq(p0, s, EqTag::Interior, br, true));
  }
  return out;
}

std::vector<Equilibrium> interior_eps1(const ModelParams& p) {
  std::vector<Equilibrium> out;
  RealPolynomial Q = interior_poly_eps1(p);
  if (Q.degree() < 1) return out;
  const double yb = p.c * p.gamma * (p.b - 1.0) / (p.beta_y * p.beta_z);
  std::vector<State> pts;
  for (const RealRoot& r : real_roots(Q)) {
    const double y = r.x;
    if (y <= kFeasTol || y >= yb - kFeasTol) continue;
    const double f = p.c * p.gamma * (p.b - 1.0) - y * p.beta_y * p.beta_z;
    const double g = p.beta_v * p.beta_z * y + p.delta * p.c;
    const double h = y * p.beta_z * p.beta_y / p.c + p.gamma;
    if (std::abs(f) <= kFeasTol * std::max(1.0, p.c * p.gamma * p.b)) continue;  // x singular
    const double z = y * p.beta_z / p.c;
    const double v = y * f / g;
    const double x = h * g / (p.beta * f);
    if (x <= kFeasTol || v <= kFeasTol || z <= kFeasTol) continue;
    pts.push_back({x, y, v, z});
  }
  std::sort(pts.begin(), pts.end(), [](const State& a, const State& b) { return a.y < b.y; });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    InteriorBranch br = Q.degree() == 3 ? branch_from_rank(Q, pts[i].y)
                                        : (i == 0 ? InteriorBranch::im : InteriorBranch::plus);
    out.push_back(make_eq(p, pts[i], EqTag::Interior, br, true));
  }
  return out;
}

}  // namespace

RealPolynomial interior_polynomial(const ModelParams& p) {
  p.validate();
  if (p.epsilon == 0) return interior_poly_eps0_scaled(rescale(p).params);
  return interior_poly_eps1(p);
}

std::vector<Equilibrium> interior_equilibria(const ModelParams& p) {
  p.validate();
  if (p.c == 0.0 || p.beta_y < 0.0) {
    // y_e degenerates; no isolated interior points to report
    return {};
  }
  return p.epsilon == 0 ? interior_eps0(p) : interior_eps1(p);
}

std::vector<Equilibrium> all_equilibria(const ModelParams& p) {
  std::vector<Equilibrium> out = boundary_equilibria(p);
  for (auto& e : interior_equilibria(p)) out.push_back(e);
  return out;
}

std::optional<std::pair<double, double>> immune_window(const ModelParams& p) {
  p.validate();
  if (p.epsilon != 0) throw std::invalid_argument("immune_window: epsilon must be 0");
  if (p.K != 1.0 || p.gamma != 1.0)
    throw std::invalid_argument("immune_window: requires K = gamma = 1 (rescale first)");
  const double rad = p.lambda * (p.c - p.beta_z) * (p.c - p.beta_z) - 4.0 * p.c * p.beta_z;
  if (rad < 0.0) return std::nullopt;
  const double root = p.delta * std::sqrt(p.lambda) * std::sqrt(rad);
  const double base = 2.0 * p.beta * p.c - p.c * p.delta * p.lambda + p.delta * p.lambda * p.beta_z;
  const double den = 2.0 * p.beta * p.c;
  return std::make_pair((base - root) / den, (base + root) / den);
}

std::vector<double> fold_parameters(const ModelParams& p, const FoldScan& scan) {
  p.validate();
  if (scan.samples < 2) throw std::invalid_argument("fold_parameters: need >= 2 samples");
  auto disc_at = [&](double b) {
    ModelParams q = p;
    q.b = b;
    RealPolynomial poly = interior_polynomial(q);
    if (poly.degree() != 3) return std::numeric_limits<double>::quiet_NaN();
    return cubic_discriminant(poly);
  };
  std::vector<double> roots;
  double prev_b = scan.b_min;
  double prev = disc_at(prev_b);
  for (int i = 1; i <= scan.samples; ++i) {
    double b = scan.b_min + (scan.b_max - scan.b_min) * i / scan.samples;
    double cur = disc_at(b);
    if (std::isfinite(prev) && std::isfinite(cur) && prev != 0.0 &&
        ((prev < 0.0) != (cur < 0.0))) {
      double lo = prev_b, hi = b, flo = prev;
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = disc_at(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((flo < 0.0) == (fm < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
        if (hi - lo <= 1e-12 * std::max(1.0, std::abs(lo))) break;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_b = b;
    prev = cur;
  }
  return roots;
}

std::string equilibria_to_json(const std::vector<Equilibrium>& eqs) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& e : eqs) {
    nlohmann::ordered_json j;
    j["tag"] = tag_name(e.tag);
    if (e.branch != InteriorBranch::none) j["branch"] = branch_name(e.branch);
    j["point"] = {e.point.x, e.point.y, e.point.v, e.point.z};
    j["feasible"] = e.feasible;
    j["residual"] = e.residual;
    if (!e.note.empty()) j["note"] = e.note;
    arr.push_back(j);
  }
  return arr.dump(2);
}

}  // namespace viro

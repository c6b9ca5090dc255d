#include "virodyn/polyalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace viro {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool finite(double v) { return std::isfinite(v); }

}  // namespace

RealPolynomial::RealPolynomial(std::vector<double> ascending_coeffs) : c_(std::move(ascending_coeffs)) {
  for (double v : c_) {
    if (!finite(v)) throw std::invalid_argument("RealPolynomial: non-finite coefficient");
  }
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

double RealPolynomial::coeff(int k) const {
  if (k < 0 || k >= static_cast<int>(c_.size())) return 0.0;
  return c_[static_cast<std::size_t>(k)];
}

double RealPolynomial::leading() const {
  if (c_.empty()) return 0.0;
  return c_.back();
}

double RealPolynomial::eval(double x) const {
  double r = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
  return r;
}

std::complex<double> RealPolynomial::eval(std::complex<double> x) const {
  std::complex<double> r = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
  return r;
}

RealPolynomial RealPolynomial::derivative() const {
  if (c_.size() <= 1) return RealPolynomial();
  std::vector<double> d(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * static_cast<double>(k);
  return RealPolynomial(std::move(d));
}

RealPolynomial RealPolynomial::taylor_shift(double s) const {
  // repeated synthetic division by (x - s); the Horner form of the binomial
  // expansion
  std::vector<double> a = c_;
  const std::size_t n = a.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = n - 1; i > k; --i) a[i - 1] += s * a[i];
    out[k] = a[k];
  }
  return RealPolynomial(std::move(out));
}

int RealPolynomial::sign_changes() const {
  int changes = 0;
  int prev = 0;
  for (double v : c_) {
    if (v == 0.0) continue;
    int sgn = v > 0.0 ? 1 : -1;
    if (prev != 0 && sgn != prev) ++changes;
    prev = sgn;
  }
  return changes;
}

double RealPolynomial::coeff_scale() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

RealPolynomial RealPolynomial::operator+(const RealPolynomial& o) const {
  std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
  for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
  return RealPolynomial(std::move(r));
}

RealPolynomial RealPolynomial::operator-(const RealPolynomial& o) const {
  std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
  for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] -= o.c_[i];
  return RealPolynomial(std::move(r));
}

RealPolynomial RealPolynomial::operator*(const RealPolynomial& o) const {
  if (c_.empty() || o.c_.empty()) return RealPolynomial();
  std::vector<double> r(c_.size() + o.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i)
    for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
  return RealPolynomial(std::move(r));
}

RealPolynomial RealPolynomial::operator*(double s) const {
  std::vector<double> r = c_;
  for (double& v : r) v *= s;
  return RealPolynomial(std::move(r));
}

namespace {

// Newton polish with derivative fallback; keeps the iterate bounded.
double polish_real(const RealPolynomial& p, const RealPolynomial& dp, double x, int iters = 40) {
  double best = x;
  double best_abs = std::abs(p.eval(x));
  for (int i = 0; i < iters; ++i) {
    double f = p.eval(x);
    double d = dp.eval(x);
    if (d == 0.0) break;
    double step = f / d;
    if (!finite(step)) break;
    x -= step;
    double fx = std::abs(p.eval(x));
    if (fx < best_abs) {
      best_abs = fx;
      best = x;
    }
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
  }
  return best;
}

std::vector<double> roots_linear(const RealPolynomial& p) { return {-p.coeff(0) / p.coeff(1)}; }

std::vector<double> roots_quadratic(double a, double b, double c) {
  // stable quadratic formula
  double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return {};
  double sq = std::sqrt(disc);
  double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
  std::vector<double> out;
  if (q != 0.0) {
    out.push_back(q / a);
    out.push_back(c / q);
  } else {
    out.push_back(0.0);
    if (a != 0.0) out.push_back(-b / a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// All real roots of the monic depressed-free cubic a3 x^3 + ... (trig/Cardano).
std::vector<double> roots_cubic(double a3, double a2, double a1, double a0) {
  double a = a2 / a3, b = a1 / a3, c = a0 / a3;
  double q = (a * a - 3.0 * b) / 9.0;
  double r = (a * (2.0 * a * a - 9.0 * b) + 27.0 * c) / 54.0;
  double r2 = r * r, q3 = q * q * q;
  std::vector<double> out;
  // <= keeps the boundary case (a double root) on the trigonometric branch
  if (r2 <= q3) {
    double t = std::acos(std::clamp(r / std::sqrt(q3), -1.0, 1.0));
    double m = -2.0 * std::sqrt(q);
    out = {m * std::cos(t / 3.0) - a / 3.0,
           m * std::cos((t + 2.0 * kPi) / 3.0) - a / 3.0,
           m * std::cos((t - 2.0 * kPi) / 3.0) - a / 3.0};
  } else {
    double u = std::cbrt(-r - (r >= 0 ? 1.0 : -1.0) * std::sqrt(r2 - q3));
    double v = (u == 0.0) ? 0.0 : q / u;
    out = {u + v - a / 3.0};
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Real roots of a quartic via the depressed form and its resolvent cubic.
std::vector<double> roots_quartic(const RealPolynomial& p) {
  double a4 = p.coeff(4);
  double a = p.coeff(3) / a4, b = p.coeff(2) / a4, c = p.coeff(1) / a4, d = p.coeff(0) / a4;
  // depressed: y^4 + P y^2 + Q y + R, x = y - a/4
  double a2 = a * a;
  double P = b - 3.0 * a2 / 8.0;
  double Q = c - a * b / 2.0 + a2 * a / 8.0;
  double R = d - a * c / 4.0 + a2 * b / 16.0 - 3.0 * a2 * a2 / 256.0;
  std::vector<double> ys;
  if (std::abs(Q) < 1e-14 * (1.0 + std::abs(P) + std::abs(R))) {
    // biquadratic
    for (double t : roots_quadratic(1.0, P, R)) {
      if (t < 0.0) continue;
      double s = std::sqrt(std::max(0.0, t));
      ys.push_back(s);
      if (s != 0.0) ys.push_back(-s);
    }
  } else {
    // resolvent: 8 m^3 + 8 P m^2 + (2P^2 - 8R) m - Q^2 = 0; any root with m > 0 works
    auto ms = roots_cubic(8.0, 8.0 * P, 2.0 * P * P - 8.0 * R, -Q * Q);
    double m = -1.0;
    for (double cand : ms) m = std::max(m, cand);
    if (m <= 0.0) return {};  // degenerate; caller falls back
    double s = std::sqrt(2.0 * m);
    // y^4+Py^2+Qy+R = (y^2 + s y + t1)(y^2 - s y + t2)
    double t1 = P / 2.0 + m + Q / (2.0 * s);
    double t2 = P / 2.0 + m - Q / (2.0 * s);
    for (double r1 : roots_quadratic(1.0, s, t1)) ys.push_back(r1);
    for (double r2 : roots_quadratic(1.0, -s, t2)) ys.push_back(r2);
  }
  std::vector<double> out;
  out.reserve(ys.size());
  for (double y : ys) out.push_back(y - a / 4.0);
  std::sort(out.begin(), out.end());
  return out;
}

// Derivative-recursion isolation: critical points split the line into
// monotone intervals; bisect every bracket with a sign change.
std::vector<double> roots_general(const RealPolynomial& p);

double bisect(const RealPolynomial& p, double lo, double hi) {
  double flo = p.eval(lo);
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    double fm = p.eval(mid);
    if (fm == 0.0) return mid;
    if ((flo < 0) == (fm < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-16 * std::max(1.0, std::abs(lo))) break;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> roots_general(const RealPolynomial& p) {
  int deg = p.degree();
  if (deg <= 0) return {};
  if (deg == 1) return roots_linear(p);
  std::vector<double> crit = roots_general(p.derivative());
  std::sort(crit.begin(), crit.end());
  // Cauchy bound for all roots
  double lead = std::abs(p.leading());
  double bound = 0.0;
  for (int k = 0; k < deg; ++k) bound = std::max(bound, std::abs(p.coeff(k)) / lead);
  bound += 1.0;
  std::vector<double> knots;
  knots.push_back(-bound);
  for (double c : crit)
    if (c > -bound && c < bound) knots.push_back(c);
  knots.push_back(bound);
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    double lo = knots[i], hi = knots[i + 1];
    double flo = p.eval(lo), fhi = p.eval(hi);
    if (flo == 0.0) out.push_back(lo);
    if ((flo < 0.0 && fhi > 0.0) || (flo > 0.0 && fhi < 0.0)) out.push_back(bisect(p, lo, hi));
  }
  if (!knots.empty() && p.eval(knots.back()) == 0.0) out.push_back(knots.back());
  // critical points may themselves be (even-multiplicity) roots
  double scale = p.coeff_scale();
  for (double c : crit) {
    if (std::abs(p.eval(c)) <= 1e-13 * scale * std::pow(std::max(1.0, std::abs(c)), deg))
      out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  // bracketing and the critical-point path can both report one simple root
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }),
            out.end());
  return out;
}

}  // namespace

std::vector<RealRoot> real_roots(const RealPolynomial& p,
                                 std::optional<std::pair<double, double>> interval,
                                 const RootOptions& opts) {
  if (p.is_zero()) throw std::invalid_argument("real_roots: zero polynomial");
  const int deg = p.degree();
  if (deg == 0) return {};
  std::vector<double> raw;
  switch (deg) {
    case 1:
      raw = roots_linear(p);
      break;
    case 2:
      raw = roots_quadratic(p.coeff(2), p.coeff(1), p.coeff(0));
      break;
    case 3:
      raw = roots_cubic(p.coeff(3), p.coeff(2), p.coeff(1), p.coeff(0));
      break;
    case 4: {
      // resolvent arithmetic loses or invents roots on wide spreads; pool it
      // with the bracketing recursion and let the residual gate decide
      raw = roots_quartic(p);
      for (double r : roots_general(p)) raw.push_back(r);
      break;
    }
    default:
      raw = roots_general(p);
      break;
  }
  const RealPolynomial dp = p.derivative();
  for (double& r : raw) r = polish_real(p, dp, r);
  std::sort(raw.begin(), raw.end());

  // residual filter
  const double scale = p.coeff_scale();
  std::vector<double> ok;
  for (double r : raw) {
    double tol = opts.residual_factor * scale * std::pow(std::max(1.0, std::abs(r)), deg);
    if (std::abs(p.eval(r)) <= std::max(tol, 1e3 * std::numeric_limits<double>::min())) ok.push_back(r);
  }

  // cluster copies, then settle multiplicity by successive derivatives: a
  // genuine multiple root flattens p' as well, a duplicated simple root
  // does not
  std::vector<RealRoot> merged;
  const double root_scale = [&] {
    double m = 1.0;
    for (double r : ok) m = std::max(m, std::abs(r));
    return m;
  }();
  for (double r : ok) {
    if (!merged.empty() && std::abs(r - merged.back().x) < opts.cluster_factor * root_scale) {
      merged.back().multiplicity += 1;
      merged.back().x = merged.back().x + (r - merged.back().x) / merged.back().multiplicity;
    } else {
      merged.push_back({r, 1, false});
    }
  }
  for (auto& rr : merged) {
    int m_est = 1;
    RealPolynomial d = dp;
    while (m_est < deg && !d.is_zero()) {
      const double gate = 1e-6 * std::max(d.coeff_scale(), 1e-300) *
                          std::pow(std::max(1.0, std::abs(rr.x)), d.degree());
      if (std::abs(d.eval(rr.x)) > gate) break;
      ++m_est;
      d = d.derivative();
    }
    rr.multiplicity = m_est;
    rr.clustered = m_est > 1;
  }

  if (interval) {
    auto [lo, hi] = *interval;
    std::vector<RealRoot> filtered;
    for (const auto& rr : merged)
      if (rr.x >= lo && rr.x <= hi) filtered.push_back(rr);
    return filtered;
  }
  return merged;
}

namespace {

// Newton polish with Maehly deflation terms so distinct starts cannot
// collapse onto an already-accepted root.
std::complex<double> polish_maehly(const RealPolynomial& p, const RealPolynomial& dp,
                                   std::complex<double> x,
                                   const std::vector<std::complex<double>>& found) {
  std::complex<double> best = x;
  double best_abs = std::abs(p.eval(x));
  for (int i = 0; i < 40; ++i) {
    std::complex<double> f = p.eval(x);
    std::complex<double> d = dp.eval(x);
    std::complex<double> defl = 0.0;
    bool too_close = false;
    for (const auto& r : found) {
      std::complex<double> diff = x - r;
      if (std::abs(diff) < 1e-14 * std::max(1.0, std::abs(x))) {
        too_close = true;
        break;
      }
      defl += 1.0 / diff;
    }
    if (too_close) break;
    std::complex<double> denom = d - f * defl;
    if (denom == 0.0) break;
    std::complex<double> step = f / denom;
    if (!finite(step.real()) || !finite(step.imag())) break;
    x -= step;
    double fx = std::abs(p.eval(x));
    if (fx < best_abs) {
      best_abs = fx;
      best = x;
    }
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
  }
  return best;
}

// synthetic division of p by (x - r); the remainder is dropped
RealPolynomial deflate_once(const RealPolynomial& p, double r) {
  const auto& c = p.coeffs();
  const std::size_t n = c.size();
  if (n <= 1) return RealPolynomial();
  std::vector<double> q(n - 1, 0.0);
  double carry = c[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    q[i] = carry;
    carry = c[i] + r * carry;
  }
  return RealPolynomial(std::move(q));
}

}  // namespace

std::vector<std::complex<double>> all_roots(const RealPolynomial& p) {
  if (p.is_zero()) throw std::invalid_argument("all_roots: zero polynomial");
  const int deg = p.degree();
  using C = std::complex<double>;
  std::vector<C> out;
  if (deg == 0) return out;
  if (deg > 4) throw std::invalid_argument("all_roots: degree > 4 unsupported");
  if (deg == 1) {
    out.push_back(C(-p.coeff(0) / p.coeff(1), 0.0));
    return out;
  }
  auto quad_roots = [](double A, double B, double Cc) {
    C disc = C(B * B - 4.0 * A * Cc, 0.0);
    C sq = std::sqrt(disc);
    return std::vector<C>{(-B + sq) / (2.0 * A), (-B - sq) / (2.0 * A)};
  };
  if (deg == 2) {
    out = quad_roots(p.coeff(2), p.coeff(1), p.coeff(0));
  } else {
    // peel off real roots one at a time, then solve the even remainder
    RealPolynomial work = p;
    while (work.degree() > 0) {
      const int d = work.degree();
      if (d == 1) {
        out.push_back(C(-work.coeff(0) / work.coeff(1), 0.0));
        break;
      }
      if (d == 2) {
        for (auto r : quad_roots(work.coeff(2), work.coeff(1), work.coeff(0))) out.push_back(r);
        break;
      }
      auto rr = real_roots(work);
      if (rr.empty()) {
        // even remainder with two conjugate pairs: split the depressed
        // quartic into two real quadratics via the resolvent cubic
        const double a4 = work.coeff(4);
        const double a = work.coeff(3) / a4, b = work.coeff(2) / a4, c = work.coeff(1) / a4,
                     dd = work.coeff(0) / a4;
        const double a2 = a * a;
        const double P = b - 3.0 * a2 / 8.0;
        const double Q = c - a * b / 2.0 + a2 * a / 8.0;
        const double R = dd - a * c / 4.0 + a2 * b / 16.0 - 3.0 * a2 * a2 / 256.0;
        std::vector<C> ys;
        if (std::abs(Q) < 1e-14 * (1.0 + std::abs(P) + std::abs(R))) {
          for (auto t : quad_roots(1.0, P, R)) {
            C s = std::sqrt(t);
            ys.push_back(s);
            ys.push_back(-s);
          }
        } else {
          auto ms = roots_cubic(8.0, 8.0 * P, 2.0 * P * P - 8.0 * R, -Q * Q);
          double m = 0.0;
          for (double cand : ms) m = std::max(m, cand);
          if (m <= 0.0) m = 1e-12;
          const double s = std::sqrt(2.0 * m);
          const double t1 = P / 2.0 + m + Q / (2.0 * s);
          const double t2 = P / 2.0 + m - Q / (2.0 * s);
          for (auto r1 : quad_roots(1.0, s, t1)) ys.push_back(r1);
          for (auto r2 : quad_roots(1.0, -s, t2)) ys.push_back(r2);
        }
        for (auto y : ys) out.push_back(y - a / 4.0);
        break;
      }
      out.push_back(C(rr.front().x, 0.0));
      work = deflate_once(work, rr.front().x);
    }
  }

  // Maehly polish on the original polynomial, real roots pinned
  const RealPolynomial dp = p.derivative();
  std::vector<C> polished;
  for (const auto& r : out) {
    C rp = polish_maehly(p, dp, r, polished);
    if (std::abs(rp.imag()) <= 1e-10 * std::max(1.0, std::abs(rp.real()))) rp = C(rp.real(), 0.0);
    polished.push_back(rp);
  }
  // enforce conjugate symmetry on the complex part
  for (std::size_t i = 0; i < polished.size(); ++i) {
    if (polished[i].imag() <= 0.0) continue;
    for (std::size_t j = 0; j < polished.size(); ++j) {
      if (i == j || polished[j].imag() >= 0.0) continue;
      if (std::abs(polished[j] - std::conj(polished[i])) <
          1e-6 * std::max(1.0, std::abs(polished[i]))) {
        polished[j] = std::conj(polished[i]);
        break;
      }
    }
  }
  std::sort(polished.begin(), polished.end(), [](const C& a, const C& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return polished;
}

double cubic_discriminant(const RealPolynomial& p) {
  if (p.degree() != 3) throw std::invalid_argument("cubic_discriminant: degree must be 3");
  double a = p.coeff(3), b = p.coeff(2), c = p.coeff(1), d = p.coeff(0);
  return 18.0 * a * b * c * d - 4.0 * b * b * b * d + b * b * c * c - 4.0 * a * c * c * c -
         27.0 * a * a * d * d;
}

}  // namespace viro

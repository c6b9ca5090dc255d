#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "test_util.hpp"
#include "virodyn/bifurcation.hpp"
#include "virodyn/dynamics.hpp"
#include "virodyn/equilibria.hpp"
#include "virodyn/smallmat.hpp"
#include "virodyn/stability.hpp"

using viro::ModelParams;
using viro::State;

namespace {

double det4(const viro::SquareMatrix& m) {
  // LU determinant
  double a[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a[i][j] = m(i, j);
  double det = 1.0;
  for (int c = 0; c < 4; ++c) {
    int piv = c;
    for (int r = c + 1; r < 4; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0.0) return 0.0;
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (int r = c + 1; r < 4; ++r) {
      double f = a[r][c] / a[c][c];
      for (int j = c; j < 4; ++j) a[r][j] -= f * a[c][j];
    }
  }
  return det;
}

}  // namespace

TEST_CASE("equilibria stay fixed under integration") {
  auto p = testutil::params_eps0(9.5);
  State ek{p.K, 0, 0, 0};
  auto orb = viro::integrate(p, ek, 0.0, 100.0);
  REQUIRE(orb.complete);
  CHECK(viro::distance(orb.states.back(), ek) < 1e-10);
}

TEST_CASE("tolerance halving consistency") {
  auto p = testutil::params_eps1(29.5);
  State init{0.9, 0.01, 0.01, 0.01};
  viro::IntegratorOptions coarse;
  coarse.abs_tol = 1e-8;
  coarse.rel_tol = 1e-6;
  viro::IntegratorOptions fine;
  fine.abs_tol = 1e-10;
  fine.rel_tol = 1e-8;
  auto a = viro::integrate(p, init, 0.0, 100.0, coarse);
  auto b = viro::integrate(p, init, 0.0, 100.0, fine);
  CHECK(viro::distance(a.states.back(), b.states.back()) < 10.0 * (1e-6 + 1e-8));
}

TEST_CASE("time reversal consistency") {
  auto p = testutil::params_eps0(9.5);
  State init{0.5, 0.05, 0.5, 0.3};
  viro::IntegratorOptions io;
  io.abs_tol = 1e-11;
  io.rel_tol = 1e-10;
  auto fwd = viro::integrate(p, init, 0.0, 5.0, io);
  REQUIRE(fwd.complete);
  auto back = viro::integrate(p, fwd.states.back(), 5.0, 0.0, io);
  REQUIRE(back.complete);
  CHECK(viro::distance(back.states.back(), init) < 10.0 * (1e-10 + 1e-11) * 100.0);
}

TEST_CASE("orbit sampling and stats") {
  auto p = testutil::params_eps0(9.5);
  viro::IntegratorOptions io;
  io.sample_dt = 0.5;
  auto orb = viro::integrate(p, State{0.5, 0.01, 1.2, 0.5}, 0.0, 30.0, io);
  REQUIRE(orb.complete);
  for (std::size_t i = 1; i < orb.times.size(); ++i) CHECK(orb.times[i] > orb.times[i - 1]);
  CHECK(orb.stats.domain_violations == 0);
  CHECK(orb.stats.max.x <= 1.0 + 1e-9);
}

TEST_CASE("persistent oscillation past the three-compartment Hopf point") {
  auto p = testutil::params_3d(28.0);
  State es = viro::estar_point(p);
  State init{es.x + 0.01, es.y + 0.01, es.v + 0.01, 0.0};
  viro::IntegratorOptions io;
  io.sample_dt = 0.25;
  auto orb = viro::integrate(p, init, 0.0, 2500.0, io);
  REQUIRE(orb.complete);
  double xmin = 1e300, xmax = -1e300;
  for (std::size_t i = orb.states.size() * 4 / 5; i < orb.states.size(); ++i) {
    xmin = std::min(xmin, orb.states[i].x);
    xmax = std::max(xmax, orb.states[i].x);
  }
  CHECK(xmax - xmin > 0.01);  // no equilibrium convergence
}

TEST_CASE("epsilon=1 b=27 converges to E_plus by t=400") {
  auto p = testutil::params_eps1(27.0);
  auto orb = viro::integrate(p, State{0.9, 0.01, 0.01, 0.01}, 0.0, 400.0);
  REQUIRE(orb.complete);
  auto eqs = viro::interior_equilibria(p);
  REQUIRE(eqs.size() == 1);
  CHECK(viro::distance(orb.states.back(), eqs[0].point) < 1e-4);
}

TEST_CASE("limit cycle at epsilon=0 b=23") {
  auto p = testutil::params_eps0(23.0);
  viro::IntegratorOptions io;
  auto seed = viro::integrate(p, State{0.25, 0.05, 0.1, 0.1}, 0.0, 3000.0, io);
  REQUIRE(seed.complete);
  viro::FindCycleOptions fo;
  fo.n_samples = 2000;  // tight divergence quadrature below
  auto cyc = viro::find_limit_cycle(p, seed, fo);
  CHECK(cyc.refined);
  CHECK(cyc.stable);
  CHECK(testutil::close(cyc.period, 32.613, 0.05));
  CHECK(cyc.residual < 1e-9 * std::max(1.0, viro::norm(cyc.anchor)));

  // the trivial Floquet multiplier sits at 1
  double best = 1e300;
  for (const auto& m : cyc.floquet) best = std::min(best, std::abs(m - std::complex<double>(1, 0)));
  CHECK(best < 1e-4);

  // Abel-Liouville: det of the monodromy equals exp of the divergence integral
  const double logdet = std::log(std::abs(det4(cyc.monodromy)));
  double div_int = 0.0;
  {
    const auto& ts = cyc.sample_times;
    const auto& ss = cyc.samples;
    std::vector<double> divs(ss.size());
    for (std::size_t i = 0; i < ss.size(); ++i) {
      auto J = viro::jacobian(p, ss[i]);
      divs[i] = J(0, 0) + J(1, 1) + J(2, 2) + J(3, 3);
    }
    for (std::size_t i = 1; i < ss.size(); ++i)
      div_int += 0.5 * (divs[i] + divs[i - 1]) * (ts[i] - ts[i - 1]);
  }
  CHECK(logdet == doctest::Approx(div_int).epsilon(1e-4));
}

TEST_CASE("cycle search on a converged orbit reports no recurrence") {
  auto p = testutil::params_eps1(27.0);
  auto eqs = viro::interior_equilibria(p);
  auto seed = viro::integrate(p, eqs[0].point, 0.0, 50.0);
  CHECK_THROWS_WITH_AS(viro::find_limit_cycle(p, seed),
                       doctest::Contains("no recurrence"), std::runtime_error);
}

TEST_CASE("cycle near the Hopf point shrinks with the normal form") {
  auto p = testutil::params_eps1();
  viro::LocateOptions lo;
  lo.tag = viro::EqTag::Interior;
  lo.branch = viro::InteriorBranch::im;
  const double bH = viro::locate_critical(p, viro::CriticalKind::hopf, {29.6, 30.2}, lo);

  auto c1 = viro::cycle_near_hopf(p, "b", bH, 0.002);
  auto c2 = viro::cycle_near_hopf(p, "b", bH, 0.0005);
  CHECK(c2.amplitude < c1.amplitude);

  // period approaches 2 pi / omega at the Hopf point
  auto ph = p;
  ph.b = bH;
  auto eqs = viro::interior_equilibria(ph);
  double omega = 0.0;
  for (const auto& e : eqs)
    for (const auto& lam : viro::eigenvalues(viro::jacobian(ph, e.point)))
      if (lam.imag() > 1e-9 && std::abs(lam.real()) < 1e-6) omega = lam.imag();
  REQUIRE(omega > 0.0);
  CHECK(c2.period == doctest::Approx(2.0 * 3.14159265358979 / omega).epsilon(0.02));

  // wrong side of the bifurcation
  CHECK_THROWS_AS(viro::cycle_near_hopf(p, "b", bH, -0.01), std::runtime_error);
}

TEST_CASE("first Lyapunov coefficient") {
  auto p = testutil::params_eps1();
  viro::LocateOptions lo;
  lo.tag = viro::EqTag::Interior;
  lo.branch = viro::InteriorBranch::im;
  const double bH = viro::locate_critical(p, viro::CriticalKind::hopf, {29.6, 30.2}, lo);
  auto ph = p;
  ph.b = bH;
  auto eqs = viro::interior_equilibria(ph);
  REQUIRE(eqs.size() == 3);
  const double l1 = viro::first_lyapunov_coefficient(p, bH, eqs[1]);
  CHECK(l1 > 0.0);  // subcritical side, consistent with the unstable small cycles

  // normal-form amplitude law: the small cycle amplitude matches
  // rho = sqrt(-Re lambda(b) / (l1 omega)) within a quarter
  double omega = 0.0;
  for (const auto& lam : viro::eigenvalues(viro::jacobian(ph, eqs[1].point)))
    if (lam.imag() > 1e-9 && std::abs(lam.real()) < 1e-6) omega = lam.imag();
  REQUIRE(omega > 0.0);
  const double off = 0.002;
  auto pside = p;
  pside.b = bH + off;
  auto side_eqs = viro::interior_equilibria(pside);
  double re_pair = 0.0;
  const viro::Equilibrium* eim = nullptr;
  for (const auto& e : side_eqs)
    if (e.branch == viro::InteriorBranch::im) eim = &e;
  REQUIRE(eim != nullptr);
  for (const auto& lam : viro::eigenvalues(viro::jacobian(pside, eim->point)))
    if (lam.imag() > 1e-9 && std::abs(lam.imag() - omega) < 0.2 * omega) re_pair = lam.real();
  const double rho = std::sqrt(-re_pair / (l1 * omega));
  auto cyc = viro::cycle_near_hopf(p, "b", bH, off);
  // amplitude in the full state is about 2 rho for a unit eigenvector
  CHECK(cyc.amplitude == doctest::Approx(2.0 * rho).epsilon(0.35));

  // the bilinear form is state independent (quadratic field)
  auto Ja = viro::jacobian(pside, State{0.1, 0.2, 0.3, 0.4});
  auto Jb = viro::jacobian(pside, State{0.6, 0.1, 0.2, 0.8});
  // second differences of the Jacobian entries are constant: J(a) - J(b) is
  // linear in a - b, so the Hessian difference vanishes; spot-check one entry
  auto Jc = viro::jacobian(pside, State{0.35, 0.15, 0.25, 0.6});
  CHECK(Ja(1, 1) + Jb(1, 1) - 2.0 * Jc(1, 1) == doctest::Approx(0.0).epsilon(1e-12));

  // refusing a non-Hopf point
  auto pfar = p;
  pfar.b = 31.0;
  auto far_eqs = viro::interior_equilibria(pfar);
  CHECK_THROWS_AS(viro::first_lyapunov_coefficient(p, 31.0, far_eqs[1]), std::invalid_argument);
}

TEST_CASE("largest Lyapunov exponent at a stable equilibrium") {
  auto p = testutil::params_eps1(27.0);
  auto eqs = viro::interior_equilibria(p);
  REQUIRE(eqs.size() == 1);
  // leading eigenvalue real part is -0.1001
  viro::LyapunovOptions lo;
  lo.transient = 100.0;
  auto est = viro::largest_lyapunov_exponent(p, eqs[0].point, 800.0, lo);
  CHECK(est.value < 0.0);
  CHECK(est.value == doctest::Approx(-0.1001).epsilon(0.10));
  CHECK(!est.trace.empty());
}

TEST_CASE("largest Lyapunov exponent on the b=23 cycle is neutral") {
  auto p = testutil::params_eps0(23.0);
  auto seed = viro::integrate(p, State{0.25, 0.05, 0.1, 0.1}, 0.0, 2000.0);
  viro::LyapunovOptions lo;
  lo.transient = 200.0;
  auto est = viro::largest_lyapunov_exponent(p, seed.states.back(), 4200.0, lo);
  CHECK(std::abs(est.value) < 0.01);
}

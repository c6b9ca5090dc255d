#include <doctest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "virodyn/equilibria.hpp"
#include "virodyn/polyalg.hpp"
#include "virodyn/stability.hpp"

using viro::RealPolynomial;
using viro::RealRoot;

TEST_CASE("evaluation and derivative") {
  RealPolynomial p({-1.0, 0.0, 1.0});  // x^2 - 1
  CHECK(p.eval(1.0) == doctest::Approx(0.0));
  CHECK(p.eval(-3.0) == doctest::Approx(8.0));
  RealPolynomial cube({0.0, 0.0, 0.0, 1.0});
  CHECK(cube.derivative().eval(2.0) == doctest::Approx(12.0));
  CHECK(RealPolynomial({5.0}).derivative().is_zero());
}

TEST_CASE("taylor shift basics and involution") {
  RealPolynomial sq({0.0, 0.0, 1.0});
  auto sh = sq.taylor_shift(1.0);  // (1+x)^2
  CHECK(sh.coeff(0) == doctest::Approx(1.0));
  CHECK(sh.coeff(1) == doctest::Approx(2.0));
  CHECK(sh.coeff(2) == doctest::Approx(1.0));

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> c(1 + static_cast<std::size_t>(rng() % 6));
    for (auto& v : c) v = u(rng);
    if (c.back() == 0.0) c.back() = 1.0;
    RealPolynomial p(c);
    double s = u(rng);
    RealPolynomial back = p.taylor_shift(s).taylor_shift(-s);
    for (int k = 0; k <= p.degree(); ++k)
      CHECK(back.coeff(k) ==
            doctest::Approx(p.coeff(k)).epsilon(1e-12).scale(std::max(1.0, p.coeff_scale())));
  }
}

TEST_CASE("sign changes") {
  CHECK(RealPolynomial({1.0, -1.0}).sign_changes() == 1);
  CHECK(RealPolynomial({1.0, 0.0, 2.0}).sign_changes() == 0);

  // shifted Phi for the three-compartment parameter set has exactly one change
  auto phi = viro::phi_polynomial(testutil::params_3d());
  double b0 = viro::critical_burst(testutil::params_3d());
  CHECK(phi.taylor_shift(b0).sign_changes() == 1);

  // Q(y) in the three-root regime carries three changes
  auto q = viro::interior_polynomial(testutil::params_eps1(35.0));
  CHECK(q.sign_changes() == 3);
}

TEST_CASE("real roots closed forms") {
  auto r = viro::real_roots(RealPolynomial({-4.0, 0.0, 1.0}));
  REQUIRE(r.size() == 2);
  CHECK(r[0].x == doctest::Approx(-2.0));
  CHECK(r[1].x == doctest::Approx(2.0));

  CHECK_THROWS_AS(viro::real_roots(RealPolynomial()), std::invalid_argument);

  // interval filter is closed at the endpoints
  RealPolynomial p123 = RealPolynomial({-1.0, 1.0}) * RealPolynomial({-2.0, 1.0}) *
                        RealPolynomial({-3.0, 1.0});
  auto in = viro::real_roots(p123, std::make_pair(1.0, 2.0));
  REQUIRE(in.size() == 2);
  CHECK(in[0].x == doctest::Approx(1.0));
  CHECK(in[1].x == doctest::Approx(2.0));
}

TEST_CASE("Phi root above b0 reproduces the Hopf location") {
  auto p = testutil::params_3d();
  auto phi = viro::phi_polynomial(p);
  const double b0 = viro::critical_burst(p);
  double smallest = 0.0;
  bool found = false;
  for (const auto& r : viro::real_roots(phi)) {
    if (r.x > b0) {
      smallest = r.x;
      found = true;
      break;
    }
  }
  REQUIRE(found);
  CHECK(testutil::close(smallest, 27.7664, 1e-3));
}

TEST_CASE("random cubics pass a bisection oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    RealPolynomial p({u(rng), u(rng), u(rng), 1.0});
    auto roots = viro::real_roots(p);
    auto dp = p.derivative();
    for (const auto& r : roots) {
      const double h = 1e-5 * std::max(1.0, std::abs(r.x));
      const bool sign_change = (p.eval(r.x - h) < 0.0) != (p.eval(r.x + h) < 0.0);
      const bool flat = std::abs(dp.eval(r.x)) < 1e-5 * std::max(1.0, p.coeff_scale());
      CHECK((sign_change || flat));
    }
    for (std::size_t i = 1; i < roots.size(); ++i) CHECK(roots[i - 1].x <= roots[i].x);
  }
}

TEST_CASE("Descartes bound on polynomials with known integer roots") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    int deg = 2 + static_cast<int>(rng() % 3);
    RealPolynomial p({1.0});
    int positive = 0;
    for (int k = 0; k < deg; ++k) {
      int root = static_cast<int>(rng() % 9) - 4;
      if (root == 0) root = 5;
      if (root > 0) ++positive;
      p = p * RealPolynomial({-static_cast<double>(root), 1.0});
    }
    int changes = p.sign_changes();
    CHECK(positive <= changes);
    CHECK((changes - positive) % 2 == 0);
  }
}

TEST_CASE("multiple roots are reported with multiplicity") {
  // (x-1)^2 (x+2)
  RealPolynomial p = RealPolynomial({-1.0, 1.0}) * RealPolynomial({-1.0, 1.0}) *
                     RealPolynomial({2.0, 1.0});
  auto roots = viro::real_roots(p);
  REQUIRE(roots.size() == 2);
  CHECK(roots[0].x == doctest::Approx(-2.0));
  CHECK(roots[1].x == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(roots[1].multiplicity == 2);
  CHECK(roots[1].clustered);
}

TEST_CASE("cubic discriminant") {
  RealPolynomial p({0.0, -1.0, 0.0, 1.0});  // x^3 - x
  CHECK(viro::cubic_discriminant(p) == doctest::Approx(4.0));
  CHECK_THROWS_AS(viro::cubic_discriminant(RealPolynomial({1.0, 1.0})), std::invalid_argument);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    RealPolynomial q({u(rng), u(rng), u(rng), 1.0});
    double disc = viro::cubic_discriminant(q);
    if (std::abs(disc) < 1e-6) continue;  // too close to a fold to resolve
    auto roots = viro::real_roots(q);
    int distinct = static_cast<int>(roots.size());
    if (disc > 0.0) CHECK(distinct == 3);
    else CHECK(distinct == 1);
  }
}

TEST_CASE("epsilon=0 interior cubic discriminant vanishes at the fold") {
  auto p = testutil::params_eps0();
  auto disc_at = [&](double b) {
    auto q = p;
    q.b = b;
    return viro::cubic_discriminant(viro::interior_polynomial(q));
  };
  double lo = 9.5, hi = 11.0;
  double flo = disc_at(lo);
  REQUIRE(flo * disc_at(hi) < 0.0);
  for (int i = 0; i < 100; ++i) {
    double mid = 0.5 * (lo + hi);
    if ((disc_at(mid) < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = disc_at(mid);
    } else {
      hi = mid;
    }
  }
  CHECK(testutil::close(0.5 * (lo + hi), 10.2462, 1e-3));
}

TEST_CASE("Phi(b0) closed form") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    auto p = testutil::params_3d();
    p.lambda = u(rng);
    p.beta = u(rng);
    p.delta = u(rng);
    const double b0 = viro::critical_burst(p);
    const double expect = std::pow(p.delta, 3) * (1.0 + p.lambda) * (1.0 + p.beta + p.delta) *
                          (1.0 + p.beta + p.delta + p.lambda) / p.beta;
    CHECK(viro::phi_polynomial(p).eval(b0) == doctest::Approx(expect).epsilon(1e-10));

    // shifted constant and leading terms from the Lemma list
    auto sh = viro::phi_polynomial(p).taylor_shift(b0);
    CHECK(sh.coeff(0) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(sh.coeff(4) == doctest::Approx(-std::pow(p.beta, 3.0)).epsilon(1e-12));
  }
}

TEST_CASE("complex roots: conjugate symmetry and wide spreads") {
  // regression: characteristic polynomial with roots spread over three decades
  RealPolynomial chi({0.00095865634984732863, 0.032262169504806502, -0.30308874034687333,
                      1.3348104825619613, 1.0});
  auto roots = viro::all_roots(chi);
  REQUIRE(roots.size() == 4);
  int complex_count = 0;
  for (const auto& r : roots) {
    CHECK(std::abs(chi.eval(r)) <
          1e-8 * chi.coeff_scale() * std::pow(std::max(1.0, std::abs(r)), 4.0));
    if (r.imag() != 0.0) ++complex_count;
  }
  CHECK(complex_count == 2);
  CHECK(testutil::eig_match(roots,
                            {{-1.5443, 0.0}, {-0.0238, 0.0}, {0.1167, 0.1115}, {0.1167, -0.1115}},
                            2e-4));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    RealPolynomial q({u(rng), u(rng), u(rng), u(rng), 1.0});
    auto rs = viro::all_roots(q);
    REQUIRE(rs.size() == 4);
    for (const auto& r : rs) {
      CHECK(std::abs(q.eval(r)) <
            1e-7 * q.coeff_scale() * std::pow(std::max(1.0, std::abs(r)), 4.0));
      if (r.imag() != 0.0) {
        bool has_conj = false;
        for (const auto& s : rs)
          if (std::abs(s - std::conj(r)) < 1e-9 * std::max(1.0, std::abs(r))) has_conj = true;
        CHECK(has_conj);
      }
    }
  }
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "virodyn/dynamics.hpp"
#include "virodyn/equilibria.hpp"
#include "virodyn/model.hpp"

using viro::ModelParams;
using viro::State;

TEST_CASE("fixed points of the vector field") {
  auto p = testutil::params_eps0();
  auto d0 = viro::vector_field(p, State{0, 0, 0, 0});
  CHECK(viro::norm(d0) == 0.0);
  auto p3 = testutil::params_3d();
  auto dK = viro::vector_field(p3, State{1.0, 0, 0, 0});
  CHECK(viro::norm(dK) == 0.0);

  // interior point quoted for the epsilon=0 suite at b=9.5
  State eim{0.453156, 0.06, 1.59331, 0.67437};
  CHECK(viro::norm(viro::vector_field(p, eim)) < 1e-5);
}

TEST_CASE("input validation") {
  auto p = testutil::params_eps0();
  CHECK_THROWS_AS(viro::vector_field(p, State{1.0, std::nan(""), 0, 0}), std::invalid_argument);
  auto bad = p;
  bad.epsilon = 2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.K = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("jacobian matches central finite differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int eps = 0; eps <= 1; ++eps) {
    for (int trial = 0; trial < 20; ++trial) {
      ModelParams p = testutil::random_params(rng, eps);
      State s{u(rng), u(rng), 3.0 * u(rng), u(rng)};
      auto J = viro::jacobian(p, s);
      const double h = 1e-6;
      for (int j = 0; j < 4; ++j) {
        auto sp = s.array(), sm = s.array();
        sp[static_cast<std::size_t>(j)] += h;
        sm[static_cast<std::size_t>(j)] -= h;
        auto fp = viro::vector_field(p, State::from(sp)).array();
        auto fm = viro::vector_field(p, State::from(sm)).array();
        for (int i = 0; i < 4; ++i) {
          double fd = (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / (2.0 * h);
          CHECK(J(i, j) == doctest::Approx(fd).epsilon(1e-6));
        }
      }
    }
  }
}

TEST_CASE("jacobian block structure at boundary points") {
  auto p = testutil::params_eps0();
  auto J0 = viro::jacobian(p, State{0, 0, 0, 0});
  CHECK(J0(0, 0) == doctest::Approx(p.lambda));
  CHECK(J0(1, 1) == doctest::Approx(-p.gamma));
  CHECK(J0(2, 2) == doctest::Approx(-p.delta));
  CHECK(J0(3, 3) == doctest::Approx(-p.c));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j && !(i == 2 && j == 1)) CHECK(J0(i, j) == 0.0);

  auto p1 = testutil::params_eps1();
  auto JK = viro::jacobian(p1, State{p1.K, 0, 0, 0});
  for (int j = 0; j < 4; ++j) CHECK(JK(3, j) == 0.0);
}

TEST_CASE("essential non-negativity on boundary states") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int eps = 0; eps <= 1; ++eps) {
    for (int trial = 0; trial < 200; ++trial) {
      ModelParams p = testutil::random_params(rng, eps);
      State s{u(rng), u(rng), 2.0 * u(rng), u(rng)};
      int comp = static_cast<int>(rng() % 4);
      auto a = s.array();
      a[static_cast<std::size_t>(comp)] = 0.0;
      auto d = viro::vector_field(p, State::from(a)).array();
      CHECK(d[static_cast<std::size_t>(comp)] >= 0.0);
    }
  }
}

TEST_CASE("3d reduction") {
  auto p = testutil::params_3d();
  auto r = viro::reduce_3d(testutil::params_eps0());
  CHECK(r.beta_y == 0.0);
  CHECK(r.beta_v == 0.0);

  // equilibria of the reduction are E0, EK, Estar
  auto eqs = viro::all_equilibria(p);
  int feasible = 0;
  for (const auto& e : eqs)
    if (e.feasible) ++feasible;
  CHECK(feasible == 3);

  // field vanishes at the quoted Estar for b=28
  std::array<double, 3> estar{0.148148, 0.0431317, 2.64672};
  auto d = viro::vector_field_3d(p, estar);
  CHECK(std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) < 1e-5);

  // z = 0 plane is exactly invariant and tracks the reduced flow
  viro::IntegratorOptions io;
  io.sample_dt = 0.5;
  auto orb_full = viro::integrate(testutil::params_eps0(), State{0.5, 0.1, 0.4, 0.0}, 0, 50, io);
  auto orb_red =
      viro::integrate(viro::reduce_3d(testutil::params_eps0()), State{0.5, 0.1, 0.4, 0.0}, 0, 50, io);
  REQUIRE(orb_full.states.size() == orb_red.states.size());
  for (std::size_t i = 0; i < orb_full.states.size(); ++i) {
    CHECK(orb_full.states[i].z == 0.0);
    CHECK(viro::distance(orb_full.states[i], orb_red.states[i]) < 1e-8);
  }
}

TEST_CASE("rescale maps orbits and leaves R0 invariant") {
  auto p0 = testutil::params_3d();
  auto id = viro::rescale(p0);
  CHECK(id.params.lambda == doctest::Approx(p0.lambda));
  CHECK(id.params.beta == doctest::Approx(p0.beta));
  CHECK(id.state_scale == 1.0);
  CHECK(id.time_scale == 1.0);

  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    ModelParams p = testutil::random_params(rng, trial % 2);
    p.K = u(rng);
    p.gamma = u(rng);
    auto rs = viro::rescale(p);
    CHECK(viro::basic_reproduction_number(p) ==
          doctest::Approx(viro::basic_reproduction_number(rs.params)).epsilon(1e-12));

    viro::IntegratorOptions io;
    io.abs_tol = 1e-12;
    io.rel_tol = 1e-11;
    State init{0.4 * p.K, 0.1 * p.K, 0.2 * p.K, 0.05 * p.K};
    const double T = 10.0;
    auto orig = viro::integrate(p, init, 0.0, T, io);
    State init_s{init.x / rs.state_scale, init.y / rs.state_scale, init.v / rs.state_scale,
                 init.z / rs.state_scale};
    auto scaled = viro::integrate(rs.params, init_s, 0.0, rs.time_scale * T, io);
    State mapped{scaled.states.back().x * rs.state_scale, scaled.states.back().y * rs.state_scale,
                 scaled.states.back().v * rs.state_scale, scaled.states.back().z * rs.state_scale};
    CHECK(viro::distance(orig.states.back(), mapped) < 1e-8 * std::max(1.0, viro::norm(mapped)));
  }
}

TEST_CASE("domain bounds and membership") {
  auto p = testutil::params_eps1();
  CHECK(viro::in_domain(p, State{p.K, 0, 0, 0}));
  auto d = viro::domain_bounds(p);
  CHECK(d.z_cap == doctest::Approx(p.beta_z * p.K / p.c));
  CHECK_FALSE(d.unbounded);

  auto pz = testutil::params_eps0();
  pz.delta = 0.0;
  auto dz = viro::domain_bounds(pz);
  CHECK(dz.unbounded);
  CHECK(std::isinf(dz.v_cap));

  auto pb = testutil::params_eps0();
  pb.beta_y = 0.0;
  CHECK(viro::domain_bounds(pb).unbounded);
}

TEST_CASE("forward invariance of the domain (sampled)") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    ModelParams p = trial % 2 == 0 ? testutil::params_eps0(6.0 + 10.0 * u(rng))
                                   : testutil::params_eps1(25.0 + 20.0 * u(rng));
    auto d = viro::domain_bounds(p);
    double xy = u(rng) * p.K;
    State init{xy * u(rng), xy * (1.0 - u(rng)), u(rng) * std::min(d.v_cap, 50.0),
               u(rng) * std::min(d.z_cap, 20.0)};
    init.y = std::min(init.y, p.K - init.x);
    viro::IntegratorOptions io;
    io.sample_dt = 1.0;
    auto orb = viro::integrate(p, init, 0.0, 200.0, io);
    REQUIRE(orb.complete);
    for (const auto& s : orb.states) CHECK(viro::in_domain(p, s, 1e-6));
  }
}

TEST_CASE("parameter serialization round trips") {
  auto p = testutil::params_eps1(29.5);
  auto q = viro::params_from_kv(viro::params_to_kv(p));
  CHECK(q.beta == doctest::Approx(p.beta).epsilon(1e-15));
  CHECK(q.gamma == doctest::Approx(p.gamma).epsilon(1e-15));
  CHECK(q.epsilon == p.epsilon);

  auto r = viro::params_from_json(viro::params_to_json(p));
  CHECK(r.b == doctest::Approx(p.b).epsilon(1e-15));
  CHECK(r.c == doctest::Approx(p.c).epsilon(1e-15));
  CHECK(r.epsilon == p.epsilon);

  CHECK_THROWS_AS(viro::params_from_kv("nonsense without equals"), std::invalid_argument);
  CHECK_THROWS_AS(viro::set_param(p, "bogus", 1.0), std::invalid_argument);
}

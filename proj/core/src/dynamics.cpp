#include "virodyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "dopri5.hpp"
#include "virodyn/smallmat.hpp"
#include "virodyn/stability.hpp"

namespace viro {

namespace {

using Vec4 = std::array<double, 4>;

constexpr double kTwoPi = 6.283185307179586476925;

// unchecked field/jacobian for integrator inner loops (non-finite trial
// states are handled by step rejection)
inline void field4(const ModelParams& p, const Vec4& s, Vec4& d) {
  const double x = s[0], y = s[1], v = s[2], z = s[3];
  const double zpow = p.epsilon == 0 ? 1.0 : z;
  d[0] = p.lambda * x * (1.0 - (x + y) / p.K) - p.beta * x * v;
  d[1] = p.beta * x * v - p.gamma * y - p.beta_y * y * z;
  d[2] = p.b * p.gamma * y - p.beta * x * v - p.delta * v - p.beta_v * v * z;
  d[3] = z * (p.beta_z * y - p.c * zpow);
}

inline void jac4(const ModelParams& p, const Vec4& s, double J[4][4]) {
  const double x = s[0], y = s[1], v = s[2], z = s[3];
  J[0][0] = p.lambda - p.lambda * (2.0 * x + y) / p.K - p.beta * v;
  J[0][1] = -p.lambda * x / p.K;
  J[0][2] = -p.beta * x;
  J[0][3] = 0.0;
  J[1][0] = p.beta * v;
  J[1][1] = -p.gamma - p.beta_y * z;
  J[1][2] = p.beta * x;
  J[1][3] = -p.beta_y * y;
  J[2][0] = -p.beta * v;
  J[2][1] = p.b * p.gamma;
  J[2][2] = -p.delta - p.beta_v * z - p.beta * x;
  J[2][3] = -p.beta_v * v;
  J[3][0] = 0.0;
  J[3][1] = p.beta_z * z;
  J[3][2] = 0.0;
  J[3][3] = p.epsilon == 0 ? (p.beta_z * y - p.c) : (p.beta_z * y - 2.0 * p.c * z);
}

// d f / d par, analytic for "b", central differences otherwise
void dfield_dpar(const ModelParams& p, const std::string& name, const Vec4& s, Vec4& out) {
  if (name == "b") {
    out = {0.0, 0.0, p.gamma * s[1], 0.0};
    return;
  }
  const double v0 = get_param(p, name);
  const double h = 1e-6 * std::max(1.0, std::abs(v0));
  ModelParams pp = p, pm = p;
  set_param(pp, name, v0 + h);
  set_param(pm, name, v0 - h);
  Vec4 fp, fm;
  field4(pp, s, fp);
  field4(pm, s, fm);
  for (int i = 0; i < 4; ++i) out[static_cast<std::size_t>(i)] =
      (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / (2.0 * h);
}

detail::StepperOptions stepper_opts(const IntegratorOptions& o) {
  detail::StepperOptions s;
  s.abs_tol = o.abs_tol;
  s.rel_tol = o.rel_tol;
  s.initial_step = o.initial_step;
  s.max_step = o.max_step;
  s.max_steps = o.max_steps;
  return s;
}

double dot4(const Vec4& a, const Vec4& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

double norm4(const Vec4& a) { return std::sqrt(dot4(a, a)); }

// flow with monodromy and optional parameter sensitivity
struct SegFlow {
  Vec4 x_end{};
  SquareMatrix M{4};
  Vec4 xi{};
  Vec4 comp_min{}, comp_max{};
  detail::IntegrateStatus status = detail::IntegrateStatus::ok;
};

SegFlow flow_variational(const ModelParams& p, const std::string* par, const Vec4& u, double T,
                         const IntegratorOptions& opts) {
  SegFlow out;
  for (int i = 0; i < 4; ++i) {
    out.comp_min[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i)];
    out.comp_max[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i)];
  }
  auto track = [&out](const double* s) {
    for (int i = 0; i < 4; ++i) {
      out.comp_min[static_cast<std::size_t>(i)] =
          std::min(out.comp_min[static_cast<std::size_t>(i)], s[i]);
      out.comp_max[static_cast<std::size_t>(i)] =
          std::max(out.comp_max[static_cast<std::size_t>(i)], s[i]);
    }
  };
  if (par) {
    using V = std::array<double, 24>;
    V y{};
    for (int i = 0; i < 4; ++i) y[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i)];
    for (int i = 0; i < 4; ++i) y[static_cast<std::size_t>(4 + 5 * i)] = 1.0;
    auto rhs = [&p, par](double, const V& s, V& d) {
      Vec4 x{s[0], s[1], s[2], s[3]};
      Vec4 dx;
      field4(p, x, dx);
      double J[4][4];
      jac4(p, x, J);
      Vec4 dpar;
      dfield_dpar(p, *par, x, dpar);
      for (int i = 0; i < 4; ++i) d[static_cast<std::size_t>(i)] = dx[static_cast<std::size_t>(i)];
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          double acc = 0.0;
          for (int k = 0; k < 4; ++k) acc += J[i][k] * s[static_cast<std::size_t>(4 + 4 * k + j)];
          d[static_cast<std::size_t>(4 + 4 * i + j)] = acc;
        }
      for (int i = 0; i < 4; ++i) {
        double acc = dpar[static_cast<std::size_t>(i)];
        for (int k = 0; k < 4; ++k) acc += J[i][k] * s[static_cast<std::size_t>(20 + k)];
        d[static_cast<std::size_t>(20 + i)] = acc;
      }
    };
    out.status = detail::dopri5<24>(rhs, 0.0, T, y, stepper_opts(opts),
                                    [&](double, double, const V& s, const detail::DenseSegment<24>&) {
                                      track(s.data());
                                      return true;
                                    });
    for (int i = 0; i < 4; ++i) out.x_end[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)];
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) out.M(i, j) = y[static_cast<std::size_t>(4 + 4 * i + j)];
    for (int i = 0; i < 4; ++i) out.xi[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(20 + i)];
  } else {
    using V = std::array<double, 20>;
    V y{};
    for (int i = 0; i < 4; ++i) y[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i)];
    for (int i = 0; i < 4; ++i) y[static_cast<std::size_t>(4 + 5 * i)] = 1.0;
    auto rhs = [&p](double, const V& s, V& d) {
      Vec4 x{s[0], s[1], s[2], s[3]};
      Vec4 dx;
      field4(p, x, dx);
      double J[4][4];
      jac4(p, x, J);
      for (int i = 0; i < 4; ++i) d[static_cast<std::size_t>(i)] = dx[static_cast<std::size_t>(i)];
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          double acc = 0.0;
          for (int k = 0; k < 4; ++k) acc += J[i][k] * s[static_cast<std::size_t>(4 + 4 * k + j)];
          d[static_cast<std::size_t>(4 + 4 * i + j)] = acc;
        }
    };
    out.status = detail::dopri5<20>(rhs, 0.0, T, y, stepper_opts(opts),
                                    [&](double, double, const V& s, const detail::DenseSegment<20>&) {
                                      track(s.data());
                                      return true;
                                    });
    for (int i = 0; i < 4; ++i) out.x_end[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)];
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) out.M(i, j) = y[static_cast<std::size_t>(4 + 4 * i + j)];
  }
  return out;
}

}  // namespace

Orbit integrate(const ModelParams& p, const State& init, double t0, double t1,
                const IntegratorOptions& opts) {
  p.validate();
  if (!(std::isfinite(init.x) && std::isfinite(init.y) && std::isfinite(init.v) &&
        std::isfinite(init.z)))
    throw std::invalid_argument("integrate: non-finite initial state");
  if (!(opts.abs_tol > 0.0) || !(opts.rel_tol > 0.0))
    throw std::invalid_argument("integrate: tolerances must be positive");

  Orbit orbit;
  const double viol_tol = std::max(1e-9, 100.0 * (opts.abs_tol + opts.rel_tol));
  auto record = [&](double t, const State& s) {
    orbit.times.push_back(t);
    orbit.states.push_back(s);
    orbit.stats.min = {std::min(orbit.stats.min.x, s.x), std::min(orbit.stats.min.y, s.y),
                       std::min(orbit.stats.min.v, s.v), std::min(orbit.stats.min.z, s.z)};
    orbit.stats.max = {std::max(orbit.stats.max.x, s.x), std::max(orbit.stats.max.y, s.y),
                       std::max(orbit.stats.max.v, s.v), std::max(orbit.stats.max.z, s.z)};
  };
  record(t0, init);

  Vec4 y = init.array();
  auto rhs = [&p](double, const Vec4& s, Vec4& d) { field4(p, s, d); };
  double next_sample = opts.sample_dt > 0.0 ? t0 + opts.sample_dt : 0.0;
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  // y and v carry nonnegative source terms at zero, so noise-level negative
  // excursions are projected back; left alone they can cascade out of the
  // orthant where nothing bounds the flow. x and z are multiplicative and
  // must not be pinned at zero.
  auto project = [dir](Vec4& s) {
    bool changed = false;
    for (int i : {1, 2}) {
      double& v = s[static_cast<std::size_t>(i)];
      if (dir > 0.0 && v < 0.0 && v > -1e-6) {
        v = 0.0;
        changed = true;
      }
    }
    return changed;
  };
  auto status = detail::dopri5<4>(
      rhs, t0, t1, y, stepper_opts(opts),
      [&](double, double t_new, const Vec4& s, const detail::DenseSegment<4>& seg) {
        if (opts.sample_dt > 0.0) {
          while ((next_sample - t_new) * dir <= 0.0) {
            Vec4 ys = seg.eval(next_sample);
            record(next_sample, State::from(ys));
            next_sample += dir * opts.sample_dt;
          }
        } else {
          record(t_new, State::from(s));
        }
        if (!in_domain(p, State::from(s), viol_tol)) ++orbit.stats.domain_violations;
        return true;
      },
      project);
  if (opts.sample_dt > 0.0 && (orbit.times.empty() || orbit.times.back() != t1) &&
      status == detail::IntegrateStatus::ok) {
    record(t1, State::from(y));
  }
  orbit.complete = status == detail::IntegrateStatus::ok;
  if (!orbit.complete) orbit.diagnostic = detail::status_text(status);
  return orbit;
}

namespace {

// ---- multiple shooting ----
//
// Unknowns (u_0 .. u_{m-1}, T [, par]); equations: m segment matching
// conditions phi_{T/m}(u_k) = u_{k+1 mod m} plus one phase row pinning the
// correction at u_0 orthogonal to a reference flow direction. Splitting the
// period tames the transversally unstable cycles around E_im, whose full
// monodromy carries multipliers ~ e^16.

struct MsEval {
  std::vector<Vec4> ends;
  std::vector<SquareMatrix> Mk;
  std::vector<Vec4> fend;
  std::vector<Vec4> xik;  // filled when a parameter is tracked
  Vec4 comp_min{}, comp_max{};
  bool ok = false;
};

MsEval ms_evaluate(const ModelParams& p, const std::string* par, const std::vector<Vec4>& nodes,
                   double T, const IntegratorOptions& opts) {
  const std::size_t m = nodes.size();
  MsEval e;
  e.ends.resize(m);
  e.Mk.assign(m, SquareMatrix(4));
  e.fend.resize(m);
  if (par) e.xik.resize(m);
  e.comp_min = nodes[0];
  e.comp_max = nodes[0];
  const double tau = T / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) {
    SegFlow sf = flow_variational(p, par, nodes[k], tau, opts);
    if (sf.status != detail::IntegrateStatus::ok) return e;
    bool fin = true;
    for (int i = 0; i < 4; ++i) {
      if (!std::isfinite(sf.x_end[static_cast<std::size_t>(i)])) fin = false;
      for (int j = 0; j < 4; ++j)
        if (!std::isfinite(sf.M(i, j))) fin = false;
      if (par && !std::isfinite(sf.xi[static_cast<std::size_t>(i)])) fin = false;
    }
    if (!fin) return e;
    e.ends[k] = sf.x_end;
    e.Mk[k] = sf.M;
    field4(p, sf.x_end, e.fend[k]);
    if (par) e.xik[k] = sf.xi;
    for (int i = 0; i < 4; ++i) {
      e.comp_min[static_cast<std::size_t>(i)] =
          std::min(e.comp_min[static_cast<std::size_t>(i)], sf.comp_min[static_cast<std::size_t>(i)]);
      e.comp_max[static_cast<std::size_t>(i)] =
          std::max(e.comp_max[static_cast<std::size_t>(i)], sf.comp_max[static_cast<std::size_t>(i)]);
    }
  }
  e.ok = true;
  return e;
}

double ms_residual_norm(const std::vector<Vec4>& nodes, const MsEval& e) {
  const std::size_t m = nodes.size();
  double r2 = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const Vec4& nxt = nodes[(k + 1) % m];
    for (int i = 0; i < 4; ++i) {
      double d = e.ends[k][static_cast<std::size_t>(i)] - nxt[static_cast<std::size_t>(i)];
      r2 += d * d;
    }
  }
  return std::sqrt(r2);
}

SquareMatrix ms_monodromy(const MsEval& e) {
  SquareMatrix M = SquareMatrix::identity(4);
  for (const auto& Mk : e.Mk) M = matmul(Mk, M);
  return M;
}

struct MsOutcome {
  std::vector<Vec4> nodes;
  double T = 0.0;
  SquareMatrix M{4};
  Vec4 comp_min{}, comp_max{};
  double residual = 0.0;
  bool converged = false;
};

// Newton at fixed parameters
MsOutcome ms_newton(const ModelParams& p, std::vector<Vec4> nodes, double T,
                    const Vec4& anchor_ref, const Vec4& f_ref, int max_iter, double tol,
                    const IntegratorOptions& opts) {
  const std::size_t m = nodes.size();
  const int n = static_cast<int>(4 * m + 1);
  MsOutcome out;
  double best = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    MsEval e = ms_evaluate(p, nullptr, nodes, T, opts);
    if (!e.ok) break;
    double res = ms_residual_norm(nodes, e);
    double phase = 0.0;
    for (int i = 0; i < 4; ++i)
      phase += f_ref[static_cast<std::size_t>(i)] *
               (nodes[0][static_cast<std::size_t>(i)] - anchor_ref[static_cast<std::size_t>(i)]);
    if (res < best) {
      best = res;
      out.nodes = nodes;
      out.T = T;
      out.M = ms_monodromy(e);
      out.comp_min = e.comp_min;
      out.comp_max = e.comp_max;
      out.residual = res;
    }
    if (res <= tol && std::abs(phase) <= tol) {
      out.converged = true;
      return out;
    }
    std::vector<double> A(static_cast<std::size_t>(n) * n, 0.0), rhs(static_cast<std::size_t>(n), 0.0);
    auto at = [&](int r, int c) -> double& { return A[static_cast<std::size_t>(r) * n + c]; };
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t kn = (k + 1) % m;
      for (int i = 0; i < 4; ++i) {
        const int row = static_cast<int>(4 * k) + i;
        for (int j = 0; j < 4; ++j) at(row, static_cast<int>(4 * k) + j) = e.Mk[k](i, j);
        at(row, static_cast<int>(4 * kn) + i) += -1.0;
        at(row, n - 1) = e.fend[k][static_cast<std::size_t>(i)] / static_cast<double>(m);
        rhs[static_cast<std::size_t>(row)] =
            -(e.ends[k][static_cast<std::size_t>(i)] - nodes[kn][static_cast<std::size_t>(i)]);
      }
    }
    for (int j = 0; j < 4; ++j) at(n - 1, j) = f_ref[static_cast<std::size_t>(j)];
    rhs[static_cast<std::size_t>(n - 1)] = -phase;
    if (!solve_real(n, A, rhs)) break;
    // cap the update so Newton cannot jump to another object
    double sc = 1.0;
    double du = 0.0;
    for (std::size_t k = 0; k < m; ++k)
      for (int i = 0; i < 4; ++i) du += rhs[4 * k + static_cast<std::size_t>(i)] * rhs[4 * k + static_cast<std::size_t>(i)];
    du = std::sqrt(du);
    const double cap = 0.5 * std::max(1.0, norm4(nodes[0])) * std::sqrt(static_cast<double>(m));
    if (du > cap) sc = cap / du;
    const double dT = rhs[static_cast<std::size_t>(n - 1)];
    if (std::abs(dT) > 0.3 * T) sc = std::min(sc, 0.3 * T / std::abs(dT));
    for (std::size_t k = 0; k < m; ++k)
      for (int i = 0; i < 4; ++i)
        nodes[k][static_cast<std::size_t>(i)] += sc * rhs[4 * k + static_cast<std::size_t>(i)];
    T += sc * dT;
    if (!(T > 0.0) || !std::isfinite(T)) break;
  }
  return out;
}

std::vector<std::complex<double>> floquet_of(const SquareMatrix& M) {
  // Faddeev-LeVerrier overflows past ~1e75 entries (traces of powers)
  for (int i = 0; i < M.n; ++i)
    for (int j = 0; j < M.n; ++j)
      if (!std::isfinite(M(i, j)) || std::abs(M(i, j)) > 1e60) return {};
  return eigenvalues(M);
}

bool cycle_stable(const std::vector<std::complex<double>>& mult) {
  if (mult.empty()) return false;
  std::size_t triv = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mult.size(); ++i) {
    double d = std::abs(mult[i] - std::complex<double>(1.0, 0.0));
    if (d < best) {
      best = d;
      triv = i;
    }
  }
  for (std::size_t i = 0; i < mult.size(); ++i) {
    if (i == triv) continue;
    if (std::abs(mult[i]) >= 1.0) return false;
  }
  return true;
}

// dense resampling, each shooting segment integrated from its own node so
// unstable cycles do not drift
Cycle build_cycle(const ModelParams& p, const MsOutcome& so, int n_samples,
                  const IntegratorOptions& integ) {
  Cycle cyc;
  cyc.anchor = State::from(so.nodes[0]);
  cyc.period = so.T;
  cyc.residual = so.residual;
  cyc.refined = so.converged;
  cyc.monodromy = so.M;
  cyc.floquet = floquet_of(so.M);
  cyc.stable = cycle_stable(cyc.floquet);
  for (const auto& nd : so.nodes) cyc.shooting_nodes.push_back(State::from(nd));
  double amp = 0.0;
  for (int i = 0; i < 4; ++i)
    amp = std::max(amp, so.comp_max[static_cast<std::size_t>(i)] -
                            so.comp_min[static_cast<std::size_t>(i)]);
  cyc.amplitude = amp;

  const std::size_t m = so.nodes.size();
  const double tau = so.T / static_cast<double>(m);
  const int per_seg = std::max(2, n_samples / static_cast<int>(m));
  auto rhs = [&p](double, const Vec4& s, Vec4& d) { field4(p, s, d); };
  for (std::size_t k = 0; k < m; ++k) {
    Vec4 y = so.nodes[k];
    const double t_base = tau * static_cast<double>(k);
    cyc.sample_times.push_back(t_base);
    cyc.samples.push_back(State::from(y));
    double next = tau / per_seg;
    detail::dopri5<4>(rhs, 0.0, tau, y, stepper_opts(integ),
                      [&](double, double t_new, const Vec4&, const detail::DenseSegment<4>& seg) {
                        while (next <= t_new && next < tau - 1e-12) {
                          cyc.sample_times.push_back(t_base + next);
                          cyc.samples.push_back(State::from(seg.eval(next)));
                          next += tau / per_seg;
                        }
                        return true;
                      });
  }
  cyc.sample_times.push_back(so.T);
  cyc.samples.push_back(State::from(so.nodes[0]));
  return cyc;
}

// seed nodes along an orbit: integrate from u0 and capture states at k tau
std::vector<Vec4> nodes_along_flow(const ModelParams& p, const Vec4& u0, double T, int m,
                                   const IntegratorOptions& opts) {
  std::vector<Vec4> nodes{u0};
  if (m <= 1) return nodes;
  const double tau = T / m;
  Vec4 y = u0;
  auto rhs = [&p](double, const Vec4& s, Vec4& d) { field4(p, s, d); };
  for (int k = 1; k < m; ++k) {
    detail::dopri5<4>(rhs, 0.0, tau, y, stepper_opts(opts),
                      [](double, double, const Vec4&, const detail::DenseSegment<4>&) { return true; });
    nodes.push_back(y);
  }
  return nodes;
}

}  // namespace

Cycle find_limit_cycle(const ModelParams& p, const Orbit& seed, const FindCycleOptions& opts) {
  p.validate();
  if (seed.states.size() < 8) throw std::runtime_error("find_limit_cycle: seed orbit too short");
  const std::size_t tail_start = seed.states.size() / 2;

  // recurrence check on the tail
  State lo{1e300, 1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300, -1e300};
  for (std::size_t i = tail_start; i < seed.states.size(); ++i) {
    const State& s = seed.states[i];
    lo = {std::min(lo.x, s.x), std::min(lo.y, s.y), std::min(lo.v, s.v), std::min(lo.z, s.z)};
    hi = {std::max(hi.x, s.x), std::max(hi.y, s.y), std::max(hi.v, s.v), std::max(hi.z, s.z)};
  }
  const double osc = std::max(std::max(hi.x - lo.x, hi.y - lo.y),
                              std::max(hi.v - lo.v, hi.z - lo.z));
  if (osc < opts.min_oscillation)
    throw std::runtime_error("find_limit_cycle: no recurrence in the seed orbit");

  // section anchor: point of maximal x on the tail, normal along the flow
  std::size_t imax = tail_start;
  for (std::size_t i = tail_start; i < seed.states.size(); ++i)
    if (seed.states[i].x > seed.states[imax].x) imax = i;
  Vec4 anchor = seed.states[imax].array();
  Vec4 f_anchor;
  field4(p, anchor, f_anchor);
  const double fn = norm4(f_anchor);
  if (fn < 1e-12)
    throw std::runtime_error("find_limit_cycle: no recurrence (anchor is a fixed point)");
  Vec4 nrm = f_anchor;
  for (auto& v : nrm) v /= fn;

  // Poincare returns: positive-direction crossings of <nrm, y - anchor> = 0
  const double t_tail = seed.times.back() - seed.times[tail_start];
  const double t_max = std::max(4.0 * t_tail, 50.0);
  std::vector<double> crossings;
  {
    Vec4 y = anchor;
    auto rhs = [&p](double, const Vec4& s, Vec4& d) { field4(p, s, d); };
    double g_prev = 0.0;
    bool have_prev = false;
    detail::dopri5<4>(rhs, 0.0, t_max, y, stepper_opts(opts.integ),
                      [&](double t_prev, double t_new, const Vec4& s,
                          const detail::DenseSegment<4>& seg) {
                        auto gval = [&](const Vec4& q) {
                          double g = 0.0;
                          for (int i = 0; i < 4; ++i)
                            g += nrm[static_cast<std::size_t>(i)] *
                                 (q[static_cast<std::size_t>(i)] - anchor[static_cast<std::size_t>(i)]);
                          return g;
                        };
                        const double g_new = gval(s);
                        if (have_prev && g_prev < 0.0 && g_new >= 0.0 && t_prev > 1e-8) {
                          double a = t_prev, bnd = t_new, ga = g_prev;
                          for (int k = 0; k < 80; ++k) {
                            double mid = 0.5 * (a + bnd);
                            double gm = gval(seg.eval(mid));
                            if ((ga < 0.0) == (gm < 0.0)) {
                              a = mid;
                              ga = gm;
                            } else {
                              bnd = mid;
                            }
                          }
                          crossings.push_back(0.5 * (a + bnd));
                        }
                        g_prev = g_new;
                        have_prev = true;
                        return crossings.size() < 6;
                      });
  }
  if (crossings.empty())
    throw std::runtime_error("find_limit_cycle: no recurrence (no Poincare return)");
  double T0 = crossings[0];
  if (crossings.size() >= 2) {
    std::vector<double> gaps;
    for (std::size_t i = 1; i < crossings.size(); ++i)
      gaps.push_back(crossings[i] - crossings[i - 1]);
    double mean = 0.0;
    for (double g : gaps) mean += g;
    mean /= static_cast<double>(gaps.size());
    // prefer the gap estimate when the first return cut the section early
    if (std::abs(mean - T0) > 0.25 * T0) T0 = mean;
  }

  const int m = std::max(1, opts.segments);
  std::vector<Vec4> nodes = nodes_along_flow(p, anchor, T0, m, opts.integ);
  MsOutcome so = ms_newton(p, nodes, T0, anchor, f_anchor, opts.max_newton, opts.shooting_tol,
                           opts.integ);
  if (!so.converged && so.nodes.empty()) {
    so.nodes = nodes;
    so.T = T0;
    MsEval e = ms_evaluate(p, nullptr, nodes, T0, opts.integ);
    if (e.ok) {
      so.M = ms_monodromy(e);
      so.comp_min = e.comp_min;
      so.comp_max = e.comp_max;
      so.residual = ms_residual_norm(nodes, e);
    }
  }
  return build_cycle(p, so, opts.n_samples, opts.integ);
}

CycleBranch continue_cycles(const ModelParams& p0, const std::string& param_name,
                            const Cycle& start, std::pair<double, double> range,
                            const ContinuationOptions& opts) {
  p0.validate();
  CycleBranch branch;
  branch.param_name = param_name;
  const double T_ref = std::max(start.period, 1e-6);
  const int m = std::max(1, opts.segments);
  const int nU = 4 * m + 2;  // nodes, T, par
  const int nF = 4 * m + 1;  // matching + phase

  auto params_at = [&](double par) {
    ModelParams q = p0;
    set_param(q, param_name, par);
    return q;
  };

  // state vector layout helpers
  struct U {
    std::vector<Vec4> nodes;
    double T;
    double par;
  };
  U cur;
  cur.T = start.period;
  cur.par = std::isfinite(start.param_value) ? start.param_value : get_param(p0, param_name);
  if (static_cast<int>(start.shooting_nodes.size()) == m) {
    for (const auto& s : start.shooting_nodes) cur.nodes.push_back(s.array());
  } else if (!start.samples.empty()) {
    // resample nodes from the stored cycle samples at k T / m
    for (int k = 0; k < m; ++k) {
      const double tk = start.period * k / m;
      std::size_t jbest = 0;
      double dbest = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < start.sample_times.size(); ++j) {
        const double d = std::abs(start.sample_times[j] - tk);
        if (d < dbest) {
          dbest = d;
          jbest = j;
        }
      }
      cur.nodes.push_back(start.samples[jbest].array());
    }
  } else {
    cur.nodes = nodes_along_flow(params_at(cur.par), start.anchor.array(), start.period, m,
                                 opts.integ);
  }

  Vec4 anchor_ref = cur.nodes[0];
  Vec4 f_ref;
  field4(params_at(cur.par), cur.nodes[0], f_ref);

  auto wdot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (int i = 0; i < 4 * m; ++i) s += a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
    s += (a[static_cast<std::size_t>(4 * m)] / T_ref) * (b[static_cast<std::size_t>(4 * m)] / T_ref);
    s += opts.param_weight * a[static_cast<std::size_t>(4 * m + 1)] * b[static_cast<std::size_t>(4 * m + 1)];
    return s;
  };

  struct Eval {
    MsEval ms;
    std::vector<double> F;  // nF
    bool ok = false;
  };
  auto evaluate = [&](const U& s) {
    Eval e;
    ModelParams q = params_at(s.par);
    e.ms = ms_evaluate(q, &param_name, s.nodes, s.T, opts.integ);
    if (!e.ms.ok) return e;
    e.F.assign(static_cast<std::size_t>(nF), 0.0);
    for (int k = 0; k < m; ++k) {
      const int kn = (k + 1) % m;
      for (int i = 0; i < 4; ++i)
        e.F[static_cast<std::size_t>(4 * k + i)] =
            e.ms.ends[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] -
            s.nodes[static_cast<std::size_t>(kn)][static_cast<std::size_t>(i)];
    }
    double phase = 0.0;
    for (int i = 0; i < 4; ++i)
      phase += f_ref[static_cast<std::size_t>(i)] *
               (s.nodes[0][static_cast<std::size_t>(i)] - anchor_ref[static_cast<std::size_t>(i)]);
    e.F[static_cast<std::size_t>(nF - 1)] = phase;
    e.ok = true;
    return e;
  };

  // rows of the (nF x nU) Jacobian packed into a dense matrix
  auto fill_jacobian = [&](const U& s, const Eval& e, std::vector<double>& A, int lda) {
    for (int k = 0; k < m; ++k) {
      const int kn = (k + 1) % m;
      for (int i = 0; i < 4; ++i) {
        const int row = 4 * k + i;
        for (int j = 0; j < 4; ++j)
          A[static_cast<std::size_t>(row) * lda + (4 * k + j)] =
              e.ms.Mk[static_cast<std::size_t>(k)](i, j);
        A[static_cast<std::size_t>(row) * lda + (4 * kn + i)] += -1.0;
        A[static_cast<std::size_t>(row) * lda + (4 * m)] =
            e.ms.fend[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] / m;
        A[static_cast<std::size_t>(row) * lda + (4 * m + 1)] =
            e.ms.xik[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
      }
    }
    for (int j = 0; j < 4; ++j)
      A[static_cast<std::size_t>(nF - 1) * lda + j] = f_ref[static_cast<std::size_t>(j)];
    (void)s;
  };

  auto tangent_of = [&](const U& s, const Eval& e, const std::vector<double>& t_prev,
                        std::vector<double>& t_out) {
    std::vector<double> A(static_cast<std::size_t>(nU) * nU, 0.0),
        rhs(static_cast<std::size_t>(nU), 0.0);
    fill_jacobian(s, e, A, nU);
    for (int j = 0; j < 4 * m; ++j)
      A[static_cast<std::size_t>(nU - 1) * nU + j] = t_prev[static_cast<std::size_t>(j)];
    A[static_cast<std::size_t>(nU - 1) * nU + 4 * m] =
        t_prev[static_cast<std::size_t>(4 * m)] / (T_ref * T_ref);
    A[static_cast<std::size_t>(nU - 1) * nU + 4 * m + 1] =
        opts.param_weight * t_prev[static_cast<std::size_t>(4 * m + 1)];
    rhs[static_cast<std::size_t>(nU - 1)] = 1.0;
    if (!solve_real(nU, A, rhs)) return false;
    const double nrm = std::sqrt(wdot(rhs, rhs));
    if (!(nrm > 0.0) || !std::isfinite(nrm)) return false;
    for (auto& v : rhs) v /= nrm;
    t_out = rhs;
    return true;
  };

  auto apply_delta = [&](U s, const std::vector<double>& d, double scale) {
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < 4; ++i)
        s.nodes[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] +=
            scale * d[static_cast<std::size_t>(4 * k + i)];
    s.T += scale * d[static_cast<std::size_t>(4 * m)];
    s.par += scale * d[static_cast<std::size_t>(4 * m + 1)];
    return s;
  };

  auto correct = [&](U s, const std::vector<double>& t, const U& pred,
                     Eval& e_out) -> std::optional<U> {
    double prev_fmax = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opts.max_newton; ++it) {
      Eval e = evaluate(s);
      if (!e.ok) return std::nullopt;
      std::vector<double> dU(static_cast<std::size_t>(nU), 0.0);
      for (int k = 0; k < m; ++k)
        for (int i = 0; i < 4; ++i)
          dU[static_cast<std::size_t>(4 * k + i)] =
              s.nodes[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] -
              pred.nodes[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
      dU[static_cast<std::size_t>(4 * m)] = s.T - pred.T;
      dU[static_cast<std::size_t>(4 * m + 1)] = s.par - pred.par;
      const double arc = wdot(t, dU);
      double fmax = std::abs(arc);
      for (double v : e.F) fmax = std::max(fmax, std::abs(v));
      if (fmax <= opts.newton_tol) {
        e_out = e;
        return s;
      }
      // stagnation below the integrator noise floor still counts as converged
      if (it >= 2 && fmax <= 50.0 * (opts.integ.abs_tol + opts.integ.rel_tol) &&
          fmax >= 0.25 * prev_fmax) {
        e_out = e;
        return s;
      }
      if (it >= 3 && fmax > 0.9 * prev_fmax && fmax > 1e-4) return std::nullopt;  // not contracting
      prev_fmax = fmax;
      std::vector<double> A(static_cast<std::size_t>(nU) * nU, 0.0),
          rhs(static_cast<std::size_t>(nU), 0.0);
      fill_jacobian(s, e, A, nU);
      for (int i = 0; i < nF; ++i) rhs[static_cast<std::size_t>(i)] = -e.F[static_cast<std::size_t>(i)];
      for (int j = 0; j < 4 * m; ++j)
        A[static_cast<std::size_t>(nU - 1) * nU + j] = t[static_cast<std::size_t>(j)];
      A[static_cast<std::size_t>(nU - 1) * nU + 4 * m] = t[static_cast<std::size_t>(4 * m)] / (T_ref * T_ref);
      A[static_cast<std::size_t>(nU - 1) * nU + 4 * m + 1] =
          opts.param_weight * t[static_cast<std::size_t>(4 * m + 1)];
      rhs[static_cast<std::size_t>(nU - 1)] = -arc;
      if (!solve_real(nU, A, rhs)) return std::nullopt;
      s = apply_delta(std::move(s), rhs, 1.0);
      if (!(s.T > 0.0) || !std::isfinite(s.T) || !std::isfinite(s.par)) return std::nullopt;
    }
    return std::nullopt;
  };

  auto push_point = [&](const U& s, const Eval& e) {
    CycleBranchPoint bp;
    bp.param = s.par;
    bp.period = s.T;
    bp.anchor = State::from(s.nodes[0]);
    bp.comp_min = State::from(e.ms.comp_min);
    bp.comp_max = State::from(e.ms.comp_max);
    bp.stable = cycle_stable(floquet_of(ms_monodromy(e.ms)));
    branch.points.push_back(bp);
  };

  auto amplitude_of = [&](const Eval& e) {
    double amp = 0.0;
    for (int i = 0; i < 4; ++i)
      amp = std::max(amp, e.ms.comp_max[static_cast<std::size_t>(i)] -
                              e.ms.comp_min[static_cast<std::size_t>(i)]);
    return amp;
  };

  Eval e0 = evaluate(cur);
  if (!e0.ok) {
    branch.termination = "initial evaluation failed";
    return branch;
  }
  std::vector<double> t_prev(static_cast<std::size_t>(nU), 0.0);
  t_prev[static_cast<std::size_t>(4 * m + 1)] = opts.initial_param_direction >= 0.0 ? 1.0 : -1.0;
  std::vector<double> t_cur;
  if (!tangent_of(cur, e0, t_prev, t_cur)) {
    branch.termination = "singular tangent at start";
    return branch;
  }
  push_point(cur, e0);

  double ds = opts.ds0;
  int halvings = 0;
  for (int step = 0; step < opts.max_steps; ++step) {
    U pred = apply_delta(cur, t_cur, ds);
    Eval e_new;
    auto res = correct(pred, t_cur, pred, e_new);
    if (!res) {
      ds *= 0.5;
      ++halvings;
      if (halvings > 8 || ds < opts.ds_min) {
        branch.termination = "corrector failed after step halvings";
        return branch;
      }
      continue;
    }
    halvings = 0;
    U nxt = *res;
    std::vector<double> t_new;
    if (!tangent_of(nxt, e_new, t_cur, t_new)) {
      branch.termination = "singular tangent";
      return branch;
    }

    const double tp_old = t_cur[static_cast<std::size_t>(4 * m + 1)];
    const double tp_new = t_new[static_cast<std::size_t>(4 * m + 1)];
    if (tp_old * tp_new < 0.0) {
      // LPC inside (cur, nxt): bisect along arclength
      U A = cur, B = nxt;
      std::vector<double> tA = t_cur, tB = t_new;
      double seg = ds;
      for (int it = 0; it < 60 && std::abs(B.par - A.par) > 1e-9 && seg > opts.ds_min; ++it) {
        seg *= 0.5;
        U mid_pred = apply_delta(A, tA, seg);
        Eval em;
        auto rm = correct(mid_pred, tA, mid_pred, em);
        if (!rm) break;
        std::vector<double> tm;
        if (!tangent_of(*rm, em, tA, tm)) break;
        if (tA[static_cast<std::size_t>(4 * m + 1)] * tm[static_cast<std::size_t>(4 * m + 1)] <
            0.0) {
          B = *rm;
          tB = tm;
        } else {
          A = *rm;
          tA = tm;
        }
      }
      const double fold_par = std::abs(tA[static_cast<std::size_t>(4 * m + 1)]) <
                                      std::abs(tB[static_cast<std::size_t>(4 * m + 1)])
                                  ? A.par
                                  : B.par;
      branch.folds.push_back(fold_par);
      branch.limits.push_back({"tangent_fold", fold_par});
    }

    cur = nxt;
    t_cur = t_new;
    push_point(cur, e_new);
    anchor_ref = cur.nodes[0];
    field4(params_at(cur.par), cur.nodes[0], f_ref);

    if (amplitude_of(e_new) < opts.min_amplitude) {
      branch.termination = "amplitude below threshold (Hopf end)";
      branch.limits.push_back({"hopf_end", cur.par});
      return branch;
    }
    if (cur.T > opts.period_blowup_factor * T_ref) {
      branch.termination = "period blowup (near-homoclinic end)";
      branch.limits.push_back({"period_blowup", cur.par});
      return branch;
    }
    if (cur.par < range.first || cur.par > range.second) {
      branch.termination = "parameter range edge";
      return branch;
    }
    ds = std::min(ds * 1.3, opts.ds_max);
  }
  branch.termination = "max continuation steps";
  return branch;
}

namespace {

// Hessian bilinear form of the (quadratic) vector field; exact.
std::array<std::complex<double>, 4> bilinear_B(const ModelParams& p,
                                               const std::array<std::complex<double>, 4>& u,
                                               const std::array<std::complex<double>, 4>& w) {
  using C = std::complex<double>;
  const C ux = u[0], uy = u[1], uv = u[2], uz = u[3];
  const C wx = w[0], wy = w[1], wv = w[2], wz = w[3];
  std::array<C, 4> out{};
  out[0] = -2.0 * p.lambda / p.K * ux * wx - p.lambda / p.K * (ux * wy + uy * wx) -
           p.beta * (ux * wv + uv * wx);
  out[1] = p.beta * (ux * wv + uv * wx) - p.beta_y * (uy * wz + uz * wy);
  out[2] = -p.beta * (ux * wv + uv * wx) - p.beta_v * (uv * wz + uz * wv);
  out[3] = p.beta_z * (uy * wz + uz * wy);
  if (p.epsilon == 1) out[3] += -2.0 * p.c * uz * wz;
  return out;
}

}  // namespace

double first_lyapunov_coefficient(const ModelParams& p0, double hopf_param_value,
                                  const Equilibrium& eq, const std::string& param_name) {
  using C = std::complex<double>;
  ModelParams p = p0;
  set_param(p, param_name, hopf_param_value);
  p.validate();

  SquareMatrix A = jacobian(p, eq.point);
  auto ev = eigenvalues(A);
  C lam{};
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : ev) {
    if (e.imag() <= 1e-12) continue;
    if (std::abs(e.real()) < best) {
      best = std::abs(e.real());
      lam = e;
    }
  }
  if (!(lam.imag() > 0.0))
    throw std::invalid_argument("first_lyapunov_coefficient: no complex pair at the equilibrium");
  const double omega = lam.imag();
  if (std::abs(lam.real()) > 1e-5 * std::max(1.0, omega))
    throw std::invalid_argument(
        "first_lyapunov_coefficient: eigenvalue pair is not pure imaginary within tolerance");

  // q: A q = i omega q, normalized <q,q> = 1
  auto q = eigenvector(A, C(0.0, omega));
  {
    double n2 = 0.0;
    for (int i = 0; i < 4; ++i) n2 += std::norm(q[static_cast<std::size_t>(i)]);
    const double n = std::sqrt(n2);
    for (auto& v : q) v /= n;
  }
  // adjoint: A^T pvec = -i omega pvec, normalized <pvec,q> = 1
  SquareMatrix At(4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) At(i, j) = A(j, i);
  auto pv = eigenvector(At, C(0.0, -omega));
  {
    C d = 0.0;
    for (int i = 0; i < 4; ++i)
      d += std::conj(pv[static_cast<std::size_t>(i)]) * q[static_cast<std::size_t>(i)];
    if (std::abs(d) < 1e-14)
      throw std::runtime_error("first_lyapunov_coefficient: degenerate eigenvector pairing");
    for (auto& v : pv) v /= std::conj(d);
  }

  auto conj4 = [](const std::array<C, 4>& a) {
    std::array<C, 4> r{};
    for (int i = 0; i < 4; ++i) r[static_cast<std::size_t>(i)] = std::conj(a[static_cast<std::size_t>(i)]);
    return r;
  };
  auto qbar = conj4(q);

  // h11 = A^{-1} B(q, qbar)
  auto Bqqbar = bilinear_B(p, q, qbar);
  std::array<C, 16> As{};
  std::array<C, 4> h11 = Bqqbar;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) As[static_cast<std::size_t>(i * 4 + j)] = A(i, j);
  if (!solve_complex(4, As, h11))
    throw std::runtime_error("first_lyapunov_coefficient: singular A (zero eigenvalue at Hopf?)");

  // h20 = (2 i omega I - A)^{-1} B(q, q)
  auto Bqq = bilinear_B(p, q, q);
  std::array<C, 4> h20 = Bqq;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      As[static_cast<std::size_t>(i * 4 + j)] = (i == j ? C(0.0, 2.0 * omega) : C(0.0, 0.0)) - A(i, j);
  if (!solve_complex(4, As, h20))
    throw std::runtime_error("first_lyapunov_coefficient: 2 i omega resonance");

  auto inner = [](const std::array<C, 4>& a, const std::array<C, 4>& b) {
    C s = 0.0;
    for (int i = 0; i < 4; ++i)
      s += std::conj(a[static_cast<std::size_t>(i)]) * b[static_cast<std::size_t>(i)];
    return s;
  };
  const C term2 = -2.0 * inner(pv, bilinear_B(p, q, h11));
  const C term3 = inner(pv, bilinear_B(p, qbar, h20));
  // the cubic term <p, C(q,q,qbar)> vanishes: the field is quadratic
  return (1.0 / (2.0 * omega)) * (term2 + term3).real();
}

Cycle cycle_near_hopf(const ModelParams& p0, const std::string& param_name, double hopf_value,
                      double param_offset, const FindCycleOptions& opts) {
  p0.validate();
  ModelParams pH = p0;
  set_param(pH, param_name, hopf_value);

  // the Hopf equilibrium: the candidate whose pair is closest to the axis
  auto eqs = interior_equilibria(pH);
  {
    auto bd = boundary_equilibria(pH);
    for (const auto& e : bd)
      if (e.tag == EqTag::Estar && e.feasible) eqs.push_back(e);
  }
  if (eqs.empty()) throw std::runtime_error("cycle_near_hopf: no candidate equilibrium");
  const Equilibrium* hopf_eq = nullptr;
  double best = std::numeric_limits<double>::infinity();
  double omega = 0.0;
  for (const auto& e : eqs) {
    auto ev = eigenvalues(jacobian(pH, e.point));
    for (const auto& lam : ev) {
      if (lam.imag() <= 1e-9) continue;
      if (std::abs(lam.real()) < best) {
        best = std::abs(lam.real());
        hopf_eq = &e;
        omega = lam.imag();
      }
    }
  }
  if (!hopf_eq || best > 1e-4 * std::max(1.0, omega))
    throw std::runtime_error("cycle_near_hopf: no near-imaginary pair at the given parameter");

  const double l1 = first_lyapunov_coefficient(p0, hopf_value, *hopf_eq, param_name);
  const double re_c1 = l1 * omega;

  // slope of the pair real part in the parameter, on the same branch
  auto pair_re_at = [&](double val) {
    ModelParams q = p0;
    set_param(q, param_name, val);
    auto ie = interior_equilibria(q);
    double bestv = std::numeric_limits<double>::infinity();
    double re = 0.0;
    for (const auto& e : ie) {
      if (distance(e.point, hopf_eq->point) > 0.25 * std::max(1.0, norm(hopf_eq->point)))
        continue;
      auto ev = eigenvalues(jacobian(q, e.point));
      for (const auto& lam : ev)
        if (lam.imag() > 1e-9 && std::abs(lam - std::complex<double>(0.0, omega)) < bestv) {
          bestv = std::abs(lam - std::complex<double>(0.0, omega));
          re = lam.real();
        }
    }
    return re;
  };
  const double hfd = std::max(1e-6, 1e-4 * std::abs(param_offset));
  const double slope = (pair_re_at(hopf_value + hfd) - pair_re_at(hopf_value - hfd)) / (2.0 * hfd);

  const double par = hopf_value + param_offset;
  const double rho2 = -(slope * param_offset) / re_c1;
  if (!(rho2 > 0.0))
    throw std::runtime_error("cycle_near_hopf: no cycle on the requested side of the Hopf point");
  const double rho = std::sqrt(rho2);

  ModelParams pside = p0;
  set_param(pside, param_name, par);
  auto ie = interior_equilibria(pside);
  const Equilibrium* eq_side = nullptr;
  double bestd = std::numeric_limits<double>::infinity();
  for (const auto& e : ie) {
    double d = distance(e.point, hopf_eq->point);
    if (d < bestd) {
      bestd = d;
      eq_side = &e;
    }
  }
  if (!eq_side) throw std::runtime_error("cycle_near_hopf: equilibrium lost at offset parameter");

  SquareMatrix A = jacobian(pside, eq_side->point);
  auto evs = eigenvalues(A);
  std::complex<double> lam{};
  double bq = std::numeric_limits<double>::infinity();
  for (const auto& e : evs)
    if (e.imag() > 1e-9 && std::abs(e - std::complex<double>(0.0, omega)) < bq) {
      bq = std::abs(e - std::complex<double>(0.0, omega));
      lam = e;
    }
  auto q = eigenvector(A, lam);
  {
    double n2 = 0.0;
    for (const auto& v : q) n2 += std::norm(v);
    const double n = std::sqrt(n2);
    for (auto& v : q) v /= n;
  }

  // nodes on the linearized ellipse u_k = eq + 2 rho Re(q e^{i 2 pi k / m})
  const int m = std::max(4, opts.segments);
  const double T0 = kTwoPi / lam.imag();
  std::vector<Vec4> nodes;
  for (int k = 0; k < m; ++k) {
    const std::complex<double> phase =
        std::exp(std::complex<double>(0.0, kTwoPi * k / static_cast<double>(m)));
    Vec4 u = eq_side->point.array();
    for (int i = 0; i < 4; ++i)
      u[static_cast<std::size_t>(i)] += 2.0 * rho * (q[static_cast<std::size_t>(i)] * phase).real();
    nodes.push_back(u);
  }
  Vec4 f0;
  field4(pside, nodes[0], f0);
  MsOutcome so = ms_newton(pside, nodes, T0, nodes[0], f0, opts.max_newton, opts.shooting_tol,
                           opts.integ);
  if (!so.converged)
    throw std::runtime_error("cycle_near_hopf: shooting did not converge from the normal-form seed");
  Cycle cyc = build_cycle(pside, so, opts.n_samples, opts.integ);
  cyc.param_value = par;
  return cyc;
}

LyapunovEstimate largest_lyapunov_exponent(const ModelParams& p, const State& init,
                                           double horizon, const LyapunovOptions& opts) {
  p.validate();
  if (!(horizon > opts.transient))
    throw std::invalid_argument("largest_lyapunov_exponent: horizon must exceed the transient");
  using V8 = std::array<double, 8>;
  V8 y{};
  {
    auto a = init.array();
    for (int i = 0; i < 4; ++i) y[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)];
  }
  // fixed, reproducible tangent direction
  y[4] = 0.5377;
  y[5] = -0.1834;
  y[6] = 0.3221;
  y[7] = 0.7615;
  {
    double n = 0.0;
    for (int i = 4; i < 8; ++i) n += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    n = std::sqrt(n);
    for (int i = 4; i < 8; ++i) y[static_cast<std::size_t>(i)] /= n;
  }
  auto rhs = [&p](double, const V8& s, V8& d) {
    Vec4 x{s[0], s[1], s[2], s[3]};
    Vec4 dx;
    field4(p, x, dx);
    double J[4][4];
    jac4(p, x, J);
    for (int i = 0; i < 4; ++i) d[static_cast<std::size_t>(i)] = dx[static_cast<std::size_t>(i)];
    for (int i = 0; i < 4; ++i) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += J[i][k] * s[static_cast<std::size_t>(4 + k)];
      d[static_cast<std::size_t>(4 + i)] = acc;
    }
  };
  DomainBounds db = domain_bounds(p);
  const double escape_cap =
      100.0 * (db.xy_cap + (std::isfinite(db.v_cap) ? db.v_cap : 0.0) +
               (std::isfinite(db.z_cap) ? db.z_cap : 0.0) + 1.0);

  LyapunovEstimate est;
  double t = 0.0;
  double logsum = 0.0;
  const int n_chunks = static_cast<int>(std::ceil(horizon / opts.renorm_dt));
  const int trace_every = std::max(1, n_chunks / std::max(1, opts.trace_points));
  detail::StepperOptions sopts = stepper_opts(opts.integ);
  auto project = [](V8& s) {
    bool changed = false;
    for (int i : {1, 2}) {
      double& v = s[static_cast<std::size_t>(i)];
      if (v < 0.0 && v > -1e-6) {
        v = 0.0;
        changed = true;
      }
    }
    return changed;
  };
  for (int k = 0; k < n_chunks; ++k) {
    const double t_next = std::min(horizon, (k + 1) * opts.renorm_dt);
    auto status = detail::dopri5<8>(rhs, t, t_next, y, sopts,
                                    [](double, double, const V8&, const detail::DenseSegment<8>&) {
                                      return true;
                                    },
                                    project);
    if (status != detail::IntegrateStatus::ok)
      throw std::runtime_error("largest_lyapunov_exponent: integration failed (" +
                               detail::status_text(status) + ")");
    t = t_next;
    double sn = 0.0;
    for (int i = 0; i < 4; ++i) sn += std::abs(y[static_cast<std::size_t>(i)]);
    if (!std::isfinite(sn) || sn > escape_cap)
      throw std::runtime_error("largest_lyapunov_exponent: orbit escaped the invariant region");
    double n = 0.0;
    for (int i = 4; i < 8; ++i) n += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    n = std::sqrt(n);
    if (!(n > 0.0) || !std::isfinite(n))
      throw std::runtime_error("largest_lyapunov_exponent: tangent vector degenerated");
    if (t > opts.transient) logsum += std::log(n);
    for (int i = 4; i < 8; ++i) y[static_cast<std::size_t>(i)] /= n;
    if (t > opts.transient && (k % trace_every == 0 || k + 1 == n_chunks)) {
      est.trace.emplace_back(t, logsum / (t - opts.transient));
    }
  }
  est.value = logsum / (horizon - opts.transient);
  return est;
}

}  // namespace viro

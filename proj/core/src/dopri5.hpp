#pragma once

// Dormand-Prince 5(4) embedded pair with the standard quartic dense output
// (Hairer-Norsett-Wanner coefficients). Header-local to the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>

namespace viro::detail {

struct StepperOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double initial_step = 1e-4;
  double max_step = 0.0;  // 0 = unlimited
  long max_steps = 200000000;
};

enum class IntegrateStatus { ok, step_underflow, max_steps, stopped_by_observer };

inline std::string status_text(IntegrateStatus s) {
  switch (s) {
    case IntegrateStatus::ok: return "ok";
    case IntegrateStatus::step_underflow: return "step size underflow";
    case IntegrateStatus::max_steps: return "max step count exceeded";
    case IntegrateStatus::stopped_by_observer: return "stopped by observer";
  }
  return "?";
}

template <std::size_t N>
struct DenseSegment {
  double t0 = 0.0, h = 0.0;
  std::array<double, N> r1{}, r2{}, r3{}, r4{}, r5{};

  std::array<double, N> eval(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    std::array<double, N> y{};
    for (std::size_t i = 0; i < N; ++i)
      y[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
    return y;
  }
};

struct NoProjection {
  template <std::size_t N>
  bool operator()(std::array<double, N>&) const {
    return false;
  }
};

// Observer: bool(double t_prev, double t_new, const std::array<double,N>& y_new,
//                const DenseSegment<N>& seg) -- return false to stop.
// Projector: bool(std::array<double,N>& y) applied after acceptance; returning
// true invalidates the FSAL stage (used to pin noise-level boundary
// violations back onto an invariant set).
template <std::size_t N, class RHS, class Observer, class Projector = NoProjection>
IntegrateStatus dopri5(RHS&& rhs, double t0, double t1, std::array<double, N>& y,
                       const StepperOptions& opt, Observer&& observer,
                       Projector&& project = Projector{}) {
  using Vec = std::array<double, N>;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

  if (t1 == t0) return IntegrateStatus::ok;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  double t = t0;
  double h = dir * std::abs(opt.initial_step);
  const double hmax = opt.max_step > 0.0 ? opt.max_step : std::abs(t1 - t0);

  Vec k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
  rhs(t, y, k1);
  bool first_same_as_last = false;

  for (long step = 0; step < opt.max_steps; ++step) {
    if ((t - t1) * dir >= 0.0) return IntegrateStatus::ok;
    if (std::abs(h) > hmax) h = dir * hmax;
    if ((t + h - t1) * dir > 0.0) h = t1 - t;
    if (std::abs(h) <= 1e-14 * std::max(1.0, std::abs(t))) return IntegrateStatus::step_underflow;

    if (first_same_as_last) k1 = k7;

    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(t + h, ytmp, k6);
    for (std::size_t i = 0; i < N; ++i)
      ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    rhs(t + h, ynew, k7);

    double err = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < N; ++i) {
      const double ei =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (ei / sc) * (ei / sc);
      if (!std::isfinite(ynew[i])) finite = false;
    }
    err = std::sqrt(err / static_cast<double>(N));

    if (finite && err <= 1.0) {
      DenseSegment<N> seg;
      seg.t0 = t;
      seg.h = h;
      for (std::size_t i = 0; i < N; ++i) {
        const double ydiff = ynew[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        seg.r1[i] = y[i];
        seg.r2[i] = ydiff;
        seg.r3[i] = bspl;
        seg.r4[i] = ydiff - h * k7[i] - bspl;
        seg.r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                         d7 * k7[i]);
      }
      const double t_new = t + h;
      y = ynew;
      t = t_new;
      first_same_as_last = true;
      if (project(y)) {
        first_same_as_last = false;
        rhs(t, y, k1);
      }
      if (!observer(seg.t0, t_new, y, seg)) return IntegrateStatus::stopped_by_observer;
      const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h *= std::clamp(fac, 0.2, 5.0);
    } else {
      // k1 still matches (t, y); only the step size changes
      const double fac = (finite && err > 0.0) ? std::max(0.1, 0.9 * std::pow(err, -0.2)) : 0.1;
      h *= fac;
      first_same_as_last = false;
    }
  }
  return IntegrateStatus::max_steps;
}

}  // namespace viro::detail

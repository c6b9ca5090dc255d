#pragma once

#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "virodyn/equilibria.hpp"
#include "virodyn/model.hpp"
#include "virodyn/smallmat.hpp"

namespace viro {

struct IntegratorOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double initial_step = 1e-4;
  double max_step = 0.0;  // 0 = unlimited
  long max_steps = 200000000;
  double sample_dt = 0.0;  // 0 = record every accepted step
};

struct OrbitStats {
  State min{1e300, 1e300, 1e300, 1e300};
  State max{-1e300, -1e300, -1e300, -1e300};
  int domain_violations = 0;
};

struct Orbit {
  std::vector<double> times;
  std::vector<State> states;
  OrbitStats stats;
  bool complete = true;
  std::string diagnostic;
};

/// Adaptive Dormand-Prince 5(4) with dense-output sampling. Backward time
/// (t1 < t0) is allowed. On step-size underflow the partial orbit is returned
/// with complete = false and a diagnostic.
Orbit integrate(const ModelParams& p, const State& init, double t0, double t1,
                const IntegratorOptions& opts = {});

struct Cycle {
  State anchor;
  double period = 0.0;
  std::vector<double> sample_times;  // one period from 0
  std::vector<State> samples;
  std::vector<State> shooting_nodes;  // converged multiple-shooting nodes
  SquareMatrix monodromy{4};
  std::vector<std::complex<double>> floquet;
  bool stable = false;
  bool refined = false;  // false when Newton shooting did not converge
  double residual = 0.0;
  double amplitude = 0.0;  // max over components of (max - min) along the cycle
  // parameter value the cycle was computed at, when produced by an operation
  // that varies a parameter (NaN otherwise)
  double param_value = std::numeric_limits<double>::quiet_NaN();
};

struct FindCycleOptions {
  IntegratorOptions integ{1e-11, 1e-10, 1e-4, 0.0, 200000000, 0.0};
  int max_newton = 50;
  double shooting_tol = 1e-9;
  double min_oscillation = 1e-6;  // below this the seed counts as non-recurrent
  int n_samples = 400;
  int segments = 1;  // multiple-shooting segments (unstable cycles need > 1)
};

/// Locate a periodic orbit from a seed orbit showing recurrence: Poincare
/// returns through the point of maximal x (section normal along the flow)
/// give the period estimate, single shooting refines (u, T), and the
/// monodromy matrix from the variational equations yields the Floquet
/// multipliers. Throws std::runtime_error("no recurrence") when the seed has
/// settled to a fixed point.
Cycle find_limit_cycle(const ModelParams& p, const Orbit& seed,
                       const FindCycleOptions& opts = {});

struct ContinuationOptions {
  IntegratorOptions integ{1e-10, 1e-9, 1e-4, 0.0, 200000000, 0.0};
  double ds0 = 0.05;
  double ds_min = 1e-7;
  double ds_max = 0.5;
  int max_steps = 4000;
  int max_newton = 8;
  double newton_tol = 1e-8;
  double min_amplitude = 1e-6;
  double param_weight = 1.0;
  double initial_param_direction = 1.0;  // sign of the first tangent's parameter component
  int segments = 10;  // multiple-shooting segments along the cycle
  double period_blowup_factor = 5.0;  // terminate when T exceeds this multiple of the start period
};

struct CycleBranchPoint {
  double param = 0.0;
  double period = 0.0;
  State anchor;
  State comp_min, comp_max;  // per-component extrema over the cycle
  bool stable = false;
};

/// A parameter value where the branch attains a vertical tangent in the
/// parameter. kind: "tangent_fold" (sign change of the tangent's parameter
/// component), "hopf_end" (amplitude collapse at the birth point),
/// "period_blowup" (near-homoclinic termination, the parameter saturates).
struct CycleBranchLimit {
  std::string kind;
  double param = 0.0;
};

struct CycleBranch {
  std::string param_name;
  std::vector<CycleBranchPoint> points;
  std::vector<double> folds;             // tangent-sign LPCs
  std::vector<CycleBranchLimit> limits;  // folds plus terminal vertical tangencies
  std::string termination;
};

/// Pseudo-arclength continuation of the shooting system in (state, period,
/// parameter). Records an LPC wherever the parameter component of the branch
/// tangent changes sign, bisecting the bracket down to ~1e-6 in the
/// parameter. Terminates at the range edges, on amplitude collapse (Hopf
/// end), or after repeated corrector failures.
CycleBranch continue_cycles(const ModelParams& p, const std::string& param_name,
                            const Cycle& start, std::pair<double, double> range,
                            const ContinuationOptions& opts = {});

/// Small cycle next to a Hopf point, seeded from the linearization
/// (eigenplane + normal-form radius) and corrected by shooting.
/// param_offset sets the distance from the Hopf parameter value; its sign
/// selects the side of the bifurcation.
Cycle cycle_near_hopf(const ModelParams& p, const std::string& param_name, double hopf_value,
                      double param_offset, const FindCycleOptions& opts = {});

/// First Lyapunov coefficient at a verified Hopf point via the projection
/// method with the eigenvector normalization <q,q> = 1, <p,q> = 1. The
/// vector field is quadratic, so the bilinear form is exact and the cubic
/// term vanishes. Positive value => subcritical side.
double first_lyapunov_coefficient(const ModelParams& p, double hopf_param_value,
                                  const Equilibrium& eq, const std::string& param_name = "b");

struct LyapunovOptions {
  IntegratorOptions integ{1e-10, 1e-8, 1e-4, 0.0, 200000000, 0.0};
  double renorm_dt = 1.0;
  double transient = 200.0;
  int trace_points = 64;
};

struct LyapunovEstimate {
  double value = 0.0;
  std::vector<std::pair<double, double>> trace;  // (t, running estimate)
};

/// Benettin tangent-vector estimate of the largest Lyapunov exponent.
/// Throws if the orbit leaves the invariant region by a wide margin.
LyapunovEstimate largest_lyapunov_exponent(const ModelParams& p, const State& init,
                                           double horizon, const LyapunovOptions& opts = {});

}  // namespace viro

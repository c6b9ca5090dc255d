#pragma once

#include <array>
#include <string>

#include "virodyn/smallmat.hpp"

namespace viro {

/// Rate constants of the four-compartment tumor-virus-immune model
///
///   x' = lambda x (1 - (x+y)/K) - beta x v
///   y' = beta x v - gamma y - beta_y y z
///   v' = b gamma y - beta x v - delta v - beta_v v z
///   z' = z (beta_z y - c z^epsilon),   epsilon in {0, 1}
///
/// beta_z is stored directly; rho = beta_z / beta_y is derived on demand.
struct ModelParams {
  double lambda = 0.0;  // tumor growth rate
  double K = 1.0;       // carrying capacity
  double beta = 0.0;    // infection rate
  double gamma = 1.0;   // lysis rate
  double b = 1.0;       // burst size
  double delta = 0.0;   // viral clearance
  double beta_y = 0.0;  // immune kill rate of infected cells
  double beta_v = 0.0;  // immune kill rate of virus
  double beta_z = 0.0;  // immune proliferation rate
  double c = 0.0;       // immune clearance
  int epsilon = 0;      // clearance exponent switch, 0 or 1

  double rho() const { return beta_z / beta_y; }

  /// Throws std::invalid_argument when an invariant is broken
  /// (K,beta,gamma,beta_z > 0, b >= 1, other rates >= 0, epsilon in {0,1}).
  void validate() const;
};

struct State {
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;
  double z = 0.0;

  std::array<double, 4> array() const { return {x, y, v, z}; }
  static State from(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }
};

double norm(const State& s);
double distance(const State& a, const State& b);

/// Caps of the positively invariant region Omega. Unbounded components are
/// +inf with `unbounded` set (delta = 0, c = 0, or beta_y = 0 with epsilon=0).
struct DomainBounds {
  double xy_cap = 0.0;  // x + y <= K
  double v_cap = 0.0;   // v <= b gamma K / delta
  double z_cap = 0.0;   // z <= zeta, case split on epsilon
  bool unbounded = false;
};

/// Right-hand side at a state. Throws on non-finite input.
State vector_field(const ModelParams& p, const State& s);

/// 4x4 Jacobian; for epsilon=1 the (4,4) entry is beta_z y - 2 c z
/// (equal to beta_z y at z=0).
SquareMatrix jacobian(const ModelParams& p, const State& s);

/// Parameters with the immune action removed (beta_y = beta_v = 0); the
/// (x,y,v) subsystem is then the classical three-compartment virus model and
/// the z = 0 hyperplane is invariant.
ModelParams reduce_3d(const ModelParams& p);

std::array<double, 3> vector_field_3d(const ModelParams& p, const std::array<double, 3>& s);
SquareMatrix jacobian_3d(const ModelParams& p, const std::array<double, 3>& s);

/// Result of normalizing to K = gamma = 1. States map as s = K * s_tilde and
/// times as t = t_tilde / gamma (so the original orbit at time t equals
/// state_scale times the rescaled orbit at time gamma * t).
struct Rescaled {
  ModelParams params;
  double state_scale = 1.0;  // = K
  double time_scale = 1.0;   // = gamma
};

Rescaled rescale(const ModelParams& p);

DomainBounds domain_bounds(const ModelParams& p);
bool in_domain(const ModelParams& p, const State& s, double tol = 0.0);

/// Flat `name = value` text form, one line per Table-2 key.
std::string params_to_kv(const ModelParams& p);
ModelParams params_from_kv(const std::string& text);

std::string params_to_json(const ModelParams& p);
ModelParams params_from_json(const std::string& text);

/// Assign a parameter by its serialized key ("lambda", "K", "beta", "gamma",
/// "b", "delta", "beta_y", "beta_v", "beta_z", "c", "epsilon").
void set_param(ModelParams& p, const std::string& name, double value);
double get_param(const ModelParams& p, const std::string& name);

}  // namespace viro

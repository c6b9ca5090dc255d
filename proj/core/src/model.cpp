#include "virodyn/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace viro {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite4(const State& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.v) && std::isfinite(s.z);
}

}  // namespace

void ModelParams::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("ModelParams: " + msg); };
  for (double v : {lambda, K, beta, gamma, b, delta, beta_y, beta_v, beta_z, c})
    if (!std::isfinite(v)) fail("non-finite parameter");
  if (K <= 0.0) fail("K must be > 0");
  if (beta <= 0.0) fail("beta must be > 0");
  if (gamma <= 0.0) fail("gamma must be > 0");
  if (b < 1.0) fail("b must be >= 1");
  if (beta_z <= 0.0) fail("beta_z must be > 0");
  if (lambda < 0.0 || delta < 0.0 || beta_y < 0.0 || beta_v < 0.0 || c < 0.0)
    fail("rates must be >= 0");
  if (epsilon != 0 && epsilon != 1) fail("epsilon must be 0 or 1");
}

double norm(const State& s) {
  return std::sqrt(s.x * s.x + s.y * s.y + s.v * s.v + s.z * s.z);
}

double distance(const State& a, const State& b) {
  return norm({a.x - b.x, a.y - b.y, a.v - b.v, a.z - b.z});
}

State vector_field(const ModelParams& p, const State& s) {
  if (!finite4(s)) throw std::invalid_argument("vector_field: non-finite state");
  const double zpow = p.epsilon == 0 ? 1.0 : s.z;
  return {
      p.lambda * s.x * (1.0 - (s.x + s.y) / p.K) - p.beta * s.x * s.v,
      p.beta * s.x * s.v - p.gamma * s.y - p.beta_y * s.y * s.z,
      p.b * p.gamma * s.y - p.beta * s.x * s.v - p.delta * s.v - p.beta_v * s.v * s.z,
      s.z * (p.beta_z * s.y - p.c * zpow),
  };
}

SquareMatrix jacobian(const ModelParams& p, const State& s) {
  if (!finite4(s)) throw std::invalid_argument("jacobian: non-finite state");
  SquareMatrix J(4);
  J(0, 0) = p.lambda - p.lambda * (2.0 * s.x + s.y) / p.K - p.beta * s.v;
  J(0, 1) = -p.lambda * s.x / p.K;
  J(0, 2) = -p.beta * s.x;
  J(0, 3) = 0.0;
  J(1, 0) = p.beta * s.v;
  J(1, 1) = -p.gamma - p.beta_y * s.z;
  J(1, 2) = p.beta * s.x;
  J(1, 3) = -p.beta_y * s.y;
  J(2, 0) = -p.beta * s.v;
  J(2, 1) = p.b * p.gamma;
  J(2, 2) = -p.delta - p.beta_v * s.z - p.beta * s.x;
  J(2, 3) = -p.beta_v * s.v;
  J(3, 0) = 0.0;
  J(3, 1) = p.beta_z * s.z;
  J(3, 2) = 0.0;
  J(3, 3) = p.epsilon == 0 ? (p.beta_z * s.y - p.c) : (p.beta_z * s.y - 2.0 * p.c * s.z);
  return J;
}

ModelParams reduce_3d(const ModelParams& p) {
  ModelParams r = p;
  r.beta_y = 0.0;
  r.beta_v = 0.0;
  return r;
}

std::array<double, 3> vector_field_3d(const ModelParams& p, const std::array<double, 3>& s) {
  State full{s[0], s[1], s[2], 0.0};
  State d = vector_field(reduce_3d(p), full);
  return {d.x, d.y, d.v};
}

SquareMatrix jacobian_3d(const ModelParams& p, const std::array<double, 3>& s) {
  SquareMatrix J4 = jacobian(reduce_3d(p), State{s[0], s[1], s[2], 0.0});
  return J4.minor_without(3);
}

Rescaled rescale(const ModelParams& p) {
  p.validate();
  Rescaled r;
  r.state_scale = p.K;
  r.time_scale = p.gamma;
  ModelParams q = p;
  q.K = 1.0;
  q.gamma = 1.0;
  q.lambda = p.lambda / p.gamma;
  q.beta = p.beta * p.K / p.gamma;
  q.delta = p.delta / p.gamma;
  q.beta_y = p.beta_y * p.K / p.gamma;
  q.beta_v = p.beta_v * p.K / p.gamma;
  q.beta_z = p.beta_z * p.K / p.gamma;
  q.c = p.c * (p.epsilon == 0 ? 1.0 : p.K) / p.gamma;
  r.params = q;
  return r;
}

DomainBounds domain_bounds(const ModelParams& p) {
  p.validate();
  DomainBounds d;
  d.xy_cap = p.K;
  if (p.delta > 0.0) {
    d.v_cap = p.b * p.gamma * p.K / p.delta;
  } else {
    d.v_cap = kInf;
    d.unbounded = true;
  }
  if (p.epsilon == 0) {
    // zeta = rho beta b gamma K^2 / (delta min{gamma, c}); written with the
    // beta_z form so beta_y = 0 degenerates to +inf rather than 0/0
    const double sigma = std::min(p.gamma, p.c);
    if (p.beta_y > 0.0 && p.delta > 0.0 && sigma > 0.0) {
      d.z_cap = (p.beta_z / p.beta_y) * p.beta * p.b * p.gamma * p.K * p.K / (p.delta * sigma);
    } else {
      d.z_cap = kInf;
      d.unbounded = true;
    }
  } else {
    if (p.c > 0.0) {
      d.z_cap = p.beta_z * p.K / p.c;
    } else {
      d.z_cap = kInf;
      d.unbounded = true;
    }
  }
  return d;
}

bool in_domain(const ModelParams& p, const State& s, double tol) {
  if (!finite4(s)) return false;
  DomainBounds d = domain_bounds(p);
  if (s.x < -tol || s.y < -tol || s.v < -tol || s.z < -tol) return false;
  if (s.x + s.y > d.xy_cap + tol) return false;
  if (s.v > d.v_cap + tol) return false;
  if (s.z > d.z_cap + tol) return false;
  return true;
}

namespace {

const char* kKeys[] = {"lambda", "K",      "beta",   "gamma",  "b", "delta",
                       "beta_y", "beta_v", "beta_z", "c",      "epsilon"};

}  // namespace

void set_param(ModelParams& p, const std::string& name, double value) {
  if (name == "lambda") p.lambda = value;
  else if (name == "K") p.K = value;
  else if (name == "beta") p.beta = value;
  else if (name == "gamma") p.gamma = value;
  else if (name == "b") p.b = value;
  else if (name == "delta") p.delta = value;
  else if (name == "beta_y") p.beta_y = value;
  else if (name == "beta_v") p.beta_v = value;
  else if (name == "beta_z") p.beta_z = value;
  else if (name == "c") p.c = value;
  else if (name == "epsilon") p.epsilon = static_cast<int>(value);
  else throw std::invalid_argument("unknown parameter key: " + name);
}

double get_param(const ModelParams& p, const std::string& name) {
  if (name == "lambda") return p.lambda;
  if (name == "K") return p.K;
  if (name == "beta") return p.beta;
  if (name == "gamma") return p.gamma;
  if (name == "b") return p.b;
  if (name == "delta") return p.delta;
  if (name == "beta_y") return p.beta_y;
  if (name == "beta_v") return p.beta_v;
  if (name == "beta_z") return p.beta_z;
  if (name == "c") return p.c;
  if (name == "epsilon") return static_cast<double>(p.epsilon);
  throw std::invalid_argument("unknown parameter key: " + name);
}

std::string params_to_kv(const ModelParams& p) {
  std::ostringstream os;
  os.precision(17);
  for (const char* k : kKeys) os << k << " = " << get_param(p, k) << "\n";
  return os.str();
}

ModelParams params_from_kv(const std::string& text) {
  ModelParams p;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      // skip blank lines and comments
      bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
      if (blank || line[line.find_first_not_of(" \t")] == '#') continue;
      throw std::invalid_argument("params_from_kv: malformed line: " + line);
    }
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    key = trim(key);
    val = trim(val);
    set_param(p, key, std::stod(val));
  }
  return p;
}

std::string params_to_json(const ModelParams& p) {
  nlohmann::ordered_json j;
  for (const char* k : kKeys) {
    if (std::string(k) == "epsilon") j[k] = p.epsilon;
    else j[k] = get_param(p, k);
  }
  return j.dump(2);
}

ModelParams params_from_json(const std::string& text) {
  ModelParams p;
  auto j = nlohmann::json::parse(text);
  for (auto it = j.begin(); it != j.end(); ++it) set_param(p, it.key(), it.value().get<double>());
  return p;
}

}  // namespace viro

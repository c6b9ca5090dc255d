#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "virodyn/model.hpp"
#include "virodyn/polyalg.hpp"

namespace viro {

enum class EqTag { E0, EK, Estar, EN, Interior };

/// Interior branches are named by position: ascending v for epsilon=0
/// (E_im below E_plus), ascending y for epsilon=1 (E_minus, E_im, E_plus).
enum class InteriorBranch { none, minus, im, plus };

struct Equilibrium {
  State point;
  EqTag tag = EqTag::E0;
  InteriorBranch branch = InteriorBranch::none;
  bool feasible = false;
  double residual = 0.0;
  std::string note;
};

std::string tag_name(EqTag tag);
std::string branch_name(InteriorBranch br);

/// R0 = beta K b / (beta K + delta).
double basic_reproduction_number(const ModelParams& p);

/// Burst size with R0 = 1: b0 = 1 + delta / (beta K).
double critical_burst(const ModelParams& p);

/// E0, EK, Estar (omitted with a note when b <= 1 or R0 <= 1 leaves it
/// infeasible) and the never-feasible negative witness EN.
std::vector<Equilibrium> boundary_equilibria(const ModelParams& p);

/// Coordinates of Estar; y component is positive iff R0 > 1.
State estar_point(const ModelParams& p);

/// The polynomial whose positive roots give the interior equilibria:
/// P(v) (epsilon=0, model rescaled to K=gamma=1 internally) or Q(y)
/// (epsilon=1, general K). Built by expanding the defining products, not by
/// transcribing listed coefficients.
RealPolynomial interior_polynomial(const ModelParams& p);

/// Interior equilibria (z > 0), feasibility-filtered and branch-tagged.
std::vector<Equilibrium> interior_equilibria(const ModelParams& p);

/// Boundary + interior.
std::vector<Equilibrium> all_equilibria(const ModelParams& p);

/// epsilon=0, K=gamma=1 only: the interval (b1, b2) on which y*(b) > y_e,
/// in closed form; empty when the radicand is negative.
std::optional<std::pair<double, double>> immune_window(const ModelParams& p);

struct FoldScan {
  double b_min = 1.0;
  double b_max = 200.0;
  int samples = 2000;
};

/// Roots in b of the discriminant of the interior polynomial, located by a
/// scan plus bisection; these are parameter values where interior branches
/// collide.
std::vector<double> fold_parameters(const ModelParams& p, const FoldScan& scan = {});

/// JSON array of records (tag, branch, point, feasible, residual).
std::string equilibria_to_json(const std::vector<Equilibrium>& eqs);

}  // namespace viro

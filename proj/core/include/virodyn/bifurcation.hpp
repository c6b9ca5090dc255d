#pragma once

#include <string>
#include <utility>
#include <vector>

#include "virodyn/equilibria.hpp"
#include "virodyn/model.hpp"
#include "virodyn/stability.hpp"

namespace viro {

enum class CriticalKind { transcritical, hopf, fold, window_edge };

std::string critical_kind_name(CriticalKind k);

struct BranchPoint {
  double param = 0.0;
  Equilibrium eq;
  StabilityReport stab;
};

struct Branch {
  std::string tag;  // "E0", "EK", "Estar", "E_minus", "E_im", "E_plus"
  std::vector<BranchPoint> points;
};

struct CriticalPoint {
  CriticalKind kind = CriticalKind::transcritical;
  double param = 0.0;
  std::string branch;
};

struct DomainCurve {
  std::string name;
  std::vector<std::pair<double, double>> samples;  // (param, value)
};

struct BifurcationDiagram {
  std::string swept_param;
  std::vector<double> grid;
  std::vector<Branch> branches;
  std::vector<CriticalPoint> critical_points;
  std::vector<DomainCurve> domain_curves;
};

struct SweepOptions {
  int jobs = 1;
  bool with_critical_points = true;
  double link_threshold_factor = 10.0;  // multiples of the local secant step
};

/// Equilibria plus classification at every grid value, linked into branches by
/// tag and nearest-neighbor continuation; critical points inserted by
/// bisection of the semantic indicators (R0 - 1, y* - y_e, discriminant,
/// leading pair real part).
BifurcationDiagram sweep_branches(const ModelParams& p, const std::string& param_name,
                                  const std::vector<double>& grid, const SweepOptions& opts = {});

struct LocateOptions {
  /// For hopf: which equilibrium branch to track.
  EqTag tag = EqTag::Estar;
  InteriorBranch branch = InteriorBranch::none;
  double rel_tol = 1e-8;
};

/// Refine one critical parameter value inside a bracket where the kind's
/// indicator changes sign. Throws std::invalid_argument when it does not.
double locate_critical(const ModelParams& p, CriticalKind kind,
                       std::pair<double, double> bracket, const LocateOptions& opts = {});

enum class RegionLabel {
  ek_only,
  estar_only,
  eim_only,
  bistable,
  estar_above_fold,
  cycle_region,
  other
};

std::string region_label_name(RegionLabel l);

struct RegionMap2D {
  std::vector<double> b_grid;
  std::vector<double> beta_grid;
  std::vector<RegionLabel> labels;  // row-major, beta outer, b inner
  std::vector<DomainCurve> boundary_curves;

  RegionLabel at(int ib, int ibeta) const {
    return labels[static_cast<std::size_t>(ibeta) * b_grid.size() + static_cast<std::size_t>(ib)];
  }
};

struct RegionMapOptions {
  int jobs = 1;
};

/// Stable-attractor signature over a (b, beta) grid for the epsilon = 0 model,
/// with per-column boundary curves (R0 = 1, the two y* = y_e branches,
/// discriminant zero, Hopf).
RegionMap2D region_map(const ModelParams& p, std::pair<double, double> b_range,
                       std::pair<double, double> beta_range, int nb, int nbeta,
                       const RegionMapOptions& opts = {});

/// Stable-attractor signature at a single (b, beta) point.
RegionLabel region_label_at(const ModelParams& p, double b, double beta);

}  // namespace viro

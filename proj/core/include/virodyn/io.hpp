#pragma once

#include <string>

#include "virodyn/bifurcation.hpp"
#include "virodyn/dynamics.hpp"
#include "virodyn/equilibria.hpp"

namespace viro {

/// Locale-independent shortest-exact float formatting (17 significant digits).
std::string format_double(double v);

std::string orbit_to_csv(const Orbit& o);
std::string orbit_to_json(const Orbit& o);

std::string cycle_to_csv(const Cycle& c);
std::string cycle_to_json(const Cycle& c);

/// Long format: one row per (param, branch) sample with state, classification
/// and leading eigenvalue real part.
std::string diagram_to_csv(const BifurcationDiagram& d);
std::string diagram_to_json(const BifurcationDiagram& d);
std::string critical_points_to_csv(const BifurcationDiagram& d);
std::string domain_curves_to_csv(const BifurcationDiagram& d);

/// Rows: param, period, per-component min/max, stability; LPC rows carry
/// point_type=LPC.
std::string cycle_branch_to_csv(const CycleBranch& br);
std::string cycle_branch_to_json(const CycleBranch& br);

std::string region_map_to_csv(const RegionMap2D& m);
std::string region_map_to_json(const RegionMap2D& m);
std::string boundary_curves_to_csv(const RegionMap2D& m);

std::string equilibria_to_csv(const std::vector<Equilibrium>& eqs);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// 64-bit FNV-1a of a byte string, hex encoded (manifest checksums).
std::string fnv1a_hex(const std::string& bytes);

}  // namespace viro

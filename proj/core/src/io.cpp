#include "virodyn/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace viro {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

nlohmann::ordered_json state_json(const State& s) {
  return nlohmann::ordered_json{s.x, s.y, s.v, s.z};
}

void csv_state_row(std::ostringstream& os, double t, const State& s) {
  os << format_double(t) << ',' << format_double(s.x) << ',' << format_double(s.y) << ','
     << format_double(s.v) << ',' << format_double(s.z) << '\n';
}

}  // namespace

std::string orbit_to_csv(const Orbit& o) {
  std::ostringstream os;
  os << "t,x,y,v,z\n";
  for (std::size_t i = 0; i < o.times.size(); ++i) csv_state_row(os, o.times[i], o.states[i]);
  return os.str();
}

std::string orbit_to_json(const Orbit& o) {
  nlohmann::ordered_json j;
  j["complete"] = o.complete;
  if (!o.diagnostic.empty()) j["diagnostic"] = o.diagnostic;
  j["domain_violations"] = o.stats.domain_violations;
  j["min"] = state_json(o.stats.min);
  j["max"] = state_json(o.stats.max);
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < o.times.size(); ++i) {
    rows.push_back({o.times[i], o.states[i].x, o.states[i].y, o.states[i].v, o.states[i].z});
  }
  j["samples"] = rows;
  return j.dump();
}

std::string cycle_to_csv(const Cycle& c) {
  std::ostringstream os;
  os << "t,x,y,v,z\n";
  for (std::size_t i = 0; i < c.sample_times.size(); ++i)
    csv_state_row(os, c.sample_times[i], c.samples[i]);
  return os.str();
}

std::string cycle_to_json(const Cycle& c) {
  nlohmann::ordered_json j;
  j["anchor"] = state_json(c.anchor);
  j["period"] = c.period;
  j["residual"] = c.residual;
  j["refined"] = c.refined;
  j["stable"] = c.stable;
  j["amplitude"] = c.amplitude;
  auto fl = nlohmann::ordered_json::array();
  for (const auto& m : c.floquet) fl.push_back({m.real(), m.imag()});
  j["floquet"] = fl;
  return j.dump(2);
}

std::string diagram_to_csv(const BifurcationDiagram& d) {
  std::ostringstream os;
  os << "param,branch,x,y,v,z,feasible,classification,leading_re\n";
  for (const auto& br : d.branches) {
    for (const auto& pt : br.points) {
      os << format_double(pt.param) << ',' << br.tag << ',' << format_double(pt.eq.point.x) << ','
         << format_double(pt.eq.point.y) << ',' << format_double(pt.eq.point.v) << ','
         << format_double(pt.eq.point.z) << ',' << (pt.eq.feasible ? 1 : 0) << ','
         << classification_name(pt.stab.classification) << ','
         << format_double(pt.stab.leading_real_part) << '\n';
    }
  }
  return os.str();
}

std::string critical_points_to_csv(const BifurcationDiagram& d) {
  std::ostringstream os;
  os << "kind,param,branch\n";
  for (const auto& cp : d.critical_points)
    os << critical_kind_name(cp.kind) << ',' << format_double(cp.param) << ',' << cp.branch
       << '\n';
  return os.str();
}

std::string domain_curves_to_csv(const BifurcationDiagram& d) {
  std::ostringstream os;
  os << "curve,param,value\n";
  for (const auto& c : d.domain_curves)
    for (const auto& [x, y] : c.samples)
      os << c.name << ',' << format_double(x) << ',' << format_double(y) << '\n';
  return os.str();
}

std::string diagram_to_json(const BifurcationDiagram& d) {
  nlohmann::ordered_json j;
  j["swept_param"] = d.swept_param;
  auto brs = nlohmann::ordered_json::array();
  for (const auto& br : d.branches) {
    nlohmann::ordered_json bj;
    bj["tag"] = br.tag;
    auto pts = nlohmann::ordered_json::array();
    for (const auto& pt : br.points) {
      pts.push_back({{"param", pt.param},
                     {"point", state_json(pt.eq.point)},
                     {"feasible", pt.eq.feasible},
                     {"classification", classification_name(pt.stab.classification)},
                     {"leading_re", pt.stab.leading_real_part}});
    }
    bj["points"] = pts;
    brs.push_back(bj);
  }
  j["branches"] = brs;
  auto cps = nlohmann::ordered_json::array();
  for (const auto& cp : d.critical_points)
    cps.push_back({{"kind", critical_kind_name(cp.kind)}, {"param", cp.param}, {"branch", cp.branch}});
  j["critical_points"] = cps;
  return j.dump();
}

std::string cycle_branch_to_csv(const CycleBranch& br) {
  std::ostringstream os;
  os << "point_type,param,period,stable,x_min,x_max,y_min,y_max,v_min,v_max,z_min,z_max,note\n";
  for (const auto& pt : br.points) {
    os << "cycle," << format_double(pt.param) << ',' << format_double(pt.period) << ','
       << (pt.stable ? 1 : 0) << ',' << format_double(pt.comp_min.x) << ','
       << format_double(pt.comp_max.x) << ',' << format_double(pt.comp_min.y) << ','
       << format_double(pt.comp_max.y) << ',' << format_double(pt.comp_min.v) << ','
       << format_double(pt.comp_max.v) << ',' << format_double(pt.comp_min.z) << ','
       << format_double(pt.comp_max.z) << ",\n";
  }
  for (const auto& lm : br.limits)
    os << "LPC," << format_double(lm.param) << ",,,,,,,,,," << ',' << lm.kind << '\n';
  return os.str();
}

std::string cycle_branch_to_json(const CycleBranch& br) {
  nlohmann::ordered_json j;
  j["param_name"] = br.param_name;
  j["termination"] = br.termination;
  j["folds"] = br.folds;
  auto lim = nlohmann::ordered_json::array();
  for (const auto& lm : br.limits) lim.push_back({{"kind", lm.kind}, {"param", lm.param}});
  j["limits"] = lim;
  auto pts = nlohmann::ordered_json::array();
  for (const auto& pt : br.points) {
    pts.push_back({{"param", pt.param},
                   {"period", pt.period},
                   {"stable", pt.stable},
                   {"anchor", state_json(pt.anchor)},
                   {"min", state_json(pt.comp_min)},
                   {"max", state_json(pt.comp_max)}});
  }
  j["points"] = pts;
  return j.dump();
}

std::string region_map_to_csv(const RegionMap2D& m) {
  std::ostringstream os;
  os << "b,beta,label\n";
  for (std::size_t jb = 0; jb < m.beta_grid.size(); ++jb)
    for (std::size_t ib = 0; ib < m.b_grid.size(); ++ib)
      os << format_double(m.b_grid[ib]) << ',' << format_double(m.beta_grid[jb]) << ','
         << region_label_name(m.labels[jb * m.b_grid.size() + ib]) << '\n';
  return os.str();
}

std::string boundary_curves_to_csv(const RegionMap2D& m) {
  std::ostringstream os;
  os << "curve,beta,b\n";
  for (const auto& c : m.boundary_curves)
    for (const auto& [beta, b] : c.samples)
      os << c.name << ',' << format_double(beta) << ',' << format_double(b) << '\n';
  return os.str();
}

std::string region_map_to_json(const RegionMap2D& m) {
  nlohmann::ordered_json j;
  j["b_grid"] = m.b_grid;
  j["beta_grid"] = m.beta_grid;
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t jb = 0; jb < m.beta_grid.size(); ++jb) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t ib = 0; ib < m.b_grid.size(); ++ib)
      row.push_back(region_label_name(m.labels[jb * m.b_grid.size() + ib]));
    rows.push_back(row);
  }
  j["labels"] = rows;
  return j.dump();
}

std::string equilibria_to_csv(const std::vector<Equilibrium>& eqs) {
  std::ostringstream os;
  os << "tag,branch,x,y,v,z,feasible,residual\n";
  for (const auto& e : eqs) {
    os << tag_name(e.tag) << ',' << branch_name(e.branch) << ',' << format_double(e.point.x)
       << ',' << format_double(e.point.y) << ',' << format_double(e.point.v) << ','
       << format_double(e.point.z) << ',' << (e.feasible ? 1 : 0) << ','
       << format_double(e.residual) << '\n';
  }
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace viro

#include "virodyn/bifurcation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

namespace viro {

namespace {

ModelParams with_param(const ModelParams& p, const std::string& name, double value) {
  ModelParams q = p;
  set_param(q, name, value);
  return q;
}

std::string eq_branch_tag(const Equilibrium& e) {
  if (e.tag == EqTag::Interior) return branch_name(e.branch);
  return tag_name(e.tag);
}

double bisect_indicator(const std::function<double(double)>& f, double lo, double hi,
                        double rel_tol) {
  double flo = f(lo), fhi = f(hi);
  if (!std::isfinite(flo) || !std::isfinite(fhi) || (flo < 0.0) == (fhi < 0.0))
    throw std::invalid_argument("locate_critical: indicator does not change sign over bracket [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "] (f(lo)=" +
                                std::to_string(flo) + ", f(hi)=" + std::to_string(fhi) + ")");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (!std::isfinite(fm)) break;
    if (fm == 0.0) return mid;
    if ((flo < 0.0) == (fm < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
    if (hi - lo <= rel_tol * std::max(1.0, std::abs(lo))) break;
  }
  if (fhi != flo) {
    double s = lo - flo * (hi - lo) / (fhi - flo);
    if (s >= lo && s <= hi) return s;
  }
  return 0.5 * (lo + hi);
}

// leading real part of the complex eigenvalue pairs at a tracked equilibrium;
// NaN when the equilibrium or a pair is absent
double pair_re_indicator(const ModelParams& p, EqTag tag, InteriorBranch br) {
  const Equilibrium* found = nullptr;
  std::vector<Equilibrium> eqs = all_equilibria(p);
  for (const auto& e : eqs) {
    if (e.tag != tag) continue;
    if (tag == EqTag::Interior && e.branch != br) continue;
    found = &e;
    break;
  }
  if (!found || !found->feasible) return std::numeric_limits<double>::quiet_NaN();
  auto ev = eigenvalues(jacobian(p, found->point));
  double lead = std::numeric_limits<double>::quiet_NaN();
  for (const auto& lam : ev) {
    if (lam.imag() <= 1e-9) continue;
    if (!std::isfinite(lead) || lam.real() > lead) lead = lam.real();
  }
  return lead;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int j = 0; j < jobs; ++j)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

std::string critical_kind_name(CriticalKind k) {
  switch (k) {
    case CriticalKind::transcritical: return "transcritical";
    case CriticalKind::hopf: return "hopf";
    case CriticalKind::fold: return "fold";
    case CriticalKind::window_edge: return "window_edge";
  }
  return "?";
}

double locate_critical(const ModelParams& p, CriticalKind kind, std::pair<double, double> bracket,
                       const LocateOptions& opts) {
  p.validate();
  auto [lo, hi] = bracket;
  if (!(hi > lo)) throw std::invalid_argument("locate_critical: empty bracket");
  std::function<double(double)> f;
  switch (kind) {
    case CriticalKind::transcritical:
      f = [&p](double b) { return basic_reproduction_number(with_param(p, "b", b)) - 1.0; };
      break;
    case CriticalKind::window_edge:
      f = [&p](double b) {
        ModelParams q = rescale(with_param(p, "b", b)).params;
        if (!(b > 1.0)) return std::numeric_limits<double>::quiet_NaN();
        return estar_point(q).y - q.c / q.beta_z;
      };
      break;
    case CriticalKind::fold:
      f = [&p](double b) {
        RealPolynomial poly = interior_polynomial(with_param(p, "b", b));
        if (poly.degree() != 3) return std::numeric_limits<double>::quiet_NaN();
        return cubic_discriminant(poly);
      };
      break;
    case CriticalKind::hopf:
      f = [&p, &opts](double b) {
        return pair_re_indicator(with_param(p, "b", b), opts.tag, opts.branch);
      };
      break;
  }
  return bisect_indicator(f, lo, hi, opts.rel_tol);
}

BifurcationDiagram sweep_branches(const ModelParams& p, const std::string& param_name,
                                  const std::vector<double>& grid, const SweepOptions& opts) {
  p.validate();
  if (grid.empty()) throw std::invalid_argument("sweep_branches: empty grid");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("sweep_branches: grid must be sorted");

  BifurcationDiagram diag;
  diag.swept_param = param_name;
  diag.grid = grid;

  // evaluate all grid points (independent work items)
  std::vector<std::vector<std::pair<Equilibrium, StabilityReport>>> per_point(grid.size());
  parallel_for(static_cast<int>(grid.size()), opts.jobs, [&](int i) {
    ModelParams q = with_param(p, param_name, grid[static_cast<std::size_t>(i)]);
    std::vector<std::pair<Equilibrium, StabilityReport>> here;
    for (const auto& e : all_equilibria(q)) {
      if (e.tag == EqTag::EN) continue;  // never feasible, clutters diagrams
      if (!std::isfinite(e.point.x)) continue;
      here.emplace_back(e, classify(q, e));
    }
    per_point[static_cast<std::size_t>(i)] = std::move(here);
  });

  // assemble branches keyed by tag, splitting on linking jumps
  std::map<std::string, Branch> branches;
  std::map<std::string, State> last_state;
  std::map<std::string, double> last_param;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (auto& [eq, rep] : per_point[i]) {
      std::string tag = eq_branch_tag(eq);
      auto it = last_state.find(tag);
      if (it != last_state.end() && branches[tag].points.size() >= 2) {
        // nearest-neighbor linking guard: a jump larger than link_threshold x
        // the local secant step splits the branch
        const auto& pts = branches[tag].points;
        const State& prev = pts.back().eq.point;
        const State& prev2 = pts[pts.size() - 2].eq.point;
        const double secant = std::max(distance(prev, prev2), 1e-12);
        if (distance(eq.point, prev) > opts.link_threshold_factor * secant &&
            distance(eq.point, prev) > 1e-6) {
          tag += "#split";
        }
      }
      Branch& br = branches[tag];
      if (br.tag.empty()) br.tag = tag;
      br.points.push_back({grid[i], eq, rep});
      last_state[tag] = eq.point;
      last_param[tag] = grid[i];
    }
  }
  for (auto& [tag, br] : branches) diag.branches.push_back(std::move(br));

  // domain curves for the epsilon = 0 model swept in b (rescaled coordinates)
  if (p.epsilon == 0 && param_name == "b") {
    ModelParams r = rescale(p).params;
    const double ye = r.c / r.beta_z;
    if (ye < 1.0) {
      DomainCurve vc{"v_feasible_cap", {}};
      DomainCurve xc{"x_at_v_cap", {}};
      for (double b : grid) {
        const double cap = std::min(r.lambda * (1.0 - ye) / r.beta,
                                    r.delta > 0.0 ? ye * (b - 1.0) / r.delta : 1e300);
        vc.samples.emplace_back(b, cap);
        xc.samples.emplace_back(b, 1.0 - ye - r.beta * cap / r.lambda);
      }
      diag.domain_curves.push_back(std::move(vc));
      diag.domain_curves.push_back(std::move(xc));
    }
  }

  if (!opts.with_critical_points || param_name != "b") return diag;

  const double lo = grid.front(), hi = grid.back();
  auto add_cp = [&](CriticalKind k, double v, const std::string& br) {
    diag.critical_points.push_back({k, v, br});
  };

  // transcritical: R0 = 1
  {
    double b0 = critical_burst(p);
    if (b0 > lo && b0 < hi) add_cp(CriticalKind::transcritical, b0, "EK/Estar");
  }
  // window edges: y* = y_e crossings (epsilon = 0)
  if (p.epsilon == 0) {
    ModelParams r = rescale(p).params;
    if (auto win = immune_window(r)) {
      if (win->first > std::max(lo, 1.0) && win->first < hi)
        add_cp(CriticalKind::window_edge, win->first, "Estar/E_im");
      if (win->second > std::max(lo, 1.0) && win->second < hi)
        add_cp(CriticalKind::window_edge, win->second, "Estar/E_plus");
    }
  }
  // folds of interior equilibria
  {
    FoldScan scan;
    scan.b_min = std::max(lo, 1.0 + 1e-9);
    scan.b_max = hi;
    scan.samples = std::max(200, static_cast<int>(grid.size()));
    for (double bf : fold_parameters(p, scan)) add_cp(CriticalKind::fold, bf, "interior");
  }
  // Hopf: sign change of the leading pair real part along each branch
  {
    struct Track {
      EqTag tag;
      InteriorBranch br;
      std::string name;
    };
    std::vector<Track> tracks = {{EqTag::Estar, InteriorBranch::none, "Estar"},
                                 {EqTag::Interior, InteriorBranch::minus, "E_minus"},
                                 {EqTag::Interior, InteriorBranch::im, "E_im"},
                                 {EqTag::Interior, InteriorBranch::plus, "E_plus"}};
    for (const auto& trk : tracks) {
      double prev = std::numeric_limits<double>::quiet_NaN();
      double prev_b = 0.0;
      for (double b : grid) {
        double cur = pair_re_indicator(with_param(p, param_name, b), trk.tag, trk.br);
        if (std::isfinite(prev) && std::isfinite(cur) && (prev < 0.0) != (cur < 0.0)) {
          LocateOptions lopts;
          lopts.tag = trk.tag;
          lopts.branch = trk.br;
          try {
            double bh = locate_critical(p, CriticalKind::hopf, {prev_b, b}, lopts);
            add_cp(CriticalKind::hopf, bh, trk.name);
          } catch (const std::exception&) {
            // indicator lost the branch inside the bracket; skip
          }
        }
        prev = cur;
        prev_b = b;
      }
    }
  }
  std::sort(diag.critical_points.begin(), diag.critical_points.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) { return a.param < b.param; });
  return diag;
}

std::string region_label_name(RegionLabel l) {
  switch (l) {
    case RegionLabel::ek_only: return "EK_only";
    case RegionLabel::estar_only: return "Estar_only";
    case RegionLabel::eim_only: return "Eim_only";
    case RegionLabel::bistable: return "bistable";
    case RegionLabel::estar_above_fold: return "Estar_above_fold";
    case RegionLabel::cycle_region: return "cycle_region";
    case RegionLabel::other: return "other";
  }
  return "?";
}

RegionLabel region_label_at(const ModelParams& p0, double b, double beta) {
  ModelParams q = p0;
  q.b = b;
  q.beta = beta;
  ModelParams p = rescale(q).params;
  const double R0 = basic_reproduction_number(p);
  if (R0 <= 1.0) return RegionLabel::ek_only;
  if (!(b > 1.0)) return RegionLabel::ek_only;

  bool star_stable = false;
  {
    auto bd = boundary_equilibria(p);
    for (const auto& e : bd)
      if (e.tag == EqTag::Estar && e.feasible)
        star_stable = classify(p, e).classification == Classification::stable;
  }
  int stable_interior = 0;
  int feasible_interior = 0;
  for (const auto& e : interior_equilibria(p)) {
    if (!e.feasible) continue;
    ++feasible_interior;
    if (classify(p, e).classification == Classification::stable) ++stable_interior;
  }

  if (star_stable && stable_interior > 0) return RegionLabel::bistable;
  if (star_stable) {
    auto win = immune_window(p);
    if (win && b > win->second) return RegionLabel::estar_above_fold;
    return RegionLabel::estar_only;
  }
  if (stable_interior > 0) return RegionLabel::eim_only;
  return RegionLabel::cycle_region;
}

RegionMap2D region_map(const ModelParams& p, std::pair<double, double> b_range,
                       std::pair<double, double> beta_range, int nb, int nbeta,
                       const RegionMapOptions& opts) {
  p.validate();
  if (p.epsilon != 0) throw std::invalid_argument("region_map: epsilon must be 0");
  if (nb < 2 || nbeta < 2) throw std::invalid_argument("region_map: resolution must be >= 2 per axis");

  RegionMap2D map;
  for (int i = 0; i < nb; ++i)
    map.b_grid.push_back(b_range.first + (b_range.second - b_range.first) * i / (nb - 1));
  for (int j = 0; j < nbeta; ++j)
    map.beta_grid.push_back(beta_range.first +
                            (beta_range.second - beta_range.first) * j / (nbeta - 1));
  map.labels.assign(static_cast<std::size_t>(nb) * static_cast<std::size_t>(nbeta),
                    RegionLabel::other);

  parallel_for(nbeta, opts.jobs, [&](int j) {
    for (int i = 0; i < nb; ++i) {
      RegionLabel lab;
      try {
        lab = region_label_at(p, map.b_grid[static_cast<std::size_t>(i)],
                              map.beta_grid[static_cast<std::size_t>(j)]);
      } catch (const std::exception&) {
        lab = RegionLabel::other;
      }
      map.labels[static_cast<std::size_t>(j) * static_cast<std::size_t>(nb) +
                 static_cast<std::size_t>(i)] = lab;
    }
  });

  // boundary curves, sampled per beta column
  DomainCurve r0c{"R0_eq_1", {}}, w1{"ystar_eq_ye_lower", {}}, w2{"ystar_eq_ye_upper", {}},
      dz{"disc_eq_0", {}}, hz{"hopf", {}};
  for (double beta : map.beta_grid) {
    ModelParams q = rescale(p).params;
    q.beta = beta * p.K / p.gamma;  // same rescaling as the grid cells
    const double b0 = critical_burst(q);
    if (b0 >= b_range.first && b0 <= b_range.second) r0c.samples.emplace_back(beta, b0);
    if (auto win = immune_window(q)) {
      if (win->first >= b_range.first && win->first <= b_range.second)
        w1.samples.emplace_back(beta, win->first);
      if (win->second >= b_range.first && win->second <= b_range.second)
        w2.samples.emplace_back(beta, win->second);
    }
    // discriminant zero above b0
    {
      FoldScan scan;
      scan.b_min = std::max(b_range.first, 1.0 + 1e-9);
      scan.b_max = b_range.second;
      scan.samples = 400;
      auto folds = fold_parameters(q, scan);
      if (!folds.empty()) dz.samples.emplace_back(beta, folds.back());
    }
    // Hopf of Estar: H(b) = 0 above b0
    {
      auto H = [&q](double b) { return stability_function_H(q, b); };
      double lo = std::max(b0 + 1e-6, b_range.first + 1e-9), hi = b_range.second;
      if (hi > lo) {
        double prev = H(lo), prev_b = lo;
        const int ns = 300;
        for (int k = 1; k <= ns; ++k) {
          double b = lo + (hi - lo) * k / ns;
          double cur = H(b);
          if (std::isfinite(prev) && std::isfinite(cur) && (prev < 0.0) != (cur < 0.0)) {
            hz.samples.emplace_back(
                beta, bisect_indicator([&](double x) { return H(x); }, prev_b, b, 1e-10));
            break;
          }
          prev = cur;
          prev_b = b;
        }
      }
    }
  }
  for (auto* c : {&r0c, &w1, &w2, &dz, &hz})
    if (!c->samples.empty()) map.boundary_curves.push_back(*c);
  return map;
}

}  // namespace viro

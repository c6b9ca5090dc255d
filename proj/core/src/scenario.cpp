#include "virodyn/scenario.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>

#include <json.hpp>

#include "virodyn/bifurcation.hpp"
#include "virodyn/io.hpp"
#include "virodyn/stability.hpp"

namespace viro {

namespace fs = std::filesystem;

std::string analysis_kind_name(AnalysisKind k) {
  switch (k) {
    case AnalysisKind::sweep: return "sweep";
    case AnalysisKind::region_map: return "region_map";
    case AnalysisKind::integrate: return "integrate";
    case AnalysisKind::cycle: return "cycle";
    case AnalysisKind::critical_points: return "critical_points";
    case AnalysisKind::equilibria: return "equilibria";
  }
  return "?";
}

AnalysisKind analysis_kind_from_name(const std::string& s) {
  if (s == "sweep") return AnalysisKind::sweep;
  if (s == "region_map") return AnalysisKind::region_map;
  if (s == "integrate") return AnalysisKind::integrate;
  if (s == "cycle") return AnalysisKind::cycle;
  if (s == "critical_points") return AnalysisKind::critical_points;
  if (s == "equilibria") return AnalysisKind::equilibria;
  throw std::invalid_argument("unknown analysis kind: " + s);
}

namespace {

ModelParams params_3d() {
  ModelParams p;
  p.lambda = 0.36;
  p.beta = 0.11;
  p.delta = 0.44;
  p.K = 1.0;
  p.gamma = 1.0;
  p.b = 28.0;
  // inert immune compartment: z = 0 is invariant and its eigenvalue stays -c
  p.beta_y = 0.0;
  p.beta_v = 0.0;
  p.beta_z = 1e-6;
  p.c = 1.0;
  p.epsilon = 0;
  return p;
}

ModelParams params_eps0() {
  ModelParams p;
  p.lambda = 0.36;
  p.beta = 0.11;
  p.delta = 0.2;
  p.K = 1.0;
  p.gamma = 1.0;
  p.b = 9.5;
  p.beta_y = 0.48;
  p.beta_v = 0.16;
  p.beta_z = 0.6;
  p.c = 0.036;
  p.epsilon = 0;
  return p;
}

ModelParams params_eps1() {
  ModelParams p;
  p.lambda = 1.0;
  p.beta = 43.5;
  p.delta = 0.5;
  p.K = 1.0;
  p.gamma = 1.0 / 128.0;
  p.b = 27.0;
  p.beta_y = 1.0;
  p.beta_v = 1.0;
  p.beta_z = 1.0;
  p.c = 1.0;
  p.epsilon = 1;
  return p;
}

std::vector<ScenarioConfig> make_presets() {
  std::vector<ScenarioConfig> out;

  {
    ScenarioConfig c;
    c.name = "fig-bif11T";
    c.figure = "bif11T";
    c.description = "three-compartment model: equilibrium branches over b with b0 and the Hopf point";
    c.params = params_3d();
    c.kind = AnalysisKind::sweep;
    c.grid = {"b", 1.2, 40.0, 400};
    out.push_back(c);
  }
  {
    ScenarioConfig c;
    c.name = "fig-fig5T";
    c.figure = "fig5T";
    c.description = "three-compartment model at b=28: time series near the unstable focus";
    c.params = params_3d();
    c.kind = AnalysisKind::integrate;
    c.inits = {{0.158148, 0.0531317, 2.65672, 0.0}};
    c.t1 = 400.0;
    c.sample_dt = 0.05;
    out.push_back(c);
  }
  {
    ScenarioConfig c;
    c.name = "fig-cy113D";
    c.figure = "cy113D";
    c.description = "three-compartment model at b=28: two orbits converging to the attracting cycle";
    c.params = params_3d();
    c.kind = AnalysisKind::integrate;
    c.inits = {{0.158148, 0.0531317, 2.65672, 0.0}, {0.9, 0.3, 1.0, 0.0}};
    c.t1 = 500.0;
    c.sample_dt = 0.05;
    out.push_back(c);
  }
  {
    ScenarioConfig c;
    c.name = "fig-BiifT17";
    c.figure = "BiifT17";
    c.description = "epsilon=0 model: v-branches over b with window, fold and Hopf points";
    c.params = params_eps0();
    c.kind = AnalysisKind::sweep;
    c.grid = {"b", 1.2, 25.0, 400};
    out.push_back(c);
  }
  {
    ScenarioConfig c;
    c.name = "fig-Bifx";
    c.figure = "Bifx";
    c.description = "epsilon=0 model: x-branches over b with the v >= 0 feasibility curve";
    c.params = params_eps0();
    c.kind = AnalysisKind::sweep;
    c.grid = {"b", 1.2, 25.0, 400};
    out.push_back(c);
  }
  {
    ScenarioConfig c;
    c.name = "fig-map4";
    c.figure = "map4";
    c.description = "epsilon=0 model: attractor-signature partition of the (b, beta) plane";
    c.params = params_eps0();
    c.kind = AnalysisKind::region_map;
    c.b_min = 1.2;
    c.b_max = 30.0;
    c.nb = 200;
    c.beta_min = 0.02;
    c.beta_max = 0.3;
    c.nbeta = 200;
    out.push_back(c);
  }
  {
    ScenarioConfig c;
    c.name = "fig-P22";
    c.figure = "P22";
    c.description = "epsilon=0 model at b=9.5: bistability, orbits to Estar and to E_im";
    c.params = params_eps0();
    c.kind = AnalysisKind::integrate;
    c.inits = {{0.9, 0.01, 0.1, 0.1}, {0.5, 0.01, 1.2, 0.5}};
    c.t1 = 1900.0;
    c.sample_dt = 0.25;
    out.push_back(c);
  }
  {
    ScenarioConfig c;
    c.name = "fig-PHI";
    c.figure = "PHI";
    c.description = "epsilon=0 model at b=23: the attracting limit cycle past the Hopf point";
    c.params = params_eps0();
    c.params.b = 23.0;
    c.kind = AnalysisKind::cycle;
    c.inits = {{0.25, 0.05, 0.1, 0.1}};
    c.seed_t1 = 3000.0;
    out.push_back(c);
  }
  {
    ScenarioConfig c;
    c.name = "fig-EriB";
    c.figure = "EriB";
    c.description = "epsilon=1 model: y-branches over b with the interior folds";
    c.params = params_eps1();
    c.kind = AnalysisKind::sweep;
    c.grid = {"b", 1.2, 50.0, 400};
    out.push_back(c);
  }
  {
    ScenarioConfig c;
    c.name = "fig-Bif1x";
    c.figure = "Bif1x";
    c.description = "epsilon=1 model: x-branches over b";
    c.params = params_eps1();
    c.kind = AnalysisKind::sweep;
    c.grid = {"b", 1.2, 50.0, 400};
    out.push_back(c);
  }
  {
    ScenarioConfig c;
    c.name = "fig-LC-diag";
    c.figure = "LC-diag";
    c.description = "epsilon=1 model: cycle branch from the Hopf point with the two limit points of cycles";
    c.params = params_eps1();
    c.params.b = 30.0;
    c.kind = AnalysisKind::cycle;
    c.continue_branch = true;
    c.hopf_bracket_lo = 29.6;
    c.hopf_bracket_hi = 30.2;
    c.hopf_offset = 0.002;
    c.range_lo = 29.8;
    c.range_hi = 32.0;
    out.push_back(c);
  }
  {
    ScenarioConfig c;
    c.name = "fig-PG-01b";
    c.figure = "PG-01b";
    c.description = "epsilon=1 model at b=27: convergence to the attractor E_plus";
    c.params = params_eps1();
    c.params.b = 27.0;
    c.kind = AnalysisKind::integrate;
    c.inits = {{0.9, 0.01, 0.01, 0.01}};
    c.t1 = 400.0;
    c.sample_dt = 0.1;
    out.push_back(c);
  }
  {
    ScenarioConfig c;
    c.name = "fig-PG-02";
    c.figure = "PG-02";
    c.description = "epsilon=1 model at b=29.5: three interior equilibria, attraction to E_plus";
    c.params = params_eps1();
    c.params.b = 29.5;
    c.kind = AnalysisKind::integrate;
    c.inits = {{0.9, 0.01, 0.01, 0.01}};
    c.t1 = 400.0;
    c.sample_dt = 0.1;
    out.push_back(c);
  }
  {
    ScenarioConfig c;
    c.name = "fig-ppG-2LC";
    c.figure = "ppG-2LC";
    c.description = "epsilon=1 model at b=42: bistability between E_plus and a stable limit cycle";
    c.params = params_eps1();
    c.params.b = 42.0;
    c.kind = AnalysisKind::integrate;
    c.inits = {{0.9, 0.01, 0.01, 0.01}, {0.05, 0.05, 0.0043, 0.1954}};
    c.t1 = 1500.0;
    c.sample_dt = 0.1;
    out.push_back(c);
  }
  {
    ScenarioConfig c;
    c.name = "fig-PG-03";
    c.figure = "PG-03";
    c.description = "epsilon=1 model at b=50: no stable attractor; Lyapunov-exponent estimate included";
    c.params = params_eps1();
    c.params.b = 50.0;
    c.kind = AnalysisKind::integrate;
    c.inits = {{0.9, 0.01, 0.01, 0.01}};
    c.t1 = 500.0;
    c.sample_dt = 0.05;
    c.with_lyapunov = true;
    c.lyapunov_horizon = 2000.0;
    out.push_back(c);
  }
  return out;
}

}  // namespace

const std::vector<ScenarioConfig>& presets() {
  static const std::vector<ScenarioConfig> all = make_presets();
  return all;
}

const ScenarioConfig* find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return &p;
  return nullptr;
}

ScenarioConfig load_config(const std::string& path) {
  if (!fs::exists(path)) throw std::invalid_argument("config not found: " + path);
  nlohmann::json j = nlohmann::json::parse(read_text_file(path));
  ScenarioConfig c;
  c.name = j.value("name", fs::path(path).stem().string());
  c.figure = j.value("figure", "");
  c.description = j.value("description", "");
  if (!j.contains("kind")) throw std::invalid_argument("config missing 'kind': " + path);
  c.kind = analysis_kind_from_name(j.at("kind").get<std::string>());
  if (!j.contains("params")) throw std::invalid_argument("config missing 'params': " + path);
  for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it)
    set_param(c.params, it.key(), it.value().get<double>());
  c.params.validate();
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    c.grid.param = g.value("param", std::string("b"));
    c.grid.min = g.at("min").get<double>();
    c.grid.max = g.at("max").get<double>();
    c.grid.n = g.value("n", 400);
  }
  if (j.contains("region")) {
    const auto& r = j.at("region");
    c.b_min = r.at("b_min").get<double>();
    c.b_max = r.at("b_max").get<double>();
    c.beta_min = r.at("beta_min").get<double>();
    c.beta_max = r.at("beta_max").get<double>();
    c.nb = r.value("nb", 200);
    c.nbeta = r.value("nbeta", 200);
  }
  if (j.contains("inits")) {
    for (const auto& row : j.at("inits")) {
      if (row.size() != 4) throw std::invalid_argument("config inits rows must have 4 entries");
      c.inits.push_back(State{row[0].get<double>(), row[1].get<double>(), row[2].get<double>(),
                              row[3].get<double>()});
    }
  }
  c.t0 = j.value("t0", 0.0);
  c.t1 = j.value("t1", 400.0);
  c.sample_dt = j.value("sample_dt", 0.1);
  c.with_lyapunov = j.value("with_lyapunov", false);
  c.lyapunov_horizon = j.value("lyapunov_horizon", 2000.0);
  c.seed_t1 = j.value("seed_t1", 2000.0);
  c.continue_branch = j.value("continue_branch", false);
  c.hopf_bracket_lo = j.value("hopf_bracket_lo", 0.0);
  c.hopf_bracket_hi = j.value("hopf_bracket_hi", 0.0);
  c.hopf_offset = j.value("hopf_offset", 0.03);
  c.range_lo = j.value("range_lo", 0.0);
  c.range_hi = j.value("range_hi", 0.0);
  return c;
}

namespace {

std::vector<double> make_grid(const GridSpec& g) {
  if (g.n < 2) throw std::invalid_argument("grid needs >= 2 points");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(g.n));
  for (int i = 0; i < g.n; ++i)
    grid.push_back(g.min + (g.max - g.min) * i / (g.n - 1));
  return grid;
}

struct Emitter {
  fs::path dir;
  std::string format;
  std::vector<std::string>* files;

  void emit(const std::string& base, const std::string& csv, const std::string& json) const {
    if (format == "json" && !json.empty()) {
      write_text_file((dir / (base + ".json")).string(), json);
      files->push_back(base + ".json");
    } else {
      write_text_file((dir / (base + ".csv")).string(), csv);
      files->push_back(base + ".csv");
    }
  }
  void emit_json(const std::string& base, const std::string& json) const {
    write_text_file((dir / (base + ".json")).string(), json);
    files->push_back(base + ".json");
  }
};

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
  RunResult result;
  const auto wall_start = std::chrono::steady_clock::now();

  std::string out_root = opts.out_dir;
  if (out_root.empty()) {
    const char* env = std::getenv("VIRODYN_OUT");
    out_root = env ? env : "out";
  }
  if (opts.format != "csv" && opts.format != "json") {
    result.exit_code = 2;
    result.message = "unknown format: " + opts.format;
    return result;
  }
  fs::path dir = fs::path(out_root) / cfg.name;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    result.exit_code = 2;
    result.message = "cannot create output directory: " + dir.string();
    return result;
  }

  ScenarioConfig c = cfg;
  if (opts.tol_abs) c.integ.abs_tol = *opts.tol_abs;
  if (opts.tol_rel) c.integ.rel_tol = *opts.tol_rel;
  try {
    c.params.validate();
  } catch (const std::exception& e) {
    result.exit_code = 2;
    result.message = e.what();
    return result;
  }

  Emitter em{dir, opts.format, &result.files};
  try {
    switch (c.kind) {
      case AnalysisKind::sweep: {
        SweepOptions so;
        so.jobs = opts.jobs;
        BifurcationDiagram d = sweep_branches(c.params, c.grid.param, make_grid(c.grid), so);
        em.emit("branches", diagram_to_csv(d), diagram_to_json(d));
        write_text_file((dir / "critical_points.csv").string(), critical_points_to_csv(d));
        result.files.push_back("critical_points.csv");
        if (!d.domain_curves.empty()) {
          write_text_file((dir / "domain_curves.csv").string(), domain_curves_to_csv(d));
          result.files.push_back("domain_curves.csv");
        }
        break;
      }
      case AnalysisKind::critical_points: {
        SweepOptions so;
        so.jobs = opts.jobs;
        BifurcationDiagram d = sweep_branches(c.params, c.grid.param, make_grid(c.grid), so);
        write_text_file((dir / "critical_points.csv").string(), critical_points_to_csv(d));
        result.files.push_back("critical_points.csv");
        break;
      }
      case AnalysisKind::region_map: {
        RegionMapOptions ro;
        ro.jobs = opts.jobs;
        RegionMap2D m = region_map(c.params, {c.b_min, c.b_max}, {c.beta_min, c.beta_max}, c.nb,
                                   c.nbeta, ro);
        em.emit("region_map", region_map_to_csv(m), region_map_to_json(m));
        write_text_file((dir / "boundary_curves.csv").string(), boundary_curves_to_csv(m));
        result.files.push_back("boundary_curves.csv");
        break;
      }
      case AnalysisKind::integrate: {
        if (c.inits.empty()) throw std::invalid_argument("integrate: no initial states");
        IntegratorOptions io = c.integ;
        io.sample_dt = c.sample_dt;
        for (std::size_t i = 0; i < c.inits.size(); ++i) {
          Orbit o = integrate(c.params, c.inits[i], c.t0, c.t1, io);
          std::string base = "orbit_" + std::to_string(i);
          if (!o.complete) {
            write_text_file((dir / (base + ".csv.partial")).string(), orbit_to_csv(o));
            result.files.push_back(base + ".csv.partial");
            throw std::runtime_error("integration aborted: " + o.diagnostic);
          }
          em.emit(base, orbit_to_csv(o), orbit_to_json(o));
        }
        if (c.with_lyapunov) {
          LyapunovOptions lo;
          lo.integ = c.integ;
          LyapunovEstimate est =
              largest_lyapunov_exponent(c.params, c.inits.front(), c.lyapunov_horizon, lo);
          nlohmann::ordered_json lj;
          lj["value"] = est.value;
          auto tr = nlohmann::ordered_json::array();
          for (auto& [t, v] : est.trace) tr.push_back({t, v});
          lj["trace"] = tr;
          em.emit_json("lyapunov", lj.dump(2));
        }
        break;
      }
      case AnalysisKind::cycle: {
        if (c.continue_branch) {
          LocateOptions lo;
          lo.tag = EqTag::Interior;
          lo.branch = InteriorBranch::im;
          const double bH = locate_critical(c.params, CriticalKind::hopf,
                                            {c.hopf_bracket_lo, c.hopf_bracket_hi}, lo);
          Cycle seed = cycle_near_hopf(c.params, "b", bH, c.hopf_offset);
          // walking toward the birth point first traverses the lower limit
          // point, then the branch turns and runs out to its far end
          ContinuationOptions co;
          co.ds0 = 0.003;
          co.initial_param_direction = -1.0;
          CycleBranch br = continue_cycles(c.params, "b", seed, {c.range_lo, c.range_hi}, co);
          em.emit("cycle_branch", cycle_branch_to_csv(br), cycle_branch_to_json(br));
          nlohmann::ordered_json hj;
          hj["hopf_b"] = bH;
          hj["folds"] = br.folds;
          auto lim = nlohmann::ordered_json::array();
          for (const auto& lm : br.limits) lim.push_back({{"kind", lm.kind}, {"param", lm.param}});
          hj["limits"] = lim;
          hj["termination"] = br.termination;
          em.emit_json("cycle_branch_summary", hj.dump(2));
        } else {
          if (c.inits.empty()) throw std::invalid_argument("cycle: no initial state");
          IntegratorOptions io = c.integ;
          io.sample_dt = 0.0;
          Orbit seed = integrate(c.params, c.inits.front(), 0.0, c.seed_t1, io);
          Cycle cyc = find_limit_cycle(c.params, seed);
          em.emit("cycle", cycle_to_csv(cyc), cycle_to_json(cyc));
          em.emit_json("cycle_summary", cycle_to_json(cyc));
        }
        break;
      }
      case AnalysisKind::equilibria: {
        auto eqs = all_equilibria(c.params);
        em.emit("equilibria", equilibria_to_csv(eqs), equilibria_to_json(eqs));
        nlohmann::ordered_json sj = nlohmann::ordered_json::array();
        for (const auto& e : eqs) {
          if (!std::isfinite(e.point.x)) continue;
          StabilityReport rep = classify(c.params, e);
          nlohmann::ordered_json row;
          row["tag"] = tag_name(e.tag);
          if (e.branch != InteriorBranch::none) row["branch"] = branch_name(e.branch);
          row["report"] = nlohmann::ordered_json::parse(stability_report_to_json(rep));
          sj.push_back(row);
        }
        em.emit_json("stability", sj.dump(2));
        break;
      }
    }
  } catch (const std::invalid_argument& e) {
    result.exit_code = 2;
    result.message = e.what();
    return result;
  } catch (const std::exception& e) {
    result.exit_code = 1;
    result.message = e.what();
    return result;
  }

  // manifest: inputs, version, wall time, checksums (not part of the
  // determinism contract)
  const auto wall_end = std::chrono::steady_clock::now();
  nlohmann::ordered_json man;
  man["name"] = cfg.name;
  if (!cfg.figure.empty()) man["figure"] = cfg.figure;
  if (!cfg.description.empty()) man["description"] = cfg.description;
  man["kind"] = analysis_kind_name(cfg.kind);
  man["params"] = nlohmann::ordered_json::parse(params_to_json(cfg.params));
  man["tool"] = "virodyn";
  man["version"] = "0.1.0";
  man["wall_time_s"] =
      std::chrono::duration_cast<std::chrono::duration<double>>(wall_end - wall_start).count();
  nlohmann::ordered_json sums;
  for (const auto& f : result.files) sums[f] = fnv1a_hex(read_text_file((dir / f).string()));
  man["checksums"] = sums;
  write_text_file((dir / "manifest.json").string(), man.dump(2));
  return result;
}

RunResult run_named(const std::string& preset_or_config, bool is_config_path,
                    const RunOptions& opts) {
  RunResult result;
  try {
    if (is_config_path) {
      ScenarioConfig cfg = load_config(preset_or_config);
      return run_scenario(cfg, opts);
    }
    const ScenarioConfig* p = find_preset(preset_or_config);
    if (!p) {
      result.exit_code = 2;
      result.message = "unknown preset: " + preset_or_config;
      return result;
    }
    return run_scenario(*p, opts);
  } catch (const std::invalid_argument& e) {
    result.exit_code = 2;
    result.message = e.what();
    return result;
  } catch (const std::exception& e) {
    result.exit_code = 1;
    result.message = e.what();
    return result;
  }
}

}  // namespace viro

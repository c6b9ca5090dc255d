#pragma once

#include <optional>
#include <string>
#include <vector>

#include "virodyn/dynamics.hpp"
#include "virodyn/model.hpp"

namespace viro {

enum class AnalysisKind { sweep, region_map, integrate, cycle, critical_points, equilibria };

std::string analysis_kind_name(AnalysisKind k);
AnalysisKind analysis_kind_from_name(const std::string& s);

struct GridSpec {
  std::string param = "b";
  double min = 1.2;
  double max = 40.0;
  int n = 400;
};

struct ScenarioConfig {
  std::string name;
  std::string figure;       // figure the preset reproduces (manifest metadata)
  std::string description;
  ModelParams params;
  AnalysisKind kind = AnalysisKind::equilibria;

  GridSpec grid;  // sweep / critical_points

  // region_map
  double b_min = 1.2, b_max = 30.0;
  int nb = 200;
  double beta_min = 0.02, beta_max = 0.3;
  int nbeta = 200;

  // integrate
  std::vector<State> inits;
  double t0 = 0.0, t1 = 400.0;
  double sample_dt = 0.1;
  bool with_lyapunov = false;
  double lyapunov_horizon = 2000.0;

  // cycle
  double seed_t1 = 2000.0;            // seed orbit horizon before cycle search
  bool continue_branch = false;       // pseudo-arclength continuation
  double hopf_bracket_lo = 0.0, hopf_bracket_hi = 0.0;  // Hopf location bracket
  double hopf_offset = 0.03;          // seed distance from the Hopf point
  double range_lo = 0.0, range_hi = 0.0;  // continuation parameter range

  IntegratorOptions integ;
};

struct RunOptions {
  std::string out_dir;  // empty: $VIRODYN_OUT or ./out
  int jobs = 1;
  std::optional<double> tol_abs;
  std::optional<double> tol_rel;
  std::string format = "csv";  // csv | json
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 numerical failure, 2 usage/config error
  std::vector<std::string> files;
  std::string message;
};

/// Builtin presets, one per reproduced figure.
const std::vector<ScenarioConfig>& presets();
const ScenarioConfig* find_preset(const std::string& name);

/// Parse a JSON scenario config.
ScenarioConfig load_config(const std::string& path);

/// Execute and write data files plus manifest.json under out_dir/<name>/.
RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opts);

/// Resolve a preset name or --config path, then run.
RunResult run_named(const std::string& preset_or_config, bool is_config_path,
                    const RunOptions& opts);

}  // namespace viro

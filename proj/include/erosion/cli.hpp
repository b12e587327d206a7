#pragma once

#include <map>
#include <string>
#include <vector>

#include "erosion/solver.hpp"

namespace erosion {

inline constexpr const char* tool_version = "1.0.0";

struct RunSettings {
  SimConfig sim;
  // Spectral options.
  std::string convention = "paper";  // paper | flow
  std::string wavenumbers = "physical";  // stability window in 1/m, or nondimensional
  double xi_min = 0, xi_max = 20, eta_min = 0, eta_max = 300;
  int map_nx = 256, map_ny = 256;
  double margin = 1e-10;
  std::string regime = "high";  // low1 | low2 | high
  double ray_xi = 1, ray_eta = 1;
  double r_min = 1e2, r_max = 1e4;
  int ray_points = 9;
  int row = -1;  // analyze row, -1 selects the outflow row
  bool c0_set = false;
};

// Parses `key = value` lines with `#` comments; throws ConfigError.
RunSettings parse_config_text(const std::string& text);
RunSettings parse_config(const std::string& path);

// Canonical `key = value` listing of every setting.
std::string render_config(const RunSettings& s);

// Parameter set whose scales define the spectral nondimensionalization.
PhysicalParams spectral_scales(const RunSettings& s);
NondimParams spectral_params(const RunSettings& s);

struct CommandOptions {
  std::string out_dir;
  bool force = false;
  int threads = 1;
  std::string config_path;
};

void prepare_output_dir(const std::string& dir, bool force);
void write_manifest(const RunSettings& s, const std::string& command, const CommandOptions& opt);

void cmd_simulate(const RunSettings& s, const CommandOptions& opt);
void cmd_stability_map(const RunSettings& s, const CommandOptions& opt);
int cmd_analyze(const std::string& path, const RunSettings& s, const CommandOptions& opt);
void cmd_expand(const RunSettings& s, const CommandOptions& opt);

// Maps an exception to the documented exit code (1 config, 2 numerical, 3 I/O).
int exit_code_for(const std::exception& e);

}  // namespace erosion

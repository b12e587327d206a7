#include "erosion/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "erosion/analysis.hpp"
#include "erosion/errors.hpp"
#include "erosion/io.hpp"
#include "erosion/spectral.hpp"

namespace erosion {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  double out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("not a number");
  return out;
}

long long to_int(const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("not an integer");
  return out;
}

struct Key {
  std::function<void(RunSettings&, const std::string&)> set;
  std::function<std::string(const RunSettings&)> get;
};

Key real(double PhysicalParams::*f) {
  return {[f](RunSettings& s, const std::string& v) { s.sim.phys.*f = to_double(v); },
          [f](const RunSettings& s) { return format_double(s.sim.phys.*f); }};
}

Key sim_real(double SimConfig::*f) {
  return {[f](RunSettings& s, const std::string& v) { s.sim.*f = to_double(v); },
          [f](const RunSettings& s) { return format_double(s.sim.*f); }};
}

Key opt_real(double RunSettings::*f) {
  return {[f](RunSettings& s, const std::string& v) { s.*f = to_double(v); },
          [f](const RunSettings& s) { return format_double(s.*f); }};
}

Key opt_int(int RunSettings::*f) {
  return {[f](RunSettings& s, const std::string& v) { s.*f = static_cast<int>(to_int(v)); },
          [f](const RunSettings& s) { return std::to_string(s.*f); }};
}

const std::vector<std::pair<std::string, Key>>& keys() {
  static const std::vector<std::pair<std::string, Key>> table = {
      {"Lx", real(&PhysicalParams::Lx)},
      {"Ly", real(&PhysicalParams::Ly)},
      {"V", real(&PhysicalParams::V)},
      {"h_ref", real(&PhysicalParams::h_ref)},
      {"m_exp", real(&PhysicalParams::m_exp)},
      {"n_exp", real(&PhysicalParams::n_exp)},
      {"rho_s", real(&PhysicalParams::rho_s)},
      {"c_sat", real(&PhysicalParams::c_sat)},
      {"e", real(&PhysicalParams::e)},
      {"s", real(&PhysicalParams::s)},
      {"theta", real(&PhysicalParams::theta)},
      {"theta_deg",
       {[](RunSettings& s, const std::string& v) { s.sim.phys.theta = to_double(v) * std::numbers::pi / 180; },
        nullptr}},
      {"K", real(&PhysicalParams::K)},
      {"H", real(&PhysicalParams::H)},
      {"Z", real(&PhysicalParams::Z)},
      {"Nx", {[](RunSettings& s, const std::string& v) { s.sim.geom.Nx = static_cast<int>(to_int(v)); },
              [](const RunSettings& s) { return std::to_string(s.sim.geom.Nx); }}},
      {"Ny", {[](RunSettings& s, const std::string& v) { s.sim.geom.Ny = static_cast<int>(to_int(v)); },
              [](const RunSettings& s) { return std::to_string(s.sim.geom.Ny); }}},
      {"dt_max", sim_real(&SimConfig::dt_max)},
      {"t_end", sim_real(&SimConfig::t_end)},
      {"perturb_amplitude", sim_real(&SimConfig::perturb_amplitude)},
      {"seed", {[](RunSettings& s, const std::string& v) { s.sim.rng_seed = static_cast<std::uint64_t>(to_int(v)); },
                [](const RunSettings& s) { return std::to_string(s.sim.rng_seed); }}},
      {"h0", sim_real(&SimConfig::h0)},
      {"c0", {[](RunSettings& s, const std::string& v) {
                s.sim.c0 = to_double(v);
                s.c0_set = true;
              },
              [](const RunSettings& s) { return format_double(s.sim.c0); }}},
      {"tolerance", sim_real(&SimConfig::tolerance)},
      {"max_iterations",
       {[](RunSettings& s, const std::string& v) { s.sim.max_iterations = static_cast<int>(to_int(v)); },
        [](const RunSettings& s) { return std::to_string(s.sim.max_iterations); }}},
      {"checkpoint_every", sim_real(&SimConfig::checkpoint_every)},
      {"diagnostics_every", sim_real(&SimConfig::diagnostics_every)},
      {"vx_min", sim_real(&SimConfig::vx_min)},
      {"convention", {[](RunSettings& s, const std::string& v) {
                        if (v != "paper" && v != "flow") throw std::invalid_argument("expected paper or flow");
                        s.convention = v;
                      },
                      [](const RunSettings& s) { return s.convention; }}},
      {"wavenumbers", {[](RunSettings& s, const std::string& v) {
                         if (v != "physical" && v != "nondimensional")
                           throw std::invalid_argument("expected physical or nondimensional");
                         s.wavenumbers = v;
                       },
                       [](const RunSettings& s) { return s.wavenumbers; }}},
      {"xi_min", opt_real(&RunSettings::xi_min)},
      {"xi_max", opt_real(&RunSettings::xi_max)},
      {"eta_min", opt_real(&RunSettings::eta_min)},
      {"eta_max", opt_real(&RunSettings::eta_max)},
      {"map_nx", opt_int(&RunSettings::map_nx)},
      {"map_ny", opt_int(&RunSettings::map_ny)},
      {"margin", opt_real(&RunSettings::margin)},
      {"regime", {[](RunSettings& s, const std::string& v) {
                    if (v != "low1" && v != "low2" && v != "high")
                      throw std::invalid_argument("expected low1, low2 or high");
                    s.regime = v;
                  },
                  [](const RunSettings& s) { return s.regime; }}},
      {"ray_xi", opt_real(&RunSettings::ray_xi)},
      {"ray_eta", opt_real(&RunSettings::ray_eta)},
      {"r_min", opt_real(&RunSettings::r_min)},
      {"r_max", opt_real(&RunSettings::r_max)},
      {"ray_points", opt_int(&RunSettings::ray_points)},
      {"row", opt_int(&RunSettings::row)},
  };
  return table;
}

void finalize(RunSettings& s, bool h0_set) {
  auto& p = s.sim.phys;
  p = with_scales(p);
  const auto bad = validate(p);
  if (!bad.empty()) throw ConfigError("invalid parameters: " + bad.front());
  if (!h0_set) s.sim.h0 = p.h_ref;
  if (!s.c0_set) s.sim.c0 = flat_concentration(p, s.sim.h0);
  const int Nx = s.sim.geom.Nx, Ny = s.sim.geom.Ny;
  if (Nx < 4 || Ny < 4) throw ConfigError("Nx and Ny must be at least 4");
  s.sim.geom = GridGeom::make(Nx, Ny, p.Lx, p.Ly, p.theta);
  if (!(s.sim.t_end > 0)) throw ConfigError("t_end must be positive");
  if (!(s.sim.dt_max > 0)) throw ConfigError("dt_max must be positive");
  if (!(s.sim.perturb_amplitude >= 0)) throw ConfigError("perturb_amplitude must be nonnegative");
  if (!(s.sim.tolerance > 0)) throw ConfigError("tolerance must be positive");
  if (!(s.sim.h0 > 0)) throw ConfigError("h0 must be positive");
  if (s.map_nx < 1 || s.map_ny < 1) throw ConfigError("map resolution must be positive");
  if (s.ray_points < 2 || !(s.r_min > 0) || !(s.r_max > s.r_min)) throw ConfigError("invalid expansion ray");
}

}  // namespace

RunSettings parse_config_text(const std::string& text) {
  RunSettings s;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool h0_set = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(), [&](const auto& kv) { return kv.first == key; });
    if (it == table.end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    try {
      it->second.set(s, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": bad value for '" + key + "': '" + value + "' (" +
                        e.what() + ")");
    }
    if (key == "h0") h0_set = true;
  }
  finalize(s, h0_set);
  return s;
}

RunSettings parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

std::string render_config(const RunSettings& s) {
  std::string out;
  for (const auto& [key, k] : keys()) {
    if (!k.get) continue;
    out += key + " = " + k.get(s) + "\n";
  }
  return out;
}

PhysicalParams spectral_scales(const RunSettings& s) {
  return s.convention == "flow" ? flow_params(s.sim.phys) : with_scales(s.sim.phys);
}

NondimParams spectral_params(const RunSettings& s) { return nondimensionalize(spectral_scales(s)); }

void prepare_output_dir(const std::string& dir, bool force) {
  if (dir.empty()) throw ConfigError("an output directory is required (--out)");
  std::error_code ec;
  if (fs::exists(dir, ec) && !fs::is_empty(dir, ec) && !force)
    throw IoError("output directory " + dir + " is not empty; pass --force to overwrite");
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
}

void write_manifest(const RunSettings& s, const std::string& command, const CommandOptions& opt) {
  const auto now = std::chrono::system_clock::now();
  nlohmann::ordered_json j;
  j["command"] = command;
  j["output_directory"] = opt.out_dir;
  j["seed"] = s.sim.rng_seed;
  j["tool_version"] = tool_version;
  j["wall_clock_start"] =
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
  nlohmann::ordered_json cfg;
  for (const auto& [key, k] : keys())
    if (k.get) cfg[key] = k.get(s);
  j["config"] = cfg;
  {
    std::ofstream f(fs::path(opt.out_dir) / "manifest.json");
    if (!f) throw IoError("cannot write manifest in " + opt.out_dir);
    f << j.dump(2) << "\n";
  }
  std::ofstream f(fs::path(opt.out_dir) / "config.resolved");
  if (!f) throw IoError("cannot write resolved config in " + opt.out_dir);
  f << render_config(s);
}

void cmd_simulate(const RunSettings& s, const CommandOptions& opt) {
  prepare_output_dir(opt.out_dir, opt.force);
  write_manifest(s, "simulate", opt);
  const fs::path out(opt.out_dir);
  const auto tr = run(s.sim);
  std::clog << "quasi-stationary ratio " << tr.quasi_stationary_ratio << ", dt " << tr.dt << " s, " << tr.steps
            << " steps\n";
  for (std::size_t k = 0; k < tr.checkpoints.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "checkpoint_%04zu.erog", k);
    write_grid(tr.checkpoints[k], s.sim.geom, (out / name).string());
  }
  write_grid(tr.final_state, s.sim.geom, (out / "final.erog").string());
  export_csv(diagnostics_table(tr.diagnostics), (out / "diagnostics.csv").string());
  const Field& z = tr.final_state.z_tilde;
  const double zr = std::max(z.abs().maxCoeff(), 1e-300);
  export_pgm(z, (out / "final_z.pgm").string(), -zr, zr);
  const Field& h = tr.final_state.h;
  double lo = h.minCoeff(), hi = h.maxCoeff();
  if (!(hi > lo)) {
    lo -= 1e-12;
    hi += 1e-12;
  }
  export_pgm(h, (out / "final_h.pgm").string(), lo, hi);
}

void cmd_stability_map(const RunSettings& s, const CommandOptions& opt) {
  prepare_output_dir(opt.out_dir, opt.force);
  write_manifest(s, "stability_map", opt);
  const fs::path out(opt.out_dir);
  const NondimParams nd = spectral_params(s);
  const auto sys = assemble_system_matrices(nd);
  const double L = s.wavenumbers == "physical" ? spectral_scales(s).L : 1.0;
  auto r = stability_map(sys, {s.xi_min * L, s.xi_max * L}, {s.eta_min * L, s.eta_max * L}, s.map_nx, s.map_ny,
                         s.margin, opt.threads);
  r.xi_axis /= L;
  r.eta_axis /= L;
  export_csv(raster_table(r), (out / "raster.csv").string());
  Eigen::ArrayXXd img(r.verdict.rows(), r.verdict.cols());
  for (Eigen::Index j = 0; j < img.rows(); ++j)
    for (Eigen::Index i = 0; i < img.cols(); ++i)
      img(j, i) = r.verdict(j, i) == Verdict::stable ? 1.0 : r.verdict(j, i) == Verdict::unstable ? 0.0 : 0.5;
  export_pgm_image(img, (out / "verdict.pgm").string(), 0, 1);
  std::cout << "unstable pixels " << r.count(Verdict::unstable) << " of " << r.growth.size() << "\n";
}

int cmd_analyze(const std::string& path, const RunSettings& s, const CommandOptions& opt) {
  const ErogFile f = read_grid(path);
  const int Nx = static_cast<int>(f.state.z_tilde.rows());
  const int row = s.row < 0 ? Nx - 1 : s.row;
  if (row >= Nx) throw ConfigError("row " + std::to_string(row) + " outside the grid");
  const auto spec = transverse_spectrum(f.state.z_tilde, row, (row + 0.5) * f.dx);
  const int mode = dominant_mode(spec, true);
  if (!opt.out_dir.empty()) {
    prepare_output_dir(opt.out_dir, opt.force);
    write_manifest(s, "analyze", opt);
    const double Ly = f.dy * static_cast<double>(f.state.z_tilde.cols());
    export_csv(spectrum_table(spec, Ly), (fs::path(opt.out_dir) / "spectrum.csv").string());
  }
  std::cout << "dominant mode " << mode << "\n";
  return mode;
}

void cmd_expand(const RunSettings& s, const CommandOptions& opt) {
  prepare_output_dir(opt.out_dir, opt.force);
  write_manifest(s, "expand", opt);
  const NondimParams nd = spectral_params(s);
  const auto sys = assemble_system_matrices(nd);
  const double norm = std::hypot(s.ray_xi, s.ray_eta);
  if (!(norm > 0)) throw ConfigError("ray direction must be nonzero");
  CsvTable t{{"radius", "xi", "eta", "exact_re_1", "exact_im_1", "exact_re_2", "exact_im_2", "exact_re_3",
              "exact_im_3", "approx_re_1", "approx_im_1", "approx_re_2", "approx_im_2", "approx_re_3", "approx_im_3",
              "error_1", "error_2", "error_3"},
             {}};
  for (int k = 0; k < s.ray_points; ++k) {
    const double r = s.r_min * std::pow(s.r_max / s.r_min, static_cast<double>(k) / (s.ray_points - 1));
    const double xi = r * s.ray_xi / norm, eta = r * s.ray_eta / norm;
    const auto exact = eigenvalues3(spectral_matrix(sys, xi, eta));
    ComplexVector3<double> approx;
    if (s.regime == "high")
      approx = high_freq_eigen(nd, xi, eta);
    else
      approx = low_freq_eigen(nd, xi, eta,
                              s.regime == "low1" ? LowFreqRegime::xi_of_order_eta2 : LowFreqRegime::eta2_small_vs_xi);
    const auto err = match_errors(exact, approx);
    std::vector<double> row{r, xi, eta};
    for (int q = 0; q < 3; ++q) row.insert(row.end(), {exact[q].real(), exact[q].imag()});
    for (int q = 0; q < 3; ++q) row.insert(row.end(), {approx[q].real(), approx[q].imag()});
    for (int q = 0; q < 3; ++q)
      row.push_back(s.regime == "high" ? err[q] / std::abs(approx[q]) : err[q] / (xi * xi + eta * eta));
    t.rows.push_back(std::move(row));
  }
  export_csv(t, (fs::path(opt.out_dir) / "expansion.csv").string());
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 1;
  if (dynamic_cast<const NumericalError*>(&e)) return 2;
  if (dynamic_cast<const IoError*>(&e)) return 3;
  if (dynamic_cast<const std::domain_error*>(&e)) return 1;
  return 2;
}

}  // namespace erosion

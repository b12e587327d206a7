#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "erosion/analysis.hpp"
#include "erosion/io.hpp"
#include "erosion/solver.hpp"
#include "erosion/spectral.hpp"

using namespace erosion;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

NondimParams table_nd(double K_nd) {
  auto nd = nondimensionalize(table1());
  nd.K_nd = K_nd;
  return nd;
}

NondimParams with_exponents(NondimParams nd, double m, double n) {
  nd.m_exp = m;
  nd.n_exp = n;
  nd.N_coef = nd.alpha * nd.a * n * nd.c_bar / (nd.tan_theta * nd.tan_theta);
  nd.M_coef = nd.a * m * nd.c_bar / nd.h_bar;
  return nd;
}

Outcome fixed_point() {
  auto cfg = make_config(table1(), 200, 50);
  cfg.perturb_amplitude = 0;
  cfg.t_end = 7200;
  const auto t0 = std::chrono::steady_clock::now();
  const auto tr = run(cfg);
  const double wall = seconds_since(t0);
  const double z = tr.final_state.z_tilde.abs().maxCoeff();
  const double h = (tr.final_state.h - cfg.h0).abs().maxCoeff();
  return {z <= 1e-12 && h <= 1e-10 && wall <= 120,
          fmt("max|z~| = %.3g m, max|h - h0| = %.3g m, %d steps, %.1f s", z, h, tr.steps, wall)};
}

Outcome routh_hurwitz_equivalence() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0, 1);
  int samples = 0, mismatches = 0, draws = 0;
  while (samples < 10000) {
    ++draws;
    NondimParams nd;
    nd.a = std::pow(10, -3 + 4 * u(rng));
    nd.alpha = std::pow(10, -7 + 7 * u(rng));
    nd.h_bar = std::pow(10, -1 + 2 * u(rng));
    nd.c_bar = std::pow(10, -1 + 4 * u(rng));
    nd.rho_bar = std::pow(10, u(rng));
    nd.tan_theta = std::pow(10, -0.5 + u(rng));
    nd = with_exponents(nd, 0.1 + 2.9 * u(rng), 0.1 + 4.9 * u(rng));
    nd.K_nd = u(rng) < 0.3 ? 0.0 : 2 * u(rng) * k_threshold(nd);
    const double xi = (2 * u(rng) - 1) * std::pow(10, -3 + 5 * u(rng));
    const double eta = (2 * u(rng) - 1) * std::pow(10, -3 + 5 * u(rng));
    const double g = growth_rate(assemble_system_matrices(nd), xi, eta);
    if (!(std::abs(g) > 1e-6)) continue;
    ++samples;
    if (routh_hurwitz(nd, xi, eta).stable != (g < 0)) ++mismatches;
  }
  return {mismatches == 0, fmt("%d mismatches in %d samples (%d drawn)", mismatches, samples, draws)};
}

Outcome k_zero_wedge() {
  bool pass = true;
  std::string detail;
  std::vector<double> stable_fraction;
  const auto base = table_nd(0);
  for (auto [m, n] : {std::pair{1.6, 0.8}, {1.6, 1.76}, {1.6, 3.2}, {1.6, 16.0}}) {
    const auto nd = with_exponents(base, m, n);
    const auto r = stability_map(assemble_system_matrices(nd), {0, 20}, {0, 300}, 256, 256, 0.0, 4);
    long compared = 0, mismatch = 0, excluded = 0, literal_disagree = 0;
    const bool m_small = m < nd.rho_bar / nd.c_bar;
    for (int j = 0; j < 256; ++j)
      for (int i = 0; i < 256; ++i) {
        const double xi = r.xi_axis[i], eta = r.eta_axis[j];
        const double lhs = eta * eta * m, rhs = xi * xi * (n - m);
        if (std::abs(lhs - rhs) <= 1e-6 * std::max(lhs, std::abs(rhs)) || r.verdict(j, i) == Verdict::marginal) {
          ++excluded;
          continue;
        }
        ++compared;
        const bool predicted = lhs < rhs;
        const bool stable = r.verdict(j, i) == Verdict::stable;
        if (stable != predicted) ++mismatch;
        if (stable != (m_small && predicted)) ++literal_disagree;
      }
    stable_fraction.push_back(static_cast<double>(r.count(Verdict::stable)) / r.growth.size());
    pass = pass && mismatch == 0;
    detail += fmt("(m,n)=(%g,%g): %ld/%ld mismatches, %ld excluded, stable fraction %.4f, literal form with "
                  "m < rho/c disagrees on %ld; ",
                  m, n, mismatch, compared, excluded, stable_fraction.back(), literal_disagree);
  }
  const bool widening = stable_fraction[0] == 0 && stable_fraction[0] < stable_fraction[1] &&
                        stable_fraction[1] < stable_fraction[2] && stable_fraction[2] < stable_fraction[3];
  detail += widening ? "wedge widens with n" : "wedge does not widen with n";
  return {pass && widening, detail};
}

Outcome threshold_theorem() {
  const double thr = k_threshold(nondimensionalize(table1()));
  const auto above = stability_map(assemble_system_matrices(table_nd(1.05 * thr)), {0, 20}, {0, 300}, 512, 512,
                                   1e-10, 4);
  std::string offenders;
  int listed = 0;
  for (int j = 0; j < 512 && listed < 5; ++j)
    for (int i = 0; i < 512 && listed < 5; ++i)
      if (above.verdict(j, i) == Verdict::unstable) {
        offenders += fmt(" (%.6g, %.6g)", above.xi_axis[i], above.eta_axis[j]);
        ++listed;
      }
  const auto below = stability_map(assemble_system_matrices(table_nd(0.95 * thr)), {0, 1e-2}, {0, 1e-1}, 256, 256,
                                   1e-10, 4);
  const long n_above = above.count(Verdict::unstable), n_below = below.count(Verdict::unstable);
  return {n_above == 0 && n_below >= 1,
          fmt("1.05 thr: %ld unstable pixels%s; 0.95 thr on [0,1e-2]x[0,1e-1]: %ld unstable pixels", n_above,
              offenders.c_str(), n_below)};
}

double scaled_worst(const ComplexVector3<double>& exact, const ComplexVector3<double>& approx, double r2) {
  const auto err = match_errors(exact, approx, 2);
  return std::max(err[0], err[1]) / r2;
}

Outcome expansions() {
  bool pass = true;
  std::string detail;
  const double thr = k_threshold(nondimensionalize(table1()));
  struct Path {
    const char* name;
    LowFreqRegime regime;
    std::function<std::pair<double, double>(double)> at;
  };
  const std::vector<Path> paths = {
      {"regime xi~eta^2, xi=r^2/2 eta=r", LowFreqRegime::xi_of_order_eta2, [](double r) { return std::pair{0.5 * r * r, r}; }},
      {"regime xi~eta^2, eta axis", LowFreqRegime::xi_of_order_eta2, [](double r) { return std::pair{0.0, r}; }},
      {"regime eta^2<<xi, xi axis", LowFreqRegime::eta2_small_vs_xi, [](double r) { return std::pair{r, 0.0}; }},
      {"regime eta^2<<xi, ray (1,1)", LowFreqRegime::eta2_small_vs_xi,
       [](double r) { return std::pair{r / std::sqrt(2.0), r / std::sqrt(2.0)}; }},
  };
  for (double frac : {0.05, 0.5}) {
    const auto nd = table_nd(frac * thr);
    const auto sys = assemble_system_matrices(nd);
    for (const auto& p : paths) {
      double first = 0, prev = 1e300, last = 0;
      bool monotone = true;
      for (int k = 4; k <= 12; ++k) {
        const double r = std::ldexp(1.0, -k);
        const auto [xi, eta] = p.at(r);
        const double w = scaled_worst(eigenvalues3(spectral_matrix(sys, xi, eta)), low_freq_eigen(nd, xi, eta, p.regime),
                                      xi * xi + eta * eta);
        if (k == 4) first = w;
        monotone = monotone && w < prev;
        prev = last = w;
      }
      const bool ok = monotone && last <= 1e-3 * first;
      pass = pass && ok;
      detail += fmt("K=%g thr %s: %s, ratio %.3g; ", frac, p.name, monotone ? "monotone" : "not monotone", last / first);
    }
  }
  const auto nd = table_nd(thr / 20);
  const auto sys = assemble_system_matrices(nd);
  for (auto [dx, dy] : {std::pair{0.0, 1.0}, {1.0, 1.0}, {1.0, 0.0}}) {
    const double r = 1e4, n = std::hypot(dx, dy);
    const double xi = r * dx / n, eta = r * dy / n;
    const auto ap = high_freq_eigen(nd, xi, eta);
    const auto err = match_errors(eigenvalues3(spectral_matrix(sys, xi, eta)), ap);
    double worst = 0;
    for (int k = 0; k < 3; ++k) worst = std::max(worst, err[k] / std::abs(ap[k]));
    pass = pass && worst <= 1e-2;
    detail += fmt("high r=1e4 ray (%g,%g): relative errors %.3g %.3g %.3g; ", dx, dy, err[0] / std::abs(ap[0]),
                  err[1] / std::abs(ap[1]), err[2] / std::abs(ap[2]));
  }
  return {pass, detail};
}

Outcome boundary_formulas() {
  const double thr = k_threshold(nondimensionalize(table1()));
  int line_ok = 0, curve_ok = 0;
  double max_line_r = 0, max_curve_r = 0;
  for (double frac : {0.2, 0.5, 0.9, 0.999}) {
    const auto nd = table_nd(frac * thr);
    const auto sys = assemble_system_matrices(nd);
    const double s = boundary_slope(nd);
    for (double r : {1e-3, 3e-4, 1e-4, 3e-5, 1e-5}) {
      const double xi = r / std::hypot(1.0, s);
      max_line_r = std::max(max_line_r, r);
      const double below = growth_rate(sys, xi, 0.9 * s * xi), above = growth_rate(sys, xi, 1.1 * s * xi);
      if (below < 0 && above > 0) ++line_ok;
    }
  }
  const auto nd = table_nd(0.998 * thr);
  const auto sys = assemble_system_matrices(nd);
  for (int k = 0; k < 20; ++k) {
    const double xi = std::pow(10.0, -14 + 4.0 * k / 19);
    const double eta = boundary_curve(nd, xi);
    max_curve_r = std::max(max_curve_r, std::hypot(xi, eta));
    if (growth_rate(sys, xi, 0.9 * eta) > 0 && growth_rate(sys, xi, 1.1 * eta) < 0) ++curve_ok;
  }
  return {line_ok == 20 && curve_ok == 20 && max_line_r <= 1e-2 && max_curve_r <= 1e-2,
          fmt("line: %d/20 sign changes (radius <= %.3g); curve at K = 0.998 thr: %d/20 (radius <= %.3g)", line_ok,
              max_line_r, curve_ok, max_curve_r)};
}

Outcome most_unstable() {
  const auto p = flow_params(table1());
  std::vector<double> etas;
  for (int n = 0; n <= 25; ++n) etas.push_back(wavenumber_to_nd(p, 2 * std::numbers::pi * n / p.Ly));
  bool pass = true;
  std::string detail;
  for (double div : {20.0, 50.0}) {
    auto q = p;
    q.K = K_e / div;
    const auto best = most_unstable_mode(assemble_system_matrices(nondimensionalize(q)), {0, wavenumber_to_nd(p, 200)},
                                         etas, 201);
    const int mode = static_cast<int>(std::lround(best.eta / etas[1]));
    pass = pass && best.xi == 0.0 && best.eta == etas[1];
    detail += fmt("K_e/%g: argmax xi = %g /m, transverse mode %d, growth %.3g /h; ", div, best.xi / p.L, mode,
                  rate_to_dim(q, best.growth) * 3600);
  }
  return {pass, detail};
}

struct ChannelRun {
  bool detected = false;
  double t = 0;
  int mode = 0;
  double ratio = 0;
  double wall = 0;
};

ChannelRun run_to_detection(double K, double t_max) {
  auto phys = table1();
  phys.K = K;
  auto cfg = make_config(phys, 200, 50);
  cfg.t_end = t_max;
  const int row = cfg.geom.Nx - 1;
  const double level = spectrum_level(transverse_spectrum(init_state(cfg).z_tilde, row));
  ChannelRun out;
  const auto t0 = std::chrono::steady_clock::now();
  run(cfg, [&](const GridState& s, const Diagnostic&) {
    const auto spec = transverse_spectrum(s.z_tilde, row);
    out.mode = dominant_mode(spec);
    out.t = s.t;
    out.ratio = spec.magnitudes[out.mode] / level;
    out.detected = out.ratio >= 5;
    return !out.detected;
  });
  out.wall = seconds_since(t0);
  return out;
}

Outcome channelization() {
  const auto a = run_to_detection(K_e / 20, 72 * 3600.0);
  const auto b = run_to_detection(K_e / 50, 72 * 3600.0);

  auto cfg = make_config(table1(), 200, 50);
  cfg.t_end = 900;
  const auto t0 = std::chrono::steady_clock::now();
  const auto early = run(cfg);
  cfg.t_end = 7200;
  const auto late = run_from(cfg, early.final_state);
  const double wall = seconds_since(t0);
  const double amp_early = perturbation_amplitude(early.final_state);
  const double amp_late = perturbation_amplitude(late.final_state);

  const bool pass = a.detected && a.mode == 2 && b.detected && b.mode >= 2 && b.mode <= 5 && amp_late < amp_early &&
                    a.wall <= 600 && b.wall <= 600 && wall <= 600;
  return {pass, fmt("K_e/20: %s at t = %.2f h, mode %d, peak/level %.2f (%.0f s); K_e/50: %s at t = %.2f h, "
                    "mode %d, peak/level %.2f (%.0f s); K_e: amplitude %.4g m at 0.25 h, %.4g m at 2 h (%.0f s)",
                    a.detected ? "detected" : "not detected", a.t / 3600, a.mode, a.ratio, a.wall,
                    b.detected ? "detected" : "not detected", b.t / 3600, b.mode, b.ratio, b.wall, amp_early, amp_late,
                    wall)};
}

Outcome scheme_orders() {
  // Creep decay against the discrete amplification factor.
  auto cfg = make_config(table1(), 32, 16);
  const auto& g = cfg.geom;
  const SourceField bal{Field::Constant(g.Nx, g.Ny, 1e-9), Field::Constant(g.Nx, g.Ny, 1e-9)};
  const int N = 3;
  Field mode(g.Nx, g.Ny);
  for (int j = 0; j < g.Ny; ++j) mode.col(j).setConstant(1e-5 * std::cos(2 * std::numbers::pi * N * j / g.Ny));
  const double dt = default_dt(cfg);
  Field z = mode;
  for (int k = 0; k < 50; ++k) z = step_z(z, bal, cfg, dt);
  const double factor = diffusion_amplification(cfg, dt, 0.0, 2 * std::numbers::pi * N / g.Ny);
  const double decay_err = (z - std::pow(factor, 50) * mode).abs().maxCoeff() / 1e-5;

  // Concentration march on a one-dimensional manufactured source.
  auto march_error = [](int Nx) {
    auto p = table1();
    p.s = 1e-30;
    auto c = make_config(p, Nx, 4);
    c.c0 = 100;
    GridState s;
    s.h = Field::Constant(Nx, 4, 5e-4);
    s.vx = Field::Constant(Nx, 4, 1.0);
    s.vy = Field::Zero(Nx, 4);
    s.c = Field::Zero(Nx, 4);
    SourceField src{Field(Nx, 4), Field::Zero(Nx, 4)};
    const double e0 = 1e-7, k = 2 * std::numbers::pi / p.Lx;
    for (int i = 0; i < Nx; ++i) {
      const double x = i * c.geom.dx;
      src.E.row(i).setConstant(e0 * (1.5 + 2 * x / p.Lx + std::sin(k * x)));
    }
    const Field out = march_c(s, src, c);
    const double x = (Nx - 1) * c.geom.dx;
    const double exact = c.c0 + p.rho_s / 5e-4 * e0 * (1.5 * x + x * x / p.Lx + (1 - std::cos(k * x)) / k);
    return std::abs(out(Nx - 1, 0) - exact);
  };
  const double e1 = march_error(50), e2 = march_error(100), e3 = march_error(200);
  const double r1 = e2 / e1, r2 = e3 / e2;
  const bool halves = std::abs(r1 - 0.5) <= 0.05 && std::abs(r2 - 0.5) <= 0.05;

  // Water height against a dense LU solve.
  auto small = make_config(table1(), 8, 8);
  Field zz(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      zz(i, j) = 2e-5 * std::sin(2 * std::numbers::pi * j / 8.0) * std::cos(0.7 * i) + 1e-5 * std::cos(0.4 * i * j);
  const Field hp = Field::Constant(8, 8, small.h0) + 0.2 * zz;
  const Field hn = solve_h(hp, zz, small);
  const WaterOperator A(hp, zz, small.geom, small.h0);
  const Eigen::VectorXd dense = A.dense().partialPivLu().solve(A.rhs());
  const double solve_err =
      (dense - Eigen::Map<const Eigen::VectorXd>(hn.data(), hn.size())).cwiseAbs().maxCoeff() / small.h0;

  return {decay_err <= 1e-12 && halves && solve_err <= 1e-8,
          fmt("creep decay error %.3g, march error ratios %.4f %.4f, solve_h relative deviation %.3g", decay_err, r1,
              r2, solve_err)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / fmt("erosion_acceptance_%d", static_cast<int>(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path config = root / "run.cfg";
  std::ofstream(config) << "Nx = 32\nNy = 16\nt_end = 3600\ncheckpoint_every = 1200\nK = 6.944444444444445e-09\n"
                           "map_nx = 64\nmap_ny = 48\nxi_max = 5\neta_max = 100\n";
  const std::string cli = EROSION_CLI_PATH;
  int failures = 0;
  for (const char* cmd : {"simulate", "stability_map"})
    for (int threads : {1, 4}) {
      const fs::path out = root / fmt("%s_%d", cmd, threads);
      const std::string line = fmt("\"%s\" %s --config \"%s\" --out \"%s\" --threads %d > /dev/null 2>&1", cli.c_str(), cmd,
                                   config.string().c_str(), out.string().c_str(), threads);
      if (std::system(line.c_str()) != 0) ++failures;
    }
  int files = 0, differing = 0;
  for (const char* cmd : {"simulate", "stability_map"}) {
    const fs::path one = root / fmt("%s_1", cmd), many = root / fmt("%s_4", cmd);
    if (!fs::exists(one)) continue;
    for (const auto& entry : fs::directory_iterator(one)) {
      const auto ext = entry.path().extension();
      if (ext != ".erog" && ext != ".csv" && ext != ".pgm") continue;
      ++files;
      if (slurp(entry.path()) != slurp(many / entry.path().filename())) ++differing;
    }
  }
  fs::remove_all(root);
  return {failures == 0 && files > 0 && differing == 0,
          fmt("%d command failures, %d output files compared across 1 and 4 threads, %d differ", failures, files,
              differing)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"steady-state fixed point", fixed_point},
      {"Routh-Hurwitz agrees with eigenvalues", routh_hurwitz_equivalence},
      {"K = 0 closed form", k_zero_wedge},
      {"threshold theorem", threshold_theorem},
      {"low and high frequency expansions", expansions},
      {"boundary line and curve", boundary_formulas},
      {"most unstable mode", most_unstable},
      {"channelization", channelization},
      {"scheme order checks", scheme_orders},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] criterion %zu, %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

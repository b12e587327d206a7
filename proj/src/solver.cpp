#include "erosion/solver.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "erosion/analysis.hpp"
#include "erosion/errors.hpp"

namespace erosion {

namespace {

double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double s = 0;
  for (Eigen::Index k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Eigen::VectorXd flatten(const Field& f) { return Eigen::Map<const Eigen::VectorXd>(f.data(), f.size()); }

Field unflatten(const Eigen::VectorXd& v, int Nx, int Ny) {
  return Eigen::Map<const Field>(v.data(), Nx, Ny);
}

}  // namespace

SimConfig make_config(const PhysicalParams& phys, int Nx, int Ny) {
  SimConfig cfg;
  cfg.phys = phys;
  cfg.geom = GridGeom::make(Nx, Ny, phys.Lx, phys.Ly, phys.theta);
  cfg.h0 = phys.h_ref;
  cfg.c0 = flat_concentration(phys, phys.h_ref);
  return cfg;
}

GridState init_state(const SimConfig& cfg) {
  const auto& g = cfg.geom;
  GridState s;
  s.t = 0;
  s.h = Field::Constant(g.Nx, g.Ny, cfg.h0);
  s.c = Field::Constant(g.Nx, g.Ny, cfg.c0);
  s.z_tilde = Field::Zero(g.Nx, g.Ny);
  if (cfg.perturb_amplitude > 0) {
    std::mt19937_64 rng(cfg.rng_seed);
    for (int i = 0; i < g.Nx; ++i)
      for (int j = 0; j < g.Ny; ++j) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        s.z_tilde(i, j) = cfg.perturb_amplitude * (2 * u - 1);
      }
  }
  std::tie(s.vx, s.vy) = compute_velocity(s.h, s.z_tilde, g, cfg.phys.mu());
  return s;
}

std::pair<Field, Field> compute_velocity(const Field& h, const Field& z_tilde, const GridGeom& g, double mu) {
  const Field w = h + z_tilde;
  Field vx(g.Nx, g.Ny), vy(g.Nx, g.Ny);
  const double t = std::tan(g.theta);
  for (int i = 0; i < g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) {
      double gx;
      if (i == 0)
        gx = (w(1, j) - w(0, j)) / g.dx;
      else if (i == g.Nx - 1)
        gx = (w(i, j) - w(i - 1, j)) / g.dx;
      else
        gx = (w(i + 1, j) - w(i - 1, j)) / (2 * g.dx);
      const int jp = (j + 1) % g.Ny, jm = (j + g.Ny - 1) % g.Ny;
      const double gy = (w(i, jp) - w(i, jm)) / (2 * g.dy);
      vx(i, j) = mu * t - mu * gx;
      vy(i, j) = -mu * gy;
    }
  return {vx, vy};
}

SourceField erosion_deposition(const GridState& state, const PhysicalParams& p) {
  SourceField src;
  const Field speed = (state.vx.square() + state.vy.square()).sqrt();
  src.E = p.e * (state.h / p.H).pow(p.m_exp) * (speed / p.V).pow(p.n_exp);
  src.E = (speed > 0).select(src.E, 0.0);
  src.S = p.s * state.c / p.c_sat;
  return src;
}

WaterOperator::WaterOperator(const Field& hp, const Field& z, const GridGeom& g, double h0)
    : geom_(g), k_(static_cast<std::size_t>(g.Nx) * g.Ny), b_(Eigen::VectorXd::Zero(g.Nx * g.Ny)),
      diag_(g.Nx * g.Ny) {
  const double tdx = std::tan(g.theta) * g.dx;
  const double ix2 = 1 / (g.dx * g.dx), iy2 = 1 / (g.dy * g.dy);
  for (int i = 0; i < g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) {
      const int p = i * g.Ny + j;
      Coeffs k{0, 0, 0, 0, 0};
      if (i == 0) {
        k.c = 1;
        b_[p] = h0;
      } else {
        {
          const double hf = 0.5 * (hp(i, j) + hp(i - 1, j));
          const double dz = z(i - 1, j) - z(i, j) + tdx;
          k.xm += (hf + 0.5 * dz) * ix2;
          k.c += (-hf + 0.5 * dz) * ix2;
        }
        if (i + 1 < g.Nx) {
          const double hf = 0.5 * (hp(i, j) + hp(i + 1, j));
          const double dz = z(i + 1, j) - z(i, j) - tdx;
          k.xp += (hf + 0.5 * dz) * ix2;
          k.c += (-hf + 0.5 * dz) * ix2;
        } else {
          k.c += -tdx * ix2;
        }
        const int jp = (j + 1) % g.Ny, jm = (j + g.Ny - 1) % g.Ny;
        {
          const double hf = 0.5 * (hp(i, j) + hp(i, jm));
          const double dz = z(i, jm) - z(i, j);
          k.ym += (hf + 0.5 * dz) * iy2;
          k.c += (-hf + 0.5 * dz) * iy2;
        }
        {
          const double hf = 0.5 * (hp(i, j) + hp(i, jp));
          const double dz = z(i, jp) - z(i, j);
          k.yp += (hf + 0.5 * dz) * iy2;
          k.c += (-hf + 0.5 * dz) * iy2;
        }
      }
      k_[p] = k;
      diag_[p] = k.c;
    }
}

Eigen::VectorXd WaterOperator::apply(const Eigen::VectorXd& x) const {
  const int Nx = geom_.Nx, Ny = geom_.Ny;
  Eigen::VectorXd y(x.size());
  for (int i = 0; i < Nx; ++i)
    for (int j = 0; j < Ny; ++j) {
      const int p = i * Ny + j;
      const Coeffs& k = k_[p];
      double v = k.c * x[p];
      if (i == 0) {
        y[p] = v;
        continue;
      }
      const int jp = (j + 1) % Ny, jm = (j + Ny - 1) % Ny;
      v += k.xm * x[p - Ny];
      if (i + 1 < Nx) v += k.xp * x[p + Ny];
      v += k.ym * x[i * Ny + jm] + k.yp * x[i * Ny + jp];
      y[p] = v;
    }
  return y;
}

Eigen::VectorXd WaterOperator::precondition(const Eigen::VectorXd& r) const {
  const int Nx = geom_.Nx, Ny = geom_.Ny;
  Eigen::VectorXd x(r.size());
  std::vector<double> cp(Nx);
  for (int j = 0; j < Ny; ++j) {
    double denom = k_[j].c;
    cp[0] = k_[j].xp / denom;
    x[j] = r[j] / denom;
    for (int i = 1; i < Nx; ++i) {
      const int p = i * Ny + j;
      denom = k_[p].c - k_[p].xm * cp[i - 1];
      cp[i] = k_[p].xp / denom;
      x[p] = (r[p] - k_[p].xm * x[p - Ny]) / denom;
    }
    for (int i = Nx - 2; i >= 0; --i) x[i * Ny + j] -= cp[i] * x[(i + 1) * Ny + j];
  }
  return x;
}

Eigen::MatrixXd WaterOperator::dense() const {
  const int n = size();
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k) {
    e[k] = 1;
    A.col(k) = apply(e);
    e[k] = 0;
  }
  return A;
}

Field solve_h(const Field& h_prev, const Field& z_tilde, const SimConfig& cfg, SolveStats* stats) {
  const auto& g = cfg.geom;
  const WaterOperator A(h_prev, z_tilde, g, cfg.h0);
  const Eigen::VectorXd& b = A.rhs();
  const int max_it = cfg.max_iterations > 0 ? cfg.max_iterations : 10 * g.Nx * g.Ny;
  const double b_norm = inf_norm(b);
  const double target = cfg.tolerance * b_norm;

  Eigen::VectorXd x = flatten(h_prev);
  x.head(g.Ny).setConstant(cfg.h0);
  int it = 0;
  // Restarts from the true residual when the recursion breaks down, and from
  // the best iterate when it blows up.
  Eigen::VectorXd best = x;
  double best_res = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart <= 50; ++restart) {
    Eigen::VectorXd r = b - A.apply(x);
    double res = inf_norm(r);
    if (res < best_res) {
      best = x;
      best_res = res;
    }
    if (res <= target || it >= max_it || restart == 50) break;
    Eigen::VectorXd r0 = r;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(x.size()), v = p;
    double rho = 1, alpha = 1, omega = 1;
    bool blown = false;
    while (res > target && it < max_it) {
      ++it;
      const double rho_new = dot(r0, r);
      if (rho_new == 0 || omega == 0) break;
      const double beta = (rho_new / rho) * (alpha / omega);
      rho = rho_new;
      p = r + beta * (p - omega * v);
      const Eigen::VectorXd y = A.precondition(p);
      v = A.apply(y);
      const double r0v = dot(r0, v);
      if (r0v == 0) break;
      alpha = rho / r0v;
      const Eigen::VectorXd s = r - alpha * v;
      if (inf_norm(s) <= target) {
        x += alpha * y;
        break;
      }
      const Eigen::VectorXd zz = A.precondition(s);
      const Eigen::VectorXd t = A.apply(zz);
      const double tt = dot(t, t);
      omega = tt > 0 ? dot(t, s) / tt : 0;
      x += alpha * y + omega * zz;
      r = s - omega * t;
      res = inf_norm(r);
      if (!std::isfinite(res) || res > 1e8 * b_norm) {
        blown = true;
        break;
      }
    }
    if (blown || !x.allFinite()) x = best;
  }
  x = best;
  const double true_res = inf_norm(b - A.apply(x));
  const double rel = inf_norm(b) > 0 ? true_res / inf_norm(b) : true_res;
  if (stats) *stats = {it, rel};
  if (!(rel <= cfg.tolerance) || !std::isfinite(rel))
    throw NumericalError("solve_h: no convergence after " + std::to_string(it) + " iterations, residual " +
                         std::to_string(rel));
  Field h = unflatten(x, g.Nx, g.Ny);
  if (!(h.minCoeff() > 0)) throw NumericalError("solve_h: nonpositive water height");
  return h;
}

double water_balance(const Field& h_prev, const Field& h, const Field& z_tilde, const SimConfig& cfg) {
  const WaterOperator A(h_prev, z_tilde, cfg.geom, cfg.h0);
  const Eigen::VectorXd r = A.apply(flatten(h)) - A.rhs();
  const int Ny = cfg.geom.Ny;
  return std::abs(r.tail(r.size() - Ny).sum());
}

Field march_c(const GridState& state, const SourceField& src, const SimConfig& cfg) {
  const auto& g = cfg.geom;
  const auto& p = cfg.phys;
  if (!(state.vx.minCoeff() > cfg.vx_min))
    throw NumericalError("march_c: vx below " + std::to_string(cfg.vx_min));
  Field c(g.Nx, g.Ny);
  c.row(0).setConstant(cfg.c0);
  for (int i = 0; i + 1 < g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) {
      const int jp = (j + 1) % g.Ny, jm = (j + g.Ny - 1) % g.Ny;
      const double ratio = state.vy(i, j) / state.vx(i, j);
      const double grad = ratio > 0 ? (c(i, j) - c(i, jm)) / g.dy : (c(i, jp) - c(i, j)) / g.dy;
      const double S = p.s * c(i, j) / p.c_sat;
      c(i + 1, j) = c(i, j) - g.dx * ratio * grad +
                    g.dx * p.rho_s / (state.h(i, j) * state.vx(i, j)) * (src.E(i, j) - S);
    }
  return c;
}

Field laplacian(const Field& z, const GridGeom& g) {
  Field out(g.Nx, g.Ny);
  const double ix2 = 1 / (g.dx * g.dx), iy2 = 1 / (g.dy * g.dy);
  for (int i = 0; i < g.Nx; ++i)
    for (int j = 0; j < g.Ny; ++j) {
      const double up = z(i == 0 ? 0 : i - 1, j);
      const double dn = z(i == g.Nx - 1 ? i : i + 1, j);
      const double l = z(i, (j + g.Ny - 1) % g.Ny), r = z(i, (j + 1) % g.Ny);
      out(i, j) = (up - 2 * z(i, j) + dn) * ix2 + (l - 2 * z(i, j) + r) * iy2;
    }
  return out;
}

Field step_z(const Field& z_tilde, const SourceField& src, const SimConfig& cfg, double dt) {
  if (cfg.phys.K == 0) return z_tilde - dt * (src.E - src.S);
  return z_tilde + dt * (cfg.phys.K * laplacian(z_tilde, cfg.geom) - (src.E - src.S));
}

double default_dt(const SimConfig& cfg) {
  const double d = std::min(cfg.geom.dx, cfg.geom.dy);
  double dt = cfg.phys.K > 0 ? 0.9 * d * d / (4 * cfg.phys.K) : std::numeric_limits<double>::infinity();
  dt = std::min(dt, cfg.dt_max);
  dt = std::min(dt, cfg.t_end / 100);
  return dt;
}

double diffusion_amplification(const SimConfig& cfg, double dt, double kx_dx, double ky_dy) {
  const auto& g = cfg.geom;
  return 1 - dt * cfg.phys.K *
                 ((2 - 2 * std::cos(kx_dx)) / (g.dx * g.dx) + (2 - 2 * std::cos(ky_dy)) / (g.dy * g.dy));
}

Trajectory run(const SimConfig& cfg, const RunObserver& observer) {
  return run_from(cfg, init_state(cfg), observer);
}

Trajectory run_from(const SimConfig& cfg, GridState state, const RunObserver& observer) {
  if (!(cfg.t_end > 0)) throw ConfigError("run: t_end must be positive");
  Trajectory tr;
  const auto& p = cfg.phys;
  tr.quasi_stationary_ratio = p.Lx * p.e / (p.H * p.V);
  const double dt_bound = default_dt(cfg);
  const double remaining = cfg.t_end - state.t;
  const int steps = std::max(1, static_cast<int>(std::ceil(remaining / dt_bound - 1e-9)));
  const double dt = remaining / steps;
  tr.dt = dt;
  const double t0 = state.t;
  double next_checkpoint = cfg.checkpoint_every > 0 ? t0 : std::numeric_limits<double>::infinity();
  double next_diag = t0;
  if (cfg.checkpoint_every > 0) {
    tr.checkpoints.push_back(state);
    next_checkpoint = t0 + cfg.checkpoint_every;
  }
  for (int n = 1; n <= steps; ++n) {
    SolveStats stats;
    const Field h_prev = state.h;
    const Field z_prev = state.z_tilde;
    try {
      state.h = solve_h(h_prev, state.z_tilde, cfg, &stats);
      std::tie(state.vx, state.vy) = compute_velocity(state.h, state.z_tilde, cfg.geom, p.mu());
      SourceField src = erosion_deposition(state, p);
      state.c = march_c(state, src, cfg);
      src.S = p.s * state.c / p.c_sat;
      state.z_tilde = step_z(state.z_tilde, src, cfg, dt);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at step " + std::to_string(n));
    }
    state.t = t0 + n * dt;
    tr.steps = n;
    if (!state.z_tilde.allFinite()) throw NumericalError("run: non-finite height at step " + std::to_string(n));

    const bool last = n == steps;
    if (state.t >= next_checkpoint - 1e-9 * dt || (last && cfg.checkpoint_every > 0)) {
      tr.checkpoints.push_back(state);
      next_checkpoint += cfg.checkpoint_every;
    }
    if (cfg.diagnostics_every <= 0 || state.t >= next_diag + cfg.diagnostics_every - 1e-9 * dt || last) {
      Diagnostic d;
      d.t = state.t;
      d.max_abs_z = state.z_tilde.abs().maxCoeff();
      d.residual = stats.residual;
      d.iterations = stats.iterations;
      d.mass_balance = water_balance(h_prev, state.h, z_prev, cfg);
      d.dominant_mode = dominant_mode(transverse_spectrum(state, cfg.geom.Nx - 1, cfg.geom), true);
      tr.diagnostics.push_back(d);
      next_diag = state.t;
      if (observer && !observer(state, d)) {
        tr.stopped_early = !last;
        break;
      }
    }
  }
  tr.final_state = std::move(state);
  return tr;
}

}  // namespace erosion

#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "erosion/grid.hpp"
#include "erosion/params.hpp"

namespace erosion {

struct SimConfig {
  PhysicalParams phys = table1();
  GridGeom geom = GridGeom::make(200, 50, 0.4, 0.1, table1().theta);
  double dt_max = 3600;
  double t_end = 7200;
  double perturb_amplitude = 1e-5;
  std::uint64_t rng_seed = 1;
  double h0 = 0.5e-3;
  double c0 = flat_concentration(table1(), 0.5e-3);
  double tolerance = 1e-10;
  int max_iterations = 0;  // 0 selects 10 Nx Ny
  double checkpoint_every = 0;  // seconds, 0 disables
  double diagnostics_every = 0;  // seconds, 0 records every step
  double vx_min = 1e-6;
};

// Fills geometry and inflow values from phys so that the flat film is steady.
SimConfig make_config(const PhysicalParams& phys, int Nx, int Ny);

struct SourceField {
  Field E;
  Field S;
};

struct SolveStats {
  int iterations = 0;
  double residual = 0;
};

GridState init_state(const SimConfig& cfg);

std::pair<Field, Field> compute_velocity(const Field& h, const Field& z_tilde, const GridGeom& geom, double mu);

SourceField erosion_deposition(const GridState& state, const PhysicalParams& p);

// Linear operator of the water-height scheme for fixed (h_prev, z_tilde).
class WaterOperator {
 public:
  WaterOperator(const Field& h_prev, const Field& z_tilde, const GridGeom& geom, double h0);

  Eigen::VectorXd apply(const Eigen::VectorXd& h) const;
  const Eigen::VectorXd& rhs() const { return b_; }
  const Eigen::VectorXd& diagonal() const { return diag_; }
  // Line relaxation: exact tridiagonal solves along x, y couplings dropped.
  Eigen::VectorXd precondition(const Eigen::VectorXd& r) const;
  Eigen::MatrixXd dense() const;
  int size() const { return geom_.Nx * geom_.Ny; }

 private:
  struct Coeffs {
    double c, xm, xp, ym, yp;
  };
  GridGeom geom_;
  std::vector<Coeffs> k_;
  Eigen::VectorXd b_;
  Eigen::VectorXd diag_;
};

Field solve_h(const Field& h_prev, const Field& z_tilde, const SimConfig& cfg, SolveStats* stats = nullptr);

double water_balance(const Field& h_prev, const Field& h, const Field& z_tilde, const SimConfig& cfg);

Field march_c(const GridState& state, const SourceField& src, const SimConfig& cfg);

Field step_z(const Field& z_tilde, const SourceField& src, const SimConfig& cfg, double dt);

Field laplacian(const Field& z_tilde, const GridGeom& geom);

double default_dt(const SimConfig& cfg);

// Amplification factor of the explicit creep update for discrete mode (kx, ky).
double diffusion_amplification(const SimConfig& cfg, double dt, double kx_dx, double ky_dy);

struct Diagnostic {
  double t = 0;
  double max_abs_z = 0;
  double residual = 0;
  double mass_balance = 0;
  int dominant_mode = 0;
  int iterations = 0;
};

struct Trajectory {
  std::vector<GridState> checkpoints;
  std::vector<Diagnostic> diagnostics;
  GridState final_state;
  double dt = 0;
  int steps = 0;
  double quasi_stationary_ratio = 0;
  bool stopped_early = false;
};

// Returning false stops the run after the current step.
using RunObserver = std::function<bool(const GridState&, const Diagnostic&)>;

Trajectory run(const SimConfig& cfg, const RunObserver& observer = {});

Trajectory run_from(const SimConfig& cfg, GridState state, const RunObserver& observer = {});

}  // namespace erosion

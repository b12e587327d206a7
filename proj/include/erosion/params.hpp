#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace erosion {

// Dimensional inputs in SI units (densities in g/m^3).
struct PhysicalParams {
  double Lx = 0.4;
  double Ly = 0.1;
  double V = 1.0;
  double h_ref = 0.5e-3;
  double m_exp = 1.6;
  double n_exp = 3.2;
  double rho_s = 2.17e6;
  double c_sat = 3.17e5;
  double e = 0.5e-3 / 3600.0;
  double s = 0.5e-3 / 3600.0 / 2000.0;
  double theta = 39.0 * std::numbers::pi / 180.0;
  double K = 5e-4 / 3600.0;
  double H = 0.5e-3;
  double Z = 0.5e-3;
  double L = 0.5e-3 * 1.0 / (0.5e-3 / 3600.0);

  double mu() const { return V / std::tan(theta); }
  double tan_theta() const { return std::tan(theta); }
};

// Creep constant used by the channelization runs.
inline constexpr double K_e = 5e-4 / 3600.0;

PhysicalParams table1();

struct NondimParams {
  double alpha = 0;
  double K_nd = 0;
  double a = 0;
  double rho_bar = 0;
  double h_bar = 1;
  double c_bar = 0;
  double tan_theta = 0;
  double N_coef = 0;
  double M_coef = 0;
  double m_exp = 0;
  double n_exp = 0;
};

std::vector<std::string> validate(const PhysicalParams& p);

// Sets L so that Z/L = e/V.
PhysicalParams with_scales(PhysicalParams p);

NondimParams nondimensionalize(const PhysicalParams& p, double h_bar = 1.0);

// Equivalent parameter set whose velocity scale is the flow speed mu, with
// the erosion speed rescaled so that e (|v|/V)^n is unchanged. Its
// nondimensional form describes the linearization of the solver.
PhysicalParams flow_params(const PhysicalParams& p);

struct SteadyState {
  double h;
  double c;
  double z;
};

SteadyState steady_state(const NondimParams& nd);

double steady_c(double e_over_s, double h_bar, double m, double n, double tan_theta);

double k_threshold(const NondimParams& nd);

// Nondimensional K from dimensional K and back.
double k_to_nd(const PhysicalParams& p, double K);
double k_from_nd(const PhysicalParams& p, double K_nd);

// Rate in 1/s of a nondimensional growth rate, and wavenumber in 1/L.
double rate_to_dim(const PhysicalParams& p, double rate_nd);
double wavenumber_to_nd(const PhysicalParams& p, double k_dim);

// Dimensional steady concentration of the flat film flowing at mu tan(theta).
double flat_concentration(const PhysicalParams& p, double h0);

}  // namespace erosion

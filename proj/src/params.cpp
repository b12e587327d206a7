#include "erosion/params.hpp"

#include <stdexcept>

namespace erosion {

PhysicalParams table1() { return with_scales(PhysicalParams{}); }

PhysicalParams with_scales(PhysicalParams p) {
  p.L = p.Z * p.V / p.e;
  return p;
}

std::vector<std::string> validate(const PhysicalParams& p) {
  std::vector<std::string> out;
  auto positive = [&](double v, const char* msg) {
    if (!(v > 0) || !std::isfinite(v)) out.emplace_back(msg);
  };
  positive(p.Lx, "Lx nonpositive");
  positive(p.Ly, "Ly nonpositive");
  positive(p.V, "V nonpositive");
  positive(p.h_ref, "h_ref nonpositive");
  if (!(p.m_exp >= 0) || !std::isfinite(p.m_exp)) out.emplace_back("m_exp negative");
  positive(p.n_exp, "n_exp nonpositive");
  positive(p.rho_s, "rho_s nonpositive");
  positive(p.c_sat, "c_sat nonpositive");
  positive(p.e, "erosion speed nonpositive");
  positive(p.s, "sedimentation speed nonpositive");
  positive(p.H, "H nonpositive");
  positive(p.Z, "Z nonpositive");
  positive(p.L, "L nonpositive");
  if (!(p.theta > 0 && p.theta < std::numbers::pi / 2)) out.emplace_back("theta out of range");
  if (!(p.K >= 0) || !std::isfinite(p.K)) out.emplace_back("K negative");
  if (p.L > 0 && p.V > 0 && p.e > 0 &&
      std::abs(p.Z / p.L - p.e / p.V) > 1e-12 * (p.e / p.V))
    out.emplace_back("Z/L differs from e/V");
  return out;
}

double steady_c(double e_over_s, double h_bar, double m, double n, double tan_theta) {
  return e_over_s * std::pow(h_bar, m) * std::pow(tan_theta, n);
}

NondimParams nondimensionalize(const PhysicalParams& p, double h_bar) {
  if (!validate(p).empty()) throw std::domain_error("nondimensionalize: invalid parameters: " + validate(p).front());
  if (!(h_bar > 0)) throw std::domain_error("nondimensionalize: h_bar nonpositive");
  NondimParams nd;
  nd.alpha = p.e / p.V;
  nd.K_nd = p.K / (p.L * p.V);
  nd.a = p.s * p.rho_s / (p.e * h_bar * p.c_sat);
  nd.rho_bar = p.rho_s / p.c_sat;
  nd.h_bar = h_bar;
  nd.tan_theta = std::tan(p.theta);
  nd.m_exp = p.m_exp;
  nd.n_exp = p.n_exp;
  nd.c_bar = steady_c(p.e / p.s, h_bar, p.m_exp, p.n_exp, nd.tan_theta);
  nd.N_coef = nd.alpha * nd.a * p.n_exp * nd.c_bar / (nd.tan_theta * nd.tan_theta);
  nd.M_coef = nd.a * p.m_exp * nd.c_bar / h_bar;
  return nd;
}

PhysicalParams flow_params(const PhysicalParams& p) {
  PhysicalParams q = p;
  const double mu = p.mu();
  q.e = p.e * std::pow(mu / p.V, p.n_exp);
  q.V = mu;
  return with_scales(q);
}

SteadyState steady_state(const NondimParams& nd) { return {nd.h_bar, nd.c_bar, 0.0}; }

double k_threshold(const NondimParams& nd) {
  return nd.alpha * nd.m_exp * nd.h_bar * nd.c_bar / nd.rho_bar;
}

double k_to_nd(const PhysicalParams& p, double K) { return K / (p.L * p.V); }
double k_from_nd(const PhysicalParams& p, double K_nd) { return K_nd * p.L * p.V; }

double rate_to_dim(const PhysicalParams& p, double rate_nd) { return rate_nd * p.e / p.Z; }
double wavenumber_to_nd(const PhysicalParams& p, double k_dim) { return k_dim * p.L; }

double flat_concentration(const PhysicalParams& p, double h0) {
  const double speed = p.mu() * std::tan(p.theta);
  return p.c_sat * (p.e / p.s) * std::pow(h0 / p.H, p.m_exp) * std::pow(speed / p.V, p.n_exp);
}

}  // namespace erosion

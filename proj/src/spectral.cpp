#include "erosion/spectral.hpp"

#include <cmath>
#include <limits>
#include <thread>

namespace erosion {

using cd = std::complex<double>;

SpectralPoint spectral_point(const LinearizedSystem<double>& sys, double xi, double eta) {
  SpectralPoint sp;
  sp.xi = xi;
  sp.eta = eta;
  sp.lambdas = eigenvalues3(spectral_matrix(sys, xi, eta));
  sp.growth = (xi == 0 && eta == 0) ? 0.0 : sp.lambdas.real().maxCoeff();
  return sp;
}

RHReport routh_hurwitz(const NondimParams& nd, double xi, double eta) {
  if (xi == 0 && eta == 0) throw std::domain_error("routh_hurwitz: (xi, eta) = (0, 0)");
  const double a = nd.a;
  const double xb = xi * nd.tan_theta;
  const double e2 = nd.alpha * nd.h_bar * (xi * xi + eta * eta);
  const double Kb = nd.K_nd / (nd.alpha * nd.h_bar);
  const double hp = nd.h_bar / nd.rho_bar;

  RHReport r;
  const double A1 = 1 + nd.N_coef * hp;
  const double B1 = a + e2 * (1 + Kb);
  const double A2 = a * (1 + Kb) - hp * nd.M_coef + e2 * Kb;
  const double B2 = a + e2;
  r.a1_bar = A1;
  r.b1_bar = B1;
  r.a2_bar = A2;
  r.b2_bar = B2;
  r.q_coefficients = {-xb * A1, -B1, -e2 * A2, xb * B2, a * e2 * xb, a * e2 * e2 * Kb};

  const double t = xb * xb / e2;
  r.t = t;
  r.delta2 = -B1;
  r.delta4 = e2 * (t * B2 * (A1 * B1 - B2) + B1 * (A2 * B1 - e2 * a * Kb));
  const double aK = e2 * a * Kb;
  r.T0 = aK * (aK - A2 * B1) * (aK - A2 * B1);
  r.T1 = aK * ((A1 * B1 - B2) * (2 * a * B1 + A2 * B2 - aK * A1) - a * B1 * B2) + a * B1 * B1 * (A2 * B2 - a * B1);
  r.T2 = a * B2 * B2 * (A1 * B1 - B2);
  r.delta6 = -(e2 * e2 * e2) * (r.T0 + t * r.T1 + t * t * r.T2);
  r.stable = (-r.delta2 > 0) && (r.delta4 > 0) && (-r.delta6 > 0);
  return r;
}

StabilityRaster stability_map(const LinearizedSystem<double>& sys, std::array<double, 2> xi_range,
                              std::array<double, 2> eta_range, int nx, int ny, double margin, int threads) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("stability_map: nonpositive resolution");
  StabilityRaster r;
  r.margin = margin;
  auto axis = [](int n, std::array<double, 2> range) -> Eigen::VectorXd {
    if (n == 1) return Eigen::VectorXd::Constant(1, range[0]);
    return Eigen::VectorXd::LinSpaced(n, range[0], range[1]);
  };
  r.xi_axis = axis(nx, xi_range);
  r.eta_axis = axis(ny, eta_range);
  r.growth.resize(ny, nx);
  r.verdict.resize(ny, nx);
  auto rows = [&](int begin, int end) {
    for (int j = begin; j < end; ++j)
      for (int i = 0; i < nx; ++i) {
        const double xi = r.xi_axis[i], eta = r.eta_axis[j];
        const double g = growth_rate(sys, xi, eta);
        r.growth(j, i) = g;
        if ((xi == 0 && eta == 0) || std::abs(g) <= margin)
          r.verdict(j, i) = Verdict::marginal;
        else
          r.verdict(j, i) = g < 0 ? Verdict::stable : Verdict::unstable;
      }
  };
  threads = std::max(1, std::min(threads, ny));
  if (threads == 1) {
    rows(0, ny);
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(rows, ny * k / threads, ny * (k + 1) / threads);
    for (auto& th : pool) th.join();
  }
  return r;
}

ComplexVector3<double> low_freq_eigen(const NondimParams& nd, double xi, double eta, LowFreqRegime regime) {
  const double a = nd.a, al = nd.alpha, h = nd.h_bar, c = nd.c_bar, rho = nd.rho_bar;
  const double m = nd.m_exp, n = nd.n_exp, t = nd.tan_theta;
  const double r2 = xi * xi + eta * eta;
  if (regime == LowFreqRegime::eta2_small_vs_xi) {
    const cd l1 = -(nd.K_nd + al * n * h * c / rho - al * m * h * c / rho) * xi * xi -
                  (nd.K_nd - al * m * h * c / rho) * eta * eta;
    const cd l2 = cd(-al * h * r2, -xi * t);
    return {l1, l2, cd(-a)};
  }
  const double xb = xi * t;
  const double e2 = al * h * r2;
  const double Kb = nd.K_nd / (al * h);
  const double beta = 1 + Kb - (h / rho) * nd.M_coef / a;
  const cd b(e2 * beta, xb);
  const cd q = cd(e2 * e2 * Kb, xb * e2 * (beta - 1));
  const cd sq = std::sqrt(b * b - 4.0 * q);
  return {(-b + sq) / 2.0, (-b - sq) / 2.0, cd(-a)};
}

ComplexVector3<double> high_freq_eigen(const NondimParams& nd, double xi, double eta) {
  const double a = nd.a, al = nd.alpha, h = nd.h_bar, c = nd.c_bar, rho = nd.rho_bar;
  const double r2 = xi * xi + eta * eta;
  const double rate = a * c / rho;
  if (nd.K_nd > 0) return {cd(-nd.K_nd * r2), cd(-al * h * r2), cd(-a, -xi * nd.tan_theta)};
  if (xi != 0)
    return {cd(rate * (nd.m_exp - xi * xi / r2 * nd.n_exp)), cd(-al * h * r2), cd(-a, -xi * nd.tan_theta)};
  return {cd(0), cd(-al * h * eta * eta), cd(rate * (nd.m_exp - rho / c))};
}

double boundary_slope(const NondimParams& nd) {
  const double ahc = nd.alpha * nd.h_bar * nd.c_bar;
  const double Kr = nd.K_nd * nd.rho_bar;
  const double num = Kr - ahc * (nd.m_exp - nd.n_exp);
  const double den = ahc * nd.m_exp - Kr;
  if (!(num > 0) || !(den > 0)) throw std::domain_error("boundary_slope: no boundary line for this K");
  return std::sqrt(num / den);
}

double boundary_curve(const NondimParams& nd, double xi) {
  const double thr = k_threshold(nd);
  const double K = nd.K_nd, rho = nd.rho_bar;
  if (!(K > thr - nd.alpha * nd.h_bar && K < thr) || !(K > 0))
    throw std::domain_error("boundary_curve: K outside the curve window");
  if (!(xi > 0)) throw std::domain_error("boundary_curve: xi nonpositive");
  const double ahc = nd.alpha * nd.m_exp * nd.h_bar * nd.c_bar;
  const double gap = K * rho + nd.alpha * nd.h_bar * rho - ahc;
  const double pref = std::pow((rho / K) * (ahc - K * rho) / (gap * gap), 0.25);
  return pref * std::sqrt(nd.tan_theta * xi);
}

double k_bar_pole(const NondimParams& nd) { return nd.m_exp * nd.c_bar / nd.rho_bar; }

double f_of_K(const NondimParams& nd, double K_bar) {
  const double p = k_bar_pole(nd);
  if (!(K_bar >= 0 && K_bar < p)) throw std::domain_error("f_of_K: K_bar outside [0, m c/rho)");
  const double g = 1 + K_bar - p;
  return K_bar * g * g / (p - K_bar);
}

double k_bar_critical(const NondimParams& nd, double xi, double eta) {
  if (xi == 0 || eta == 0) throw std::domain_error("k_bar_critical: xi and eta must be nonzero");
  const double p = k_bar_pole(nd);
  if (!(p > 0)) throw std::domain_error("k_bar_critical: empty branch");
  const double xb = xi * nd.tan_theta;
  const double eb2 = nd.alpha * nd.h_bar * eta * eta;
  const double target = xb * xb / (eb2 * eb2);
  // Bisection on the distance d = pole - K_bar, where f = (pole - d)(1 - d)^2 / d decreases in d.
  auto f_of_gap = [p](double d) { return (p - d) * (1 - d) * (1 - d) / d; };
  double lo = 0, hi = std::min(1.0, p);
  for (int it = 0; it < 2000; ++it) {
    const double mid = lo + (hi - lo) / 2;
    if (mid == lo || mid == hi) break;
    const double f = f_of_gap(mid);
    if (std::abs(f - target) <= 1e-13 * target) {
      lo = hi = mid;
      break;
    }
    if (f > target)
      lo = mid;
    else
      hi = mid;
  }
  return p - (lo + (hi - lo) / 2);
}

UnstableMode most_unstable_mode(const LinearizedSystem<double>& sys, std::array<double, 2> xi_range,
                                std::vector<double> eta_modes, int resolution) {
  if (eta_modes.empty() || resolution < 1) throw std::invalid_argument("most_unstable_mode: empty search set");
  std::sort(eta_modes.begin(), eta_modes.end());
  UnstableMode best{0, 0, -std::numeric_limits<double>::infinity()};
  for (double eta : eta_modes)
    for (int i = 0; i < resolution; ++i) {
      const double xi =
          resolution == 1 ? xi_range[0] : xi_range[0] + (xi_range[1] - xi_range[0]) * i / (resolution - 1);
      const double g = growth_rate(sys, xi, eta);
      if (g > best.growth) best = {xi, eta, g};
    }
  return best;
}

std::vector<double> match_errors(const ComplexVector3<double>& exact, const ComplexVector3<double>& approx,
                                 int count) {
  std::vector<cd> pool(exact.data(), exact.data() + 3);
  std::vector<double> out;
  for (int k = 0; k < count; ++k) {
    auto it = std::min_element(pool.begin(), pool.end(),
                               [&](const cd& x, const cd& y) { return std::abs(x - approx[k]) < std::abs(y - approx[k]); });
    out.push_back(std::abs(*it - approx[k]));
    pool.erase(it);
  }
  return out;
}

}  // namespace erosion

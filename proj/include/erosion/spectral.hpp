#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <complex>
#include <stdexcept>
#include <vector>

#include "erosion/params.hpp"

namespace erosion {

template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using ComplexMatrix3 = Eigen::Matrix<std::complex<Scalar>, 3, 3>;
template <typename Scalar>
using ComplexVector3 = Eigen::Matrix<std::complex<Scalar>, 3, 1>;

// Perturbation ordering is (h, c, z).
template <typename Scalar = double>
struct LinearizedSystem {
  Matrix3<Scalar> A0;
  Matrix3<Scalar> A1;
  Matrix3<Scalar> A2;
};

template <typename Scalar = double>
LinearizedSystem<Scalar> assemble_system_matrices(const NondimParams& nd) {
  const Scalar a = nd.a, m = nd.m_exp, n = nd.n_exp, al = nd.alpha;
  const Scalar h = nd.h_bar, c = nd.c_bar, rho = nd.rho_bar, t = nd.tan_theta;
  LinearizedSystem<Scalar> sys;
  sys.A0 << 0, 0, 0,
            a * m * c / h, -a, 0,
            -a * m * c / rho, a * h / rho, 0;
  const Scalar g = al * a * n * c / t;
  const Scalar gz = al * a * n * h * c / (rho * t);
  sys.A1 << -t, 0, 0,
            -g, -t, -g,
            gz, 0, gz;
  sys.A2 << al * h, 0, al * h,
            0, 0, 0,
            0, 0, Scalar(nd.K_nd);
  return sys;
}

template <typename Scalar>
ComplexMatrix3<Scalar> spectral_matrix(const LinearizedSystem<Scalar>& sys, Scalar xi, Scalar eta) {
  const std::complex<Scalar> ix(0, xi);
  return sys.A0.template cast<std::complex<Scalar>>() + ix * sys.A1.template cast<std::complex<Scalar>>() -
         (xi * xi + eta * eta) * sys.A2.template cast<std::complex<Scalar>>();
}

// Coefficients of det(lambda I - M) = lambda^3 - c2 lambda^2 + c1 lambda - c0.
template <typename Derived>
std::array<typename Derived::Scalar, 3> char_coefficients(const Eigen::MatrixBase<Derived>& M) {
  using C = typename Derived::Scalar;
  const C tr = M.trace();
  const C minors = (M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0)) + (M(0, 0) * M(2, 2) - M(0, 2) * M(2, 0)) +
                   (M(1, 1) * M(2, 2) - M(1, 2) * M(2, 1));
  const C det = M(0, 0) * (M(1, 1) * M(2, 2) - M(1, 2) * M(2, 1)) -
                M(0, 1) * (M(1, 0) * M(2, 2) - M(1, 2) * M(2, 0)) +
                M(0, 2) * (M(1, 0) * M(2, 1) - M(1, 1) * M(2, 0));
  return {tr, minors, det};
}

namespace detail {

template <typename C>
C char_poly(const std::array<C, 3>& k, C x) {
  return ((x - k[0]) * x + k[1]) * x - k[2];
}

template <typename C>
C char_poly_derivative(const std::array<C, 3>& k, C x) {
  return (C(3) * x - C(2) * k[0]) * x + k[1];
}

}  // namespace detail

// Roots of the characteristic polynomial: the largest root by Cardano, the
// other two from the deflated quadratic, then Newton polish on the cubic.
// Sorted by real part descending, then imaginary part descending.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 1> eigenvalues3(const Eigen::MatrixBase<Derived>& M) {
  using C = typename Derived::Scalar;
  using R = typename C::value_type;
  const auto k = char_coefficients(M);
  const C B = -k[0], Cc = k[1], D = -k[2];
  const C p = Cc - B * B / R(3);
  const C q = R(2) * B * B * B / R(27) - B * Cc / R(3) + D;
  const C disc = std::sqrt(q * q / R(4) + p * p * p / R(27));
  C u3 = -q / R(2) + disc;
  const C u3b = -q / R(2) - disc;
  if (std::abs(u3b) > std::abs(u3)) u3 = u3b;
  const C u = std::abs(u3) == R(0) ? C(0) : std::pow(u3, R(1) / R(3));
  const C w(R(-0.5), std::sqrt(R(3)) / R(2));
  std::array<C, 3> roots;
  C wk(1);
  for (int j = 0; j < 3; ++j) {
    const C uj = u * wk;
    const C vj = std::abs(uj) == R(0) ? C(0) : -p / (R(3) * uj);
    roots[j] = uj + vj - B / R(3);
    wk *= w;
  }
  auto polish = [&](C r) {
    for (int it = 0; it < 4; ++it) {
      const C f = detail::char_poly(k, r);
      const C df = detail::char_poly_derivative(k, r);
      if (std::abs(df) == R(0)) break;
      const C next = r - f / df;
      if (!(std::abs(detail::char_poly(k, next)) < std::abs(f))) break;
      r = next;
    }
    return r;
  };
  C big = roots[0];
  for (const auto& r : roots)
    if (std::abs(r) > std::abs(big)) big = r;
  big = polish(big);
  if (std::abs(big) > R(0)) {
    const C b1 = B + big;
    const C b0 = -D / big;
    const C sq = std::sqrt(b1 * b1 - R(4) * b0);
    const C s = (std::real(std::conj(b1) * sq) >= R(0)) ? sq : -sq;
    const C qq = -(b1 + s) / R(2);
    roots[0] = big;
    roots[1] = qq;
    roots[2] = std::abs(qq) == R(0) ? C(0) : b0 / qq;
  }
  for (int j = 1; j < 3; ++j) roots[j] = polish(roots[j]);
  std::sort(roots.begin(), roots.end(), [](const C& x, const C& y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  return Eigen::Matrix<C, 3, 1>(roots[0], roots[1], roots[2]);
}

template <typename Scalar>
Scalar growth_rate(const LinearizedSystem<Scalar>& sys, Scalar xi, Scalar eta) {
  if (xi == Scalar(0) && eta == Scalar(0)) return Scalar(0);
  return eigenvalues3(spectral_matrix(sys, xi, eta)).real().maxCoeff();
}

struct SpectralPoint {
  double xi = 0;
  double eta = 0;
  ComplexVector3<double> lambdas;
  double growth = 0;
};

SpectralPoint spectral_point(const LinearizedSystem<double>& sys, double xi, double eta);

struct RHReport {
  double delta2 = 0;
  double delta4 = 0;
  double delta6 = 0;
  bool stable = false;
  double t = 0;
  double a1_bar = 0;
  double b1_bar = 0;
  double a2_bar = 0;
  double b2_bar = 0;
  double T0 = 0;
  double T1 = 0;
  double T2 = 0;
  // Coefficients of Q(X) = X^3 + (a1 + i b1) X^2 + (a2 + i b2) X + (a3 + i b3).
  std::array<double, 6> q_coefficients{};
};

RHReport routh_hurwitz(const NondimParams& nd, double xi, double eta);

enum class Verdict : signed char { unstable = -1, marginal = 0, stable = 1 };

struct StabilityRaster {
  Eigen::VectorXd xi_axis;
  Eigen::VectorXd eta_axis;
  // Indexed (eta index, xi index).
  Eigen::ArrayXXd growth;
  Eigen::Array<Verdict, Eigen::Dynamic, Eigen::Dynamic> verdict;
  double margin = 1e-10;

  Eigen::Index count(Verdict v) const { return (verdict == v).count(); }
};

// Verdict is marginal where |growth| <= margin and at the origin.
StabilityRaster stability_map(const LinearizedSystem<double>& sys, std::array<double, 2> xi_range,
                              std::array<double, 2> eta_range, int nx, int ny, double margin = 1e-10,
                              int threads = 1);

enum class LowFreqRegime { xi_of_order_eta2, eta2_small_vs_xi };

ComplexVector3<double> low_freq_eigen(const NondimParams& nd, double xi, double eta, LowFreqRegime regime);

ComplexVector3<double> high_freq_eigen(const NondimParams& nd, double xi, double eta);

double boundary_slope(const NondimParams& nd);
double boundary_curve(const NondimParams& nd, double xi);

// m c_bar / rho_bar, the pole of f.
double k_bar_pole(const NondimParams& nd);
double f_of_K(const NondimParams& nd, double K_bar);
double k_bar_critical(const NondimParams& nd, double xi, double eta);

struct UnstableMode {
  double xi = 0;
  double eta = 0;
  double growth = 0;
};

UnstableMode most_unstable_mode(const LinearizedSystem<double>& sys, std::array<double, 2> xi_range,
                                std::vector<double> eta_modes, int resolution);

// Greedy nearest-neighbour pairing of approximations to exact eigenvalues;
// returns |exact - approx| for the first `count` approximations.
std::vector<double> match_errors(const ComplexVector3<double>& exact, const ComplexVector3<double>& approx,
                                 int count = 3);

}  // namespace erosion

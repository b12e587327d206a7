#include "erosion/analysis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace erosion {

Eigen::VectorXcd dft(const Eigen::VectorXd& row) {
  const Eigen::Index n = row.size();
  Eigen::VectorXcd out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    std::complex<double> acc = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double ang = -2 * std::numbers::pi * static_cast<double>((k * j) % n) / static_cast<double>(n);
      acc += row[j] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

TransverseSpectrum transverse_spectrum(const Field& z, int row_index, double row_x) {
  if (row_index < 0 || row_index >= z.rows()) throw std::out_of_range("transverse_spectrum: row out of range");
  const Eigen::VectorXd row = z.row(row_index).transpose();
  const Eigen::VectorXcd f = dft(row);
  TransverseSpectrum s;
  s.row_x = row_x;
  s.magnitudes = f.head(row.size() / 2 + 1).cwiseAbs();
  return s;
}

TransverseSpectrum transverse_spectrum(const GridState& state, int row_index, const GridGeom& geom) {
  return transverse_spectrum(state.z_tilde, row_index, (row_index + 0.5) * geom.dx);
}

int dominant_mode(const TransverseSpectrum& spec, bool exclude_dc) {
  if (spec.magnitudes.size() == 0) throw std::invalid_argument("dominant_mode: empty spectrum");
  Eigen::Index start = exclude_dc && spec.magnitudes.size() > 1 ? 1 : 0;
  Eigen::Index best = start;
  for (Eigen::Index k = start + 1; k < spec.magnitudes.size(); ++k)
    if (spec.magnitudes[k] > spec.magnitudes[best]) best = k;
  return static_cast<int>(best);
}

double spectrum_level(const TransverseSpectrum& spec) {
  if (spec.magnitudes.size() < 2) return 0;
  return spec.magnitudes.tail(spec.magnitudes.size() - 1).mean();
}

double perturbation_amplitude(const Field& z) {
  if (z.size() == 0) return 0;
  return ((z.rowwise().maxCoeff() - z.rowwise().minCoeff()) / 2).maxCoeff();
}

double perturbation_amplitude(const GridState& state) { return perturbation_amplitude(state.z_tilde); }

double linear_rate_fit(const std::vector<std::pair<double, double>>& series) {
  if (series.size() < 3) throw std::invalid_argument("linear_rate_fit: fewer than 3 samples");
  double st = 0, sy = 0;
  for (const auto& [t, m] : series) {
    if (!(m > 0)) throw std::invalid_argument("linear_rate_fit: nonpositive magnitude");
    st += t;
    sy += std::log(m);
  }
  const double n = static_cast<double>(series.size());
  const double tm = st / n, ym = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [t, m] : series) {
    const double dt = t - tm, dy = std::log(m) - ym;
    sxx += dt * dt;
    sxy += dt * dy;
  }
  if (sxx == 0) throw std::invalid_argument("linear_rate_fit: degenerate series");
  return sxy / sxx;
}

}  // namespace erosion

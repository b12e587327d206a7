#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "erosion/grid.hpp"

namespace erosion {

struct TransverseSpectrum {
  double row_x = 0;
  Eigen::VectorXd magnitudes;  // modes 0..Ny/2
};

// Full length-Ny DFT of a row, direct summation.
Eigen::VectorXcd dft(const Eigen::VectorXd& row);

TransverseSpectrum transverse_spectrum(const Field& z_tilde, int row_index, double row_x = 0);
TransverseSpectrum transverse_spectrum(const GridState& state, int row_index, const GridGeom& geom);

// Argmax over N >= 1 when exclude_dc; ties go to the smallest N.
int dominant_mode(const TransverseSpectrum& spec, bool exclude_dc = true);

// Mean magnitude over modes N >= 1.
double spectrum_level(const TransverseSpectrum& spec);

// max over rows of (max_y z - min_y z)/2.
double perturbation_amplitude(const Field& z_tilde);
double perturbation_amplitude(const GridState& state);

// Least-squares slope of log(magnitude) against t.
double linear_rate_fit(const std::vector<std::pair<double, double>>& series);

}  // namespace erosion

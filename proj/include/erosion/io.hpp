#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "erosion/analysis.hpp"
#include "erosion/grid.hpp"
#include "erosion/solver.hpp"
#include "erosion/spectral.hpp"

namespace erosion {

inline constexpr std::uint16_t erog_version = 1;
inline constexpr std::size_t erog_header_bytes = 4 + 2 + 4 + 4 + 8 * 3;

struct ErogFile {
  double dx = 0;
  double dy = 0;
  GridState state;  // velocities are left empty
};

void write_grid(const GridState& state, const GridGeom& geom, const std::string& path);
std::vector<unsigned char> encode_grid(const GridState& state, double dx, double dy);
ErogFile read_grid(const std::string& path);
ErogFile decode_grid(const std::vector<unsigned char>& bytes);

// Image rows follow the first index of `image`.
void export_pgm_image(const Eigen::ArrayXXd& image, const std::string& path, double lo, double hi);
// Grid field with image row 0 at the smallest y and columns along x.
void export_pgm(const Field& field, const std::string& path, double lo, double hi);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string format_double(double v);
void export_csv(const CsvTable& table, const std::string& path);
CsvTable read_csv(const std::string& path);

CsvTable diagnostics_table(const std::vector<Diagnostic>& series);
CsvTable raster_table(const StabilityRaster& raster);
CsvTable spectrum_table(const TransverseSpectrum& spec, double Ly);

}  // namespace erosion

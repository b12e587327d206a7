#pragma once

#include <Eigen/Dense>

namespace erosion {

// Row index i runs along x (i = 0 at the inflow), column index j along y.
using Field = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct GridGeom {
  int Nx = 200;
  int Ny = 50;
  double dx = 0.002;
  double dy = 0.002;
  double Lx = 0.4;
  double Ly = 0.1;
  double theta = 0;

  static GridGeom make(int Nx, int Ny, double Lx, double Ly, double theta) {
    return {Nx, Ny, Lx / Nx, Ly / Ny, Lx, Ly, theta};
  }
};

struct GridState {
  double t = 0;
  Field h;
  Field z_tilde;
  Field c;
  Field vx;
  Field vy;
};

}  // namespace erosion

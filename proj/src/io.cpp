#include "erosion/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include "erosion/errors.hpp"

namespace erosion {

namespace {

template <typename T>
void put_le(std::vector<unsigned char>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
  U bits;
  std::memcpy(&bits, &value, sizeof(T));
  for (std::size_t k = 0; k < sizeof(T); ++k) out.push_back(static_cast<unsigned char>((bits >> (8 * k)) & 0xff));
}

template <typename T>
T get_le(const std::vector<unsigned char>& in, std::size_t offset) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
  U bits = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) bits |= static_cast<U>(in[offset + k]) << (8 * k);
  T value;
  std::memcpy(&value, &bits, sizeof(T));
  return value;
}

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace

std::vector<unsigned char> encode_grid(const GridState& s, double dx, double dy) {
  const auto Nx = static_cast<std::uint32_t>(s.z_tilde.rows());
  const auto Ny = static_cast<std::uint32_t>(s.z_tilde.cols());
  std::vector<unsigned char> out;
  out.reserve(erog_header_bytes + 3 * std::size_t{Nx} * Ny * 8);
  for (char ch : {'E', 'R', 'O', 'G'}) out.push_back(static_cast<unsigned char>(ch));
  put_le<std::uint16_t>(out, erog_version);
  put_le<std::uint32_t>(out, Nx);
  put_le<std::uint32_t>(out, Ny);
  put_le<double>(out, dx);
  put_le<double>(out, dy);
  put_le<double>(out, s.t);
  for (const Field* f : {&s.z_tilde, &s.h, &s.c})
    for (Eigen::Index k = 0; k < f->size(); ++k) put_le<double>(out, f->data()[k]);
  return out;
}

void write_grid(const GridState& state, const GridGeom& geom, const std::string& path) {
  const auto bytes = encode_grid(state, geom.dx, geom.dy);
  write_bytes(path, std::string(bytes.begin(), bytes.end()));
}

ErogFile decode_grid(const std::vector<unsigned char>& in) {
  if (in.size() < erog_header_bytes)
    throw IoError("EROG length error: expected at least " + std::to_string(erog_header_bytes) + " bytes, got " +
                  std::to_string(in.size()));
  if (std::memcmp(in.data(), "EROG", 4) != 0) throw IoError("EROG format error: bad magic at byte offset 0");
  const auto version = get_le<std::uint16_t>(in, 4);
  if (version != erog_version)
    throw IoError("EROG format error: unsupported version " + std::to_string(version) + " at byte offset 4");
  const auto Nx = get_le<std::uint32_t>(in, 6);
  const auto Ny = get_le<std::uint32_t>(in, 10);
  const std::size_t expected = erog_header_bytes + 3 * std::size_t{Nx} * Ny * 8;
  if (in.size() != expected)
    throw IoError("EROG length error: expected " + std::to_string(expected) + " bytes, got " +
                  std::to_string(in.size()));
  ErogFile f;
  f.dx = get_le<double>(in, 14);
  f.dy = get_le<double>(in, 22);
  f.state.t = get_le<double>(in, 30);
  std::size_t off = erog_header_bytes;
  for (Field* fld : {&f.state.z_tilde, &f.state.h, &f.state.c}) {
    fld->resize(Nx, Ny);
    for (Eigen::Index k = 0; k < fld->size(); ++k, off += 8) fld->data()[k] = get_le<double>(in, off);
  }
  return f;
}

ErogFile read_grid(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_grid(bytes);
}

void export_pgm_image(const Eigen::ArrayXXd& image, const std::string& path, double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("export_pgm: hi must exceed lo");
  std::string out = "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n255\n";
  for (Eigen::Index r = 0; r < image.rows(); ++r)
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      const double u = std::clamp((image(r, c) - lo) / (hi - lo), 0.0, 1.0);
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255 * u))));
    }
  write_bytes(path, out);
}

void export_pgm(const Field& field, const std::string& path, double lo, double hi) {
  const Eigen::ArrayXXd image = field.transpose();
  export_pgm_image(image, path, lo, hi);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void export_csv(const CsvTable& table, const std::string& path) {
  std::string out;
  for (std::size_t k = 0; k < table.header.size(); ++k) out += (k ? "," : "") + table.header[k];
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out += (k ? "," : "") + format_double(row[k]);
    out += "\n";
  }
  write_bytes(path, out);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(f, line)) return t;
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) {
      double v = 0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw IoError("read_csv: bad number '" + cell + "' in " + path);
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable diagnostics_table(const std::vector<Diagnostic>& series) {
  CsvTable t{{"t", "max_abs_z", "residual", "mass_balance", "dominant_mode", "iterations"}, {}};
  for (const auto& d : series)
    t.rows.push_back({d.t, d.max_abs_z, d.residual, d.mass_balance, static_cast<double>(d.dominant_mode),
                      static_cast<double>(d.iterations)});
  return t;
}

CsvTable raster_table(const StabilityRaster& r) {
  CsvTable t{{"xi", "eta", "growth", "stable"}, {}};
  for (Eigen::Index j = 0; j < r.growth.rows(); ++j)
    for (Eigen::Index i = 0; i < r.growth.cols(); ++i)
      t.rows.push_back({r.xi_axis[i], r.eta_axis[j], r.growth(j, i),
                        static_cast<double>(static_cast<signed char>(r.verdict(j, i)))});
  return t;
}

CsvTable spectrum_table(const TransverseSpectrum& spec, double Ly) {
  CsvTable t{{"N", "frequency", "magnitude"}, {}};
  for (Eigen::Index k = 0; k < spec.magnitudes.size(); ++k)
    t.rows.push_back({static_cast<double>(k), 2 * std::numbers::pi * static_cast<double>(k) / Ly, spec.magnitudes[k]});
  return t;
}

}  // namespace erosion

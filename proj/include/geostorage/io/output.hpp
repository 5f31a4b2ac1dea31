#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "geostorage/assembly.hpp"
#include "geostorage/errors.hpp"
#include "geostorage/format.hpp"
#include "geostorage/grid.hpp"

namespace geostorage::io {

/// Full temperature field at one time level.
struct FieldSnapshot {
  int step{};
  double time{};
  PumpRegime regime{PumpRegime::Off};
  FullField field;
};

/// "x,y,temperature" rows with i as the slow index, 17 significant digits.
inline void write_field_csv(std::ostream& os, const FullField& field, double hx, double hy) {
  os << "x,y,temperature\n";
  for (int i = 0; i <= field.nx; ++i) {
    for (int j = 0; j <= field.ny; ++j) {
      os << format_g17(i * hx) << ',' << format_g17(j * hy) << ',' << format_g17(field.at(i, j)) << '\n';
    }
  }
}

inline void write_field_csv(const std::filesystem::path& path, const FullField& field, double hx,
                            double hy) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_field_csv(out, field, hx, hy);
}

/// Reads a field written by write_field_csv; checks the grid dimensions and
/// coordinates.
inline FullField read_field_csv(std::istream& in, int nx, int ny, double hx, double hy,
                                const std::string& source = "<field>") {
  std::string line;
  if (!std::getline(in, line) || line != "x,y,temperature") {
    throw ConfigError(source + ":1: expected header 'x,y,temperature'");
  }
  FullField field(nx, ny);
  const double tol_x = 1e-9 * hx * (nx + 1);
  const double tol_y = 1e-9 * hy * (ny + 1);
  int line_no = 1;
  for (int i = 0; i <= nx; ++i) {
    for (int j = 0; j <= ny; ++j) {
      ++line_no;
      if (!std::getline(in, line)) {
        throw ConfigError(source + ": expected " + std::to_string((nx + 1) * (ny + 1)) +
                          " data rows, file ends at line " + std::to_string(line_no - 1));
      }
      double v[3];
      const char* p = line.data();
      const char* end = line.data() + line.size();
      for (int c = 0; c < 3; ++c) {
        const auto res = std::from_chars(p, end, v[c]);
        if (res.ec != std::errc{}) {
          throw ConfigError(source + ":" + std::to_string(line_no) + ": malformed number");
        }
        p = res.ptr;
        if (c < 2) {
          if (p == end || *p != ',') throw ConfigError(source + ":" + std::to_string(line_no) + ": expected ','");
          ++p;
        }
      }
      if (p != end && !(p + 1 == end && *p == '\r')) {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": trailing characters");
      }
      if (std::abs(v[0] - i * hx) > tol_x || std::abs(v[1] - j * hy) > tol_y) {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": coordinates do not match grid point (" +
                          std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      if (!std::isfinite(v[2])) throw ConfigError(source + ":" + std::to_string(line_no) + ": non-finite temperature");
      field.at(i, j) = v[2];
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line != "\r") throw ConfigError(source + ":" + std::to_string(line_no) + ": extra data row");
  }
  return field;
}

inline FullField read_field_csv(const std::filesystem::path& path, int nx, int ny, double hx, double hy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open field file");
  return read_field_csv(in, nx, ny, hx, hy, path.string());
}

/// Unknown vector taken from a full field.
inline Vector restrict_to_unknowns(const GridModel& grid, const FullField& field) {
  Vector y(grid.n());
  for (int l = 0; l < grid.n(); ++l) {
    const Node nd = grid.node_of(l);
    y[l] = field.at(nd.i, nd.j);
  }
  return y;
}

/// Volumetric heat capacity rho c_p at a grid point; interface points take
/// the mean of both materials.
inline double volumetric_heat_at(const StorageConfig& config, const GridModel& grid, int j) {
  if (j == 0 || j == grid.ny()) return config.medium.volumetric_heat();
  switch (grid.row_kind(j)) {
    case GridModel::RowKind::Fluid:
      return config.fluid.volumetric_heat();
    case GridModel::RowKind::InterfaceLower:
    case GridModel::RowKind::InterfaceUpper:
      return 0.5 * (config.fluid.volumetric_heat() + config.medium.volumetric_heat());
    case GridModel::RowKind::Medium:
      break;
  }
  return config.medium.volumetric_heat();
}

struct FieldAggregate {
  double mean_temperature{};  ///< area-weighted, trapezoidal
  double energy{};            ///< sum rho c_p Q h_x h_y, trapezoidal, per unit depth (J/m)
};

inline FieldAggregate aggregate(const StorageConfig& config, const GridModel& grid, const FullField& f) {
  FieldAggregate a;
  double weight_sum = 0.0;
  double weighted = 0.0;
  const double cell = grid.hx() * grid.hy();
  for (int i = 0; i <= f.nx; ++i) {
    const double wi = (i == 0 || i == f.nx) ? 0.5 : 1.0;
    for (int j = 0; j <= f.ny; ++j) {
      const double w = wi * ((j == 0 || j == f.ny) ? 0.5 : 1.0);
      weight_sum += w;
      weighted += w * f.at(i, j);
      a.energy += w * volumetric_heat_at(config, grid, j) * f.at(i, j) * cell;
    }
  }
  a.mean_temperature = weighted / weight_sum;
  return a;
}

}  // namespace geostorage::io

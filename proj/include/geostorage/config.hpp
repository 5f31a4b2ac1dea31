#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "geostorage/errors.hpp"

namespace geostorage {

/// Constant material parameters of one subdomain (SI units).
struct Material {
  double density{};        ///< kg/m^3
  double conductivity{};   ///< W/(m K)
  double heat_capacity{};  ///< J/(kg K)

  /// Thermal diffusivity kappa / (rho c_p) in m^2/s.
  double diffusivity() const { return conductivity / (density * heat_capacity); }
  /// Volumetric heat capacity rho c_p in J/(m^3 K).
  double volumetric_heat() const { return density * heat_capacity; }

  bool operator==(const Material&) const = default;
};

/// A straight, full-width pipe heat exchanger occupying the grid rows
/// first_fluid_row..last_fluid_row. Its two fluid/soil interfaces lie on the
/// grid rows directly below and above.
struct PhxLayer {
  int first_fluid_row{};
  int last_fluid_row{};

  int lower_interface() const { return first_fluid_row - 1; }
  int upper_interface() const { return last_fluid_row + 1; }

  bool operator==(const PhxLayer&) const = default;
};

/// Underground temperature Q_G(t) = amplitude * cos(2 pi t / period) + mean.
struct GroundTemperature {
  double amplitude{0.0};
  double mean{10.0};
  double period{31557600.0};  // one Julian year in seconds

  double at(double t) const {
    if (amplitude == 0.0) return mean;
    return amplitude * std::cos(2.0 * std::numbers::pi * t / period) + mean;
  }

  bool operator==(const GroundTemperature&) const = default;
};

/// Geometry, materials, PHX layout, boundary data and discretization sizes of
/// the 2D storage cross-section.
struct StorageConfig {
  double length_x{1.0};  ///< m
  double length_y{1.0};  ///< m
  Material medium{};
  Material fluid{};
  double ground_transfer{0.0};  ///< lambda_G, W/(m^2 K), bottom Robin coefficient
  double pump_velocity{1.0};    ///< fluid speed while the pump runs, m/s
  std::vector<PhxLayer> phx{};  ///< ordered bottom to top
  int nx{3};                    ///< number of grid intervals in x
  int ny{3};                    ///< number of grid intervals in y
  double horizon{1.0};          ///< final time T, s
  GroundTemperature ground{};

  double hx() const { return length_x / nx; }
  double hy() const { return length_y / ny; }

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;

  bool operator==(const StorageConfig&) const = default;
};

namespace detail {

inline void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

inline void require_material(const Material& m, const std::string& name) {
  require(m.density > 0.0 && std::isfinite(m.density), name + ".density must be positive");
  require(m.conductivity > 0.0 && std::isfinite(m.conductivity),
          name + ".conductivity must be positive");
  require(m.heat_capacity > 0.0 && std::isfinite(m.heat_capacity),
          name + ".heat_capacity must be positive");
}

}  // namespace detail

inline void StorageConfig::validate() const {
  using detail::require;
  require(length_x > 0.0 && std::isfinite(length_x), "length_x must be positive");
  require(length_y > 0.0 && std::isfinite(length_y), "length_y must be positive");
  detail::require_material(medium, "medium");
  detail::require_material(fluid, "fluid");
  require(ground_transfer >= 0.0 && std::isfinite(ground_transfer),
          "lambda_G must be non-negative");
  require(pump_velocity > 0.0 && std::isfinite(pump_velocity), "v_bar must be positive");
  require(horizon > 0.0 && std::isfinite(horizon), "horizon must be positive");
  require(ground.period > 0.0, "ground period T_a must be positive");
  require(nx >= 3, "N_x must be at least 3");
  const int np = static_cast<int>(phx.size());
  require(ny >= 2 * np + 3, "N_y must be at least 2*n_P + 3");

  // Every PHX needs soil rows below and above it and no interface may sit on
  // the outermost interior rows, so rows 1 and N_y-1 are always soil.
  int previous_upper = 0;
  for (int p = 0; p < np; ++p) {
    const PhxLayer& layer = phx[p];
    const std::string tag = "phx[" + std::to_string(p) + "]";
    require(layer.first_fluid_row <= layer.last_fluid_row,
            tag + ": needs at least one fluid row");
    require(layer.lower_interface() >= 2,
            tag + ": lower interface row must be >= 2 (interface touches the bottom)");
    require(layer.upper_interface() <= ny - 2,
            tag + ": upper interface row must be <= N_y-2 (interface touches the top)");
    if (p > 0) {
      require(layer.lower_interface() > previous_upper,
              tag + ": overlaps the PHX below it");
      require(layer.lower_interface() >= previous_upper + 2,
              tag + ": needs at least one soil row between it and the PHX below");
    }
    previous_upper = layer.upper_interface();
  }
}

}  // namespace geostorage

#pragma once

#include <cstdint>
#include <string_view>

#include "geostorage/config.hpp"
#include "geostorage/grid.hpp"

namespace geostorage {

enum class PumpRegime : std::uint8_t { On, Off };

inline std::string_view to_string(PumpRegime r) { return r == PumpRegime::On ? "on" : "off"; }

/// Scalars derived from the material parameters and the grid.
struct MaterialDerived {
  double diffusivity_medium{};  ///< a_M
  double diffusivity_fluid{};   ///< a_F
  /// Interface interpolation weights: an interface value is
  /// weight_fluid * (fluid neighbour) + weight_medium * (soil neighbour).
  double weight_fluid{};
  double weight_medium{};
  /// Bottom Robin elimination: Q(i,0) = robin_interior * Q(i,1) + robin_ground * Q_G.
  double robin_interior{};
  double robin_ground{};
};

inline MaterialDerived derive_materials(const StorageConfig& config, const GridModel& grid) {
  MaterialDerived d;
  d.diffusivity_medium = config.medium.diffusivity();
  d.diffusivity_fluid = config.fluid.diffusivity();
  const double kf = config.fluid.conductivity;
  const double km = config.medium.conductivity;
  d.weight_fluid = kf / (kf + km);
  d.weight_medium = 1.0 - d.weight_fluid;
  const double lh = config.ground_transfer * grid.hy();
  d.robin_interior = km / (km + lh);
  d.robin_ground = lh / (km + lh);
  return d;
}

/// Five-point upwind stencil in the fluid; flow runs in +x.
struct FluidStencil {
  double downstream{};  ///< weight of Q(i+1, j)
  double upstream{};    ///< weight of Q(i-1, j), carries the convective part
  double vertical{};    ///< weight of Q(i, j+-1)
  double center{};
};

/// Five-point diffusion stencil in the soil.
struct MediumStencil {
  double horizontal{};
  double vertical{};
  double center{};
};

/// Every stencil coefficient of the semi-discrete operator for one pump regime.
///
/// The composite diagonals are what remains after a boundary or interface
/// neighbour has been eliminated. All units are 1/s.
struct StencilCoefficients {
  PumpRegime regime{PumpRegime::On};
  double velocity{};  ///< v_0: pump velocity when on, 0 when off

  FluidStencil fluid{};
  MediumStencil medium{};

  // Rows next to an interface.
  double medium_cross{};             ///< soil row -> fluid row across the interface
  double medium_interface_center{};
  double fluid_cross{};              ///< fluid row -> soil row across the interface
  double fluid_interface_center{};

  // Soil rows on the outer boundary.
  double medium_bottom_center{};         ///< Robin bottom, interior column
  double medium_top_center{};            ///< insulated top, interior column
  double medium_side_center{};           ///< insulated left/right column
  double medium_bottom_corner_center{};  ///< bottom row, first/last column
  double medium_top_corner_center{};     ///< top row, first/last column
  double medium_interface_side_center{};

  // Fluid rows in the first and last column.
  double fluid_inlet_center{};  ///< Dirichlet inlet (on) or insulated inlet (off)
  double fluid_outlet_center{};
  double fluid_interface_inlet_center{};
  double fluid_interface_outlet_center{};
};

inline StencilCoefficients stencil(const StorageConfig& config, const GridModel& grid,
                                   PumpRegime regime) {
  const MaterialDerived d = derive_materials(config, grid);
  const double hx2 = grid.hx() * grid.hx();
  const double hy2 = grid.hy() * grid.hy();
  const double v0 = regime == PumpRegime::On ? config.pump_velocity : 0.0;

  StencilCoefficients c;
  c.regime = regime;
  c.velocity = v0;

  const double af = d.diffusivity_fluid;
  c.fluid.downstream = af / hx2;
  c.fluid.upstream = af / hx2 + v0 / grid.hx();
  c.fluid.vertical = af / hy2;
  c.fluid.center = -2.0 * af * (1.0 / hx2 + 1.0 / hy2) - v0 / grid.hx();

  const double am = d.diffusivity_medium;
  c.medium.horizontal = am / hx2;
  c.medium.vertical = am / hy2;
  c.medium.center = -2.0 * am * (1.0 / hx2 + 1.0 / hy2);

  c.medium_cross = d.weight_fluid * c.medium.vertical;
  c.medium_interface_center = c.medium.center + d.weight_medium * c.medium.vertical;
  c.fluid_cross = d.weight_medium * c.fluid.vertical;
  c.fluid_interface_center = c.fluid.center + d.weight_fluid * c.fluid.vertical;

  c.medium_bottom_center = c.medium.center + d.robin_interior * c.medium.vertical;
  c.medium_top_center = c.medium.center + c.medium.vertical;
  c.medium_side_center = c.medium.center + c.medium.horizontal;
  c.medium_bottom_corner_center =
      c.medium.horizontal + d.robin_interior * c.medium.vertical + c.medium.center;
  c.medium_top_corner_center = c.medium.horizontal + c.medium.vertical + c.medium.center;
  c.medium_interface_side_center = c.medium_side_center + d.weight_medium * c.medium.vertical;

  // The inlet neighbour is prescribed while pumping and mirrors Q(1, j) otherwise.
  c.fluid_inlet_center =
      regime == PumpRegime::On ? c.fluid.center : c.fluid.center + af / hx2;
  c.fluid_outlet_center = c.fluid.center + c.fluid.downstream;
  c.fluid_interface_inlet_center = c.fluid_inlet_center + d.weight_fluid * c.fluid.vertical;
  c.fluid_interface_outlet_center = c.fluid_outlet_center + d.weight_fluid * c.fluid.vertical;
  return c;
}

}  // namespace geostorage

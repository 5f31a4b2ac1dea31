#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "geostorage/coefficients.hpp"
#include "geostorage/config.hpp"
#include "geostorage/errors.hpp"
#include "geostorage/grid.hpp"

namespace geostorage {

/// Compressed sparse rows with sorted column indices.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
/// n x 2 input matrix; column 0 drives the inlet, column 1 the ground.
using InputMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;
using Vector = Eigen::VectorXd;

/// Input g(t) = (Q_in, Q_G) while pumping, (0, Q_G) otherwise.
struct InputSignal {
  double inlet{};
  double ground{};

  Eigen::Vector2d vector() const { return {inlet, ground}; }
  double max_norm() const { return std::max(std::abs(inlet), std::abs(ground)); }
  bool operator==(const InputSignal&) const = default;
};

inline InputSignal input_at(const StorageConfig& config, PumpRegime regime, double t,
                            double inlet_temperature) {
  return {regime == PumpRegime::On ? inlet_temperature : 0.0, config.ground.at(t)};
}

/// dY/dt = A Y + B g for one pump regime.
struct RegimeSystem {
  PumpRegime regime{PumpRegime::On};
  SparseMatrix a;
  InputMatrix b;
};

struct SystemMatrices {
  RegimeSystem on;
  RegimeSystem off;

  const RegimeSystem& operator[](PumpRegime r) const { return r == PumpRegime::On ? on : off; }
  int n() const { return static_cast<int>(on.a.rows()); }
};

namespace detail {

/// A grid value written as a combination of unknowns and input channels.
struct LinearForm {
  std::pair<int, double> terms[2]{};
  int size{0};
  double inlet{0.0};
  double ground{0.0};

  void add(int unknown, double weight) { terms[size++] = {unknown, weight}; }
};

inline int unknown_or_throw(const GridModel& grid, int i, int j) {
  const auto l = grid.index_of(i, j);
  if (!l) {
    throw AssemblyError("eliminated point (" + std::to_string(i) + ", " + std::to_string(j) +
                        ") depends on another eliminated point");
  }
  return *l;
}

/// Expresses Q(i, j) through the discretized boundary and interface relations.
inline LinearForm resolve(const GridModel& grid, const MaterialDerived& d, PumpRegime regime,
                          int i, int j) {
  LinearForm f;
  switch (grid.classify(i, j)) {
    case NodeClass::Medium:
    case NodeClass::Fluid:
      f.add(*grid.index_of(i, j), 1.0);
      break;
    case NodeClass::InterfaceLower:
      f.add(unknown_or_throw(grid, i, j + 1), d.weight_fluid);
      f.add(unknown_or_throw(grid, i, j - 1), d.weight_medium);
      break;
    case NodeClass::InterfaceUpper:
      f.add(unknown_or_throw(grid, i, j - 1), d.weight_fluid);
      f.add(unknown_or_throw(grid, i, j + 1), d.weight_medium);
      break;
    case NodeClass::BoundaryTop:
      f.add(unknown_or_throw(grid, i, j - 1), 1.0);
      break;
    case NodeClass::BoundaryBottom:
      f.add(unknown_or_throw(grid, i, j + 1), d.robin_interior);
      f.ground = d.robin_ground;
      break;
    case NodeClass::BoundaryLeft:
      f.add(unknown_or_throw(grid, i + 1, j), 1.0);
      break;
    case NodeClass::BoundaryRight:
    case NodeClass::BoundaryOutlet:
      f.add(unknown_or_throw(grid, i - 1, j), 1.0);
      break;
    case NodeClass::BoundaryInlet:
      if (regime == PumpRegime::On) {
        f.inlet = 1.0;
      } else {
        f.add(unknown_or_throw(grid, i + 1, j), 1.0);
      }
      break;
    case NodeClass::Corner:
      throw AssemblyError("stencil references a corner point");
  }
  return f;
}

inline RegimeSystem assemble_regime(const GridModel& grid, const MaterialDerived& d,
                                    const StencilCoefficients& c) {
  const int n = grid.n();
  RegimeSystem sys;
  sys.regime = c.regime;
  sys.b = InputMatrix::Zero(n, 2);

  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(static_cast<std::size_t>(5) * n);
  std::vector<std::pair<int, double>> row;

  for (int l = 0; l < n; ++l) {
    const Node node = grid.node_of(l);
    const bool fluid = grid.classify(node.i, node.j) == NodeClass::Fluid;
    const double center = fluid ? c.fluid.center : c.medium.center;
    const double east = fluid ? c.fluid.downstream : c.medium.horizontal;
    const double west = fluid ? c.fluid.upstream : c.medium.horizontal;
    const double vertical = fluid ? c.fluid.vertical : c.medium.vertical;

    row.clear();
    row.emplace_back(l, center);
    const std::pair<Node, double> neighbours[4] = {{{node.i + 1, node.j}, east},
                                                   {{node.i - 1, node.j}, west},
                                                   {{node.i, node.j + 1}, vertical},
                                                   {{node.i, node.j - 1}, vertical}};
    for (const auto& [nb, coeff] : neighbours) {
      const LinearForm f = resolve(grid, d, c.regime, nb.i, nb.j);
      for (int t = 0; t < f.size; ++t) row.emplace_back(f.terms[t].first, coeff * f.terms[t].second);
      sys.b(l, 0) += coeff * f.inlet;
      sys.b(l, 1) += coeff * f.ground;
    }

    std::stable_sort(row.begin(), row.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    for (std::size_t k = 0; k < row.size();) {
      const int col = row[k].first;
      double value = 0.0;
      for (; k < row.size() && row[k].first == col; ++k) value += row[k].second;
      if (value != 0.0) triplets.emplace_back(l, col, value);
    }
  }
  sys.a.resize(n, n);
  sys.a.setFromTriplets(triplets.begin(), triplets.end());
  sys.a.makeCompressed();
  return sys;
}

}  // namespace detail

/// Assembles both regime pairs (A, B) with boundary and interface points
/// eliminated.
inline SystemMatrices assemble(const GridModel& grid, const MaterialDerived& derived,
                               const StencilCoefficients& on, const StencilCoefficients& off) {
  if (on.regime != PumpRegime::On || off.regime != PumpRegime::Off) {
    throw AssemblyError("assemble: coefficient sets passed in the wrong regime order");
  }
  return {detail::assemble_regime(grid, derived, on), detail::assemble_regime(grid, derived, off)};
}

inline SystemMatrices assemble(const StorageConfig& config, const GridModel& grid) {
  return assemble(grid, derive_materials(config, grid), stencil(config, grid, PumpRegime::On),
                  stencil(config, grid, PumpRegime::Off));
}

/// A Y + B g for the given regime.
inline Vector apply_operator(const SystemMatrices& mats, PumpRegime regime, const Vector& y,
                             const InputSignal& g) {
  const RegimeSystem& sys = mats[regime];
  if (y.size() != sys.a.cols()) {
    throw std::invalid_argument("apply_operator: state has size " + std::to_string(y.size()) +
                                ", expected " + std::to_string(sys.a.cols()));
  }
  Vector out = sys.a * y;
  out.noalias() += sys.b * g.vector();
  return out;
}

/// Temperatures at all (N_x+1) x (N_y+1) grid points, stored with i as the
/// slow index: values[i * (N_y+1) + j].
struct FullField {
  int nx{};
  int ny{};
  std::vector<double> values;

  FullField() = default;
  FullField(int nx_, int ny_) : nx(nx_), ny(ny_), values((nx_ + 1) * (ny_ + 1), 0.0) {}

  double& at(int i, int j) { return values[i * (ny + 1) + j]; }
  double at(int i, int j) const { return values[i * (ny + 1) + j]; }
  bool operator==(const FullField&) const = default;
};

/// Recovers eliminated boundary and interface values from the unknowns.
/// Corner points never enter a stencil; they get the mean of their two
/// boundary neighbours so plots stay continuous.
inline FullField reconstruct_full_field(const GridModel& grid, const MaterialDerived& d,
                                        const Vector& y, const InputSignal& g,
                                        PumpRegime regime) {
  if (y.size() != grid.n()) throw std::invalid_argument("reconstruct_full_field: wrong state size");
  const int nx = grid.nx();
  const int ny = grid.ny();
  FullField field(nx, ny);

  auto eval = [&](int i, int j) {
    const detail::LinearForm f = detail::resolve(grid, d, regime, i, j);
    double v = f.inlet * g.inlet + f.ground * g.ground;
    for (int t = 0; t < f.size; ++t) v += f.terms[t].second * y[f.terms[t].first];
    return v;
  };

  // Unknowns and interfaces only depend on Y.
  for (int i = 1; i < nx; ++i)
    for (int j = 1; j < ny; ++j) field.at(i, j) = eval(i, j);
  // Outer boundary copies from the already filled interior, including
  // interface rows on the side walls.
  for (int j = 1; j < ny; ++j) {
    field.at(0, j) = grid.classify(0, j) == NodeClass::BoundaryInlet && regime == PumpRegime::On
                         ? g.inlet
                         : field.at(1, j);
    field.at(nx, j) = field.at(nx - 1, j);
  }
  for (int i = 1; i < nx; ++i) {
    field.at(i, 0) = eval(i, 0);
    field.at(i, ny) = field.at(i, ny - 1);
  }
  field.at(0, 0) = 0.5 * (field.at(1, 0) + field.at(0, 1));
  field.at(nx, 0) = 0.5 * (field.at(nx - 1, 0) + field.at(nx, 1));
  field.at(0, ny) = 0.5 * (field.at(1, ny) + field.at(0, ny - 1));
  field.at(nx, ny) = 0.5 * (field.at(nx - 1, ny) + field.at(nx, ny - 1));
  return field;
}

}  // namespace geostorage

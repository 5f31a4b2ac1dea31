#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "geostorage/config.hpp"

namespace geostorage {

enum class NodeClass : std::uint8_t {
  Medium,
  Fluid,
  InterfaceLower,
  InterfaceUpper,
  BoundaryTop,
  BoundaryBottom,
  BoundaryLeft,
  BoundaryRight,
  BoundaryInlet,
  BoundaryOutlet,
  Corner,
};

inline std::string_view to_string(NodeClass c) {
  switch (c) {
    case NodeClass::Medium: return "medium";
    case NodeClass::Fluid: return "fluid";
    case NodeClass::InterfaceLower: return "interface_lower";
    case NodeClass::InterfaceUpper: return "interface_upper";
    case NodeClass::BoundaryTop: return "boundary_top";
    case NodeClass::BoundaryBottom: return "boundary_bottom";
    case NodeClass::BoundaryLeft: return "boundary_left";
    case NodeClass::BoundaryRight: return "boundary_right";
    case NodeClass::BoundaryInlet: return "boundary_inlet";
    case NodeClass::BoundaryOutlet: return "boundary_outlet";
    case NodeClass::Corner: return "corner";
  }
  return "?";
}

/// Grid point (i, j) with 0 <= i <= N_x, 0 <= j <= N_y.
struct Node {
  int i{};
  int j{};
  bool operator==(const Node&) const = default;
};

/// Classification of the storage grid and the map K from grid points to the
/// reduced unknown vector.
///
/// Unknowns are the medium and fluid points. They are numbered column by
/// column (i = 1..N_x-1), bottom to top, skipping interface rows, so each
/// column owns q = N_y - 2 n_P - 1 consecutive indices. Indices are 0-based:
/// index_of(1, 1) == 0 and index_of(N_x-1, N_y-1) == n-1.
class GridModel {
 public:
  enum class RowKind : std::uint8_t { Medium, Fluid, InterfaceLower, InterfaceUpper };

  GridModel(int nx, int ny, double hx, double hy, std::vector<RowKind> rows);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  int phx_count() const { return phx_count_; }
  /// Unknowns per grid column.
  int q() const { return q_; }
  /// Total number of unknowns, (N_x-1) q.
  int n() const { return (nx_ - 1) * q_; }

  /// Kind of interior row j, 1 <= j <= N_y-1.
  RowKind row_kind(int j) const;
  bool is_fluid_row(int j) const { return row_kind(j) == RowKind::Fluid; }
  bool is_interface_row(int j) const {
    const RowKind k = row_kind(j);
    return k == RowKind::InterfaceLower || k == RowKind::InterfaceUpper;
  }

  /// Throws std::out_of_range outside 0..N_x x 0..N_y.
  NodeClass classify(int i, int j) const;

  /// K(i, j) for medium and fluid points, nullopt for eliminated points.
  std::optional<int> index_of(int i, int j) const;

  /// Inverse of K.
  Node node_of(int l) const;

  /// All grid points of the given class in (i, j) lexicographic order.
  std::vector<Node> nodes(NodeClass c) const;

 private:
  void check_range(int i, int j) const;

  int nx_;
  int ny_;
  double hx_;
  double hy_;
  int phx_count_{0};
  int q_{0};
  std::vector<RowKind> rows_;     // index j, entries 1..ny-1 meaningful
  std::vector<int> row_slot_;     // position of row j inside a column, -1 if eliminated
  std::vector<int> slot_row_;     // inverse of row_slot_
};

inline GridModel::GridModel(int nx, int ny, double hx, double hy, std::vector<RowKind> rows)
    : nx_(nx), ny_(ny), hx_(hx), hy_(hy), rows_(std::move(rows)) {
  row_slot_.assign(ny_ + 1, -1);
  for (int j = 1; j <= ny_ - 1; ++j) {
    const RowKind k = rows_[j];
    if (k == RowKind::Medium || k == RowKind::Fluid) {
      row_slot_[j] = q_++;
      slot_row_.push_back(j);
    } else if (k == RowKind::InterfaceLower) {
      ++phx_count_;
    }
  }
}

inline void GridModel::check_range(int i, int j) const {
  if (i < 0 || i > nx_ || j < 0 || j > ny_) {
    throw std::out_of_range("grid index (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") outside 0..N_x x 0..N_y");
  }
}

inline GridModel::RowKind GridModel::row_kind(int j) const {
  if (j < 1 || j > ny_ - 1) throw std::out_of_range("row_kind: j outside 1..N_y-1");
  return rows_[j];
}

inline NodeClass GridModel::classify(int i, int j) const {
  check_range(i, j);
  const bool left = i == 0;
  const bool right = i == nx_;
  const bool bottom = j == 0;
  const bool top = j == ny_;
  if ((left || right) && (bottom || top)) return NodeClass::Corner;
  if (bottom) return NodeClass::BoundaryBottom;
  if (top) return NodeClass::BoundaryTop;
  if (left) return is_fluid_row(j) ? NodeClass::BoundaryInlet : NodeClass::BoundaryLeft;
  if (right) return is_fluid_row(j) ? NodeClass::BoundaryOutlet : NodeClass::BoundaryRight;
  switch (rows_[j]) {
    case RowKind::Medium: return NodeClass::Medium;
    case RowKind::Fluid: return NodeClass::Fluid;
    case RowKind::InterfaceLower: return NodeClass::InterfaceLower;
    case RowKind::InterfaceUpper: return NodeClass::InterfaceUpper;
  }
  return NodeClass::Corner;
}

inline std::optional<int> GridModel::index_of(int i, int j) const {
  check_range(i, j);
  if (i == 0 || i == nx_ || j == 0 || j == ny_) return std::nullopt;
  const int slot = row_slot_[j];
  if (slot < 0) return std::nullopt;
  return (i - 1) * q_ + slot;
}

inline Node GridModel::node_of(int l) const {
  if (l < 0 || l >= n()) throw std::out_of_range("node_of: unknown index outside 0..n-1");
  return Node{l / q_ + 1, slot_row_[l % q_]};
}

inline std::vector<Node> GridModel::nodes(NodeClass c) const {
  std::vector<Node> out;
  for (int i = 0; i <= nx_; ++i)
    for (int j = 0; j <= ny_; ++j)
      if (classify(i, j) == c) out.push_back({i, j});
  return out;
}

/// Validates the configuration and classifies every grid row.
inline GridModel build_grid(const StorageConfig& config) {
  config.validate();
  using RowKind = GridModel::RowKind;
  std::vector<RowKind> rows(config.ny + 1, RowKind::Medium);
  for (const PhxLayer& layer : config.phx) {
    rows[layer.lower_interface()] = RowKind::InterfaceLower;
    rows[layer.upper_interface()] = RowKind::InterfaceUpper;
    for (int j = layer.first_fluid_row; j <= layer.last_fluid_row; ++j) rows[j] = RowKind::Fluid;
  }
  return GridModel(config.nx, config.ny, config.hx(), config.hy(), std::move(rows));
}

}  // namespace geostorage

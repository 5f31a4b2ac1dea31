#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "geostorage/assembly.hpp"
#include "geostorage/coefficients.hpp"
#include "geostorage/format.hpp"
#include "geostorage/grid.hpp"

namespace geostorage {

// ---------------------------------------------------------------------------
// Row archetypes
// ---------------------------------------------------------------------------

/// The fourteen kinds of rows the assembled operator can have when PHXs and
/// soil layers are at least three rows thick. Values are the row numbers of
/// the reference table of diagonals, radii, margins and row sums.
enum class Archetype : int {
  Other = 0,
  MediumBottomCorner = 1,
  MediumTopCorner = 2,
  MediumBottom = 3,
  MediumTop = 4,
  MediumSide = 5,
  MediumInterior = 6,
  FluidInterior = 7,
  FluidInlet = 8,
  FluidOutlet = 9,
  MediumInterface = 10,
  MediumInterfaceSide = 11,
  FluidInterface = 12,
  FluidInterfaceInlet = 13,
  FluidInterfaceOutlet = 14,
};

inline constexpr int kArchetypeCount = 14;

inline std::string_view to_string(Archetype a) {
  switch (a) {
    case Archetype::Other: return "other";
    case Archetype::MediumBottomCorner: return "medium_bottom_corner";
    case Archetype::MediumTopCorner: return "medium_top_corner";
    case Archetype::MediumBottom: return "medium_bottom";
    case Archetype::MediumTop: return "medium_top";
    case Archetype::MediumSide: return "medium_side";
    case Archetype::MediumInterior: return "medium_interior";
    case Archetype::FluidInterior: return "fluid_interior";
    case Archetype::FluidInlet: return "fluid_inlet";
    case Archetype::FluidOutlet: return "fluid_outlet";
    case Archetype::MediumInterface: return "medium_interface";
    case Archetype::MediumInterfaceSide: return "medium_interface_side";
    case Archetype::FluidInterface: return "fluid_interface";
    case Archetype::FluidInterfaceInlet: return "fluid_interface_inlet";
    case Archetype::FluidInterfaceOutlet: return "fluid_interface_outlet";
  }
  return "?";
}

/// Structural archetype of unknown l. Rows touching two eliminated
/// neighbours of different kinds (a single fluid row between two
/// interfaces, a soil row between the bottom and an interface, ...) are Other.
inline Archetype classify_row(const GridModel& grid, int l) {
  const Node node = grid.node_of(l);
  const bool left = node.i == 1;
  const bool right = node.i == grid.nx() - 1;
  const bool edge = left || right;
  const bool bottom = node.j == 1;
  const bool top = node.j == grid.ny() - 1;
  const int interfaces = (node.j - 1 >= 1 && grid.is_interface_row(node.j - 1) ? 1 : 0) +
                         (node.j + 1 <= grid.ny() - 1 && grid.is_interface_row(node.j + 1) ? 1 : 0);

  if (grid.is_fluid_row(node.j)) {
    if (interfaces == 2 || (left && right)) return Archetype::Other;
    if (interfaces == 1) {
      return left ? Archetype::FluidInterfaceInlet
                  : right ? Archetype::FluidInterfaceOutlet : Archetype::FluidInterface;
    }
    return left ? Archetype::FluidInlet : right ? Archetype::FluidOutlet : Archetype::FluidInterior;
  }

  const int special = (bottom ? 1 : 0) + (top ? 1 : 0) + interfaces;
  if (special > 1) return Archetype::Other;
  if (bottom) return edge ? Archetype::MediumBottomCorner : Archetype::MediumBottom;
  if (top) return edge ? Archetype::MediumTopCorner : Archetype::MediumTop;
  if (interfaces == 1) return edge ? Archetype::MediumInterfaceSide : Archetype::MediumInterface;
  return edge ? Archetype::MediumSide : Archetype::MediumInterior;
}

// ---------------------------------------------------------------------------
// Row characteristics
// ---------------------------------------------------------------------------

/// Gershgorin data of one matrix row.
struct RowDiagnostics {
  double diagonal{};  ///< M_ii, the disc centre
  double radius{};    ///< R_i = sum_{j != i} |M_ij|
  double margin{};    ///< J_i = |M_ii| - R_i
  double row_sum{};   ///< S_i = |M_ii| + R_i
  Archetype archetype{Archetype::Other};
};

inline std::vector<RowDiagnostics> row_diagnostics(const SparseMatrix& m) {
  std::vector<RowDiagnostics> out(static_cast<std::size_t>(m.rows()));
  for (int r = 0; r < m.outerSize(); ++r) {
    double diag = 0.0;
    double radius = 0.0;
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      if (it.col() == r) {
        diag = it.value();
      } else {
        radius += std::abs(it.value());
      }
    }
    out[r] = {diag, radius, std::abs(diag) - radius, std::abs(diag) + radius, Archetype::Other};
  }
  return out;
}

/// Rounding allowance for J_i: a margin within it of zero counts as zero.
inline double margin_rounding(const RowDiagnostics& row) {
  return 16.0 * std::numeric_limits<double>::epsilon() * row.row_sum;
}

inline bool weakly_dominant_row(const RowDiagnostics& row) { return row.margin >= -margin_rounding(row); }
inline bool strictly_dominant_row(const RowDiagnostics& row) { return row.margin > margin_rounding(row); }

/// Same as above with each row labelled by its archetype.
inline std::vector<RowDiagnostics> row_diagnostics(const SparseMatrix& m, const GridModel& grid) {
  auto out = row_diagnostics(m);
  for (int l = 0; l < static_cast<int>(out.size()); ++l) out[l].archetype = classify_row(grid, l);
  return out;
}

/// Maximum absolute row sum.
inline double max_norm(const SparseMatrix& m) {
  double best = 0.0;
  for (int r = 0; r < m.outerSize(); ++r) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

inline double max_norm(const Eigen::MatrixXd& m) {
  return m.rows() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
}

inline double max_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// ---------------------------------------------------------------------------
// Gershgorin discs, strong connectivity, non-singularity
// ---------------------------------------------------------------------------

struct GershgorinCheck {
  bool in_left_half{true};  ///< every disc lies in Re z < 0 or touches 0
  std::vector<int> nonnegative_diagonal_rows;
  std::vector<int> non_dominant_rows;  ///< J_i < 0 beyond rounding
};

inline GershgorinCheck gershgorin_left_half(const SparseMatrix& m) {
  GershgorinCheck out;
  const auto rows = row_diagnostics(m);
  for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
    if (rows[r].diagonal >= 0.0) out.nonnegative_diagonal_rows.push_back(r);
    if (!weakly_dominant_row(rows[r])) out.non_dominant_rows.push_back(r);
  }
  out.in_left_half = out.nonnegative_diagonal_rows.empty() && out.non_dominant_rows.empty();
  return out;
}

/// True iff the directed graph with an edge i -> j for every M_ij != 0 is
/// strongly connected: everything is reachable from row 0 both along the
/// edges and against them.
inline bool strongly_connected(const SparseMatrix& m) {
  const int n = static_cast<int>(m.rows());
  if (n <= 1) return true;
  std::vector<std::vector<int>> forward(n), backward(n);
  for (int r = 0; r < n; ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      if (it.col() != r && it.value() != 0.0) {
        forward[r].push_back(static_cast<int>(it.col()));
        backward[it.col()].push_back(r);
      }
    }
  }
  auto reaches_all = [n](const std::vector<std::vector<int>>& adj) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : adj[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          ++count;
          stack.push_back(w);
        }
      }
    }
    return count == n;
  };
  return reaches_all(forward) && reaches_all(backward);
}

enum class StabilityVerdict {
  ProvenByDominance,       ///< Gershgorin + weak dominance + SC + a strict row
  ConfirmedByEigenvalues,  ///< dominance chain inconclusive, dense spectrum negative
  RefutedByEigenvalues,    ///< dense spectrum has max Re >= -tolerance
  Inconclusive,            ///< chain inconclusive and matrix above the dense limit
};

inline std::string_view to_string(StabilityVerdict v) {
  switch (v) {
    case StabilityVerdict::ProvenByDominance: return "proven_by_dominance";
    case StabilityVerdict::ConfirmedByEigenvalues: return "confirmed_by_eigenvalues";
    case StabilityVerdict::RefutedByEigenvalues: return "refuted_by_eigenvalues";
    case StabilityVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

/// Evidence chain for stability of a system matrix: discs in the closed left
/// half plane, and non-singularity via weak dominance, strong connectivity
/// and at least one strictly dominant row.
struct DominanceEvidence {
  bool negative_diagonal{};
  bool weakly_dominant{};
  bool strongly_connected{};
  std::vector<int> strictly_dominant_rows;
  bool gershgorin_in_left_half{};
  bool nonsingular{};  ///< proven; false means "not proven"
  bool stable{};       ///< proven; false means "not proven"
  std::string failing_link;  ///< empty when stable is proven
};

inline DominanceEvidence verify_nonsingular_stable(const SparseMatrix& m) {
  DominanceEvidence e;
  const auto rows = row_diagnostics(m);
  const GershgorinCheck g = gershgorin_left_half(m);
  e.negative_diagonal = g.nonnegative_diagonal_rows.empty();
  e.weakly_dominant = g.non_dominant_rows.empty();
  e.gershgorin_in_left_half = g.in_left_half;
  e.strongly_connected = strongly_connected(m);
  for (int r = 0; r < static_cast<int>(rows.size()); ++r)
    if (strictly_dominant_row(rows[r])) e.strictly_dominant_rows.push_back(r);

  e.nonsingular = e.weakly_dominant && e.strongly_connected && !e.strictly_dominant_rows.empty();
  e.stable = e.nonsingular && e.gershgorin_in_left_half;
  if (!e.negative_diagonal) {
    e.failing_link = "nonnegative diagonal at row " + std::to_string(g.nonnegative_diagonal_rows[0]);
  } else if (!e.weakly_dominant) {
    e.failing_link = "not weakly diagonally dominant at row " + std::to_string(g.non_dominant_rows[0]);
  } else if (!e.strongly_connected) {
    e.failing_link = "not strongly connected";
  } else if (e.strictly_dominant_rows.empty()) {
    e.failing_link = "no strictly diagonally dominant row";
  }
  return e;
}

// ---------------------------------------------------------------------------
// Dense spectrum oracle
// ---------------------------------------------------------------------------

struct SpectrumSummary {
  std::vector<std::complex<double>> eigenvalues;
  double max_real{-std::numeric_limits<double>::infinity()};
  int count{};
  int count_negative_real{};
};

inline constexpr int kDefaultDenseLimit = 2000;

/// All eigenvalues by a dense QR method. Throws std::length_error above limit.
inline SpectrumSummary eigen_oracle(const Eigen::MatrixXd& dense, int limit = kDefaultDenseLimit) {
  if (dense.rows() != dense.cols()) throw std::invalid_argument("eigen_oracle: matrix not square");
  if (dense.rows() > limit) {
    throw std::length_error("eigen_oracle: n=" + std::to_string(dense.rows()) +
                            " exceeds dense limit " + std::to_string(limit));
  }
  SpectrumSummary s;
  if (dense.rows() == 0) return s;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(dense, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigen_oracle: QR iteration failed");
  const auto& ev = solver.eigenvalues();
  s.count = static_cast<int>(ev.size());
  s.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  for (const auto& z : s.eigenvalues) {
    s.max_real = std::max(s.max_real, z.real());
    if (z.real() < 0.0) ++s.count_negative_real;
  }
  return s;
}

inline SpectrumSummary eigen_oracle(const SparseMatrix& m, int limit = kDefaultDenseLimit) {
  if (m.rows() > limit) {
    throw std::length_error("eigen_oracle: n=" + std::to_string(m.rows()) +
                            " exceeds dense limit " + std::to_string(limit));
  }
  return eigen_oracle(Eigen::MatrixXd(m), limit);
}

// ---------------------------------------------------------------------------
// Time step threshold
// ---------------------------------------------------------------------------

/// eta = 2 max(a_F, a_M) (1/h_x^2 + 1/h_y^2) + v_bar / h_x.
inline double stability_eta(const StorageConfig& config, const GridModel& grid) {
  const double a = std::max(config.fluid.diffusivity(), config.medium.diffusivity());
  return 2.0 * a * (1.0 / (grid.hx() * grid.hx()) + 1.0 / (grid.hy() * grid.hy())) +
         config.pump_velocity / grid.hx();
}

/// Largest time step with guaranteed max-norm stability; +inf for theta = 1.
inline double stability_threshold(const StorageConfig& config, const GridModel& grid, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0, 1]");
  if (theta == 1.0) return std::numeric_limits<double>::infinity();
  return 1.0 / ((1.0 - theta) * stability_eta(config, grid));
}

/// Upper bound on ||A||_inf: 4 max(a_F, a_M)(1/h_x^2 + 1/h_y^2) + 2 v_0 / h_x.
inline double system_norm_bound(const StorageConfig& config, const GridModel& grid,
                                PumpRegime regime) {
  const double a = std::max(config.fluid.diffusivity(), config.medium.diffusivity());
  const double v0 = regime == PumpRegime::On ? config.pump_velocity : 0.0;
  return 4.0 * a * (1.0 / (grid.hx() * grid.hx()) + 1.0 / (grid.hy() * grid.hy())) +
         2.0 * v0 / grid.hx();
}

// ---------------------------------------------------------------------------
// Closed-form row characteristics
// ---------------------------------------------------------------------------

/// Diagonal, radius, margin and row sum of an archetype row written directly
/// in terms of the physical and grid parameters.
struct ClosedFormRow {
  double diagonal{};
  double radius{};
  double margin{};
  double row_sum{};
};

inline ClosedFormRow closed_form_row(const StorageConfig& config, const GridModel& grid,
                                     PumpRegime regime, Archetype archetype) {
  const double am = config.medium.diffusivity();
  const double af = config.fluid.diffusivity();
  const double ix = 1.0 / (grid.hx() * grid.hx());
  const double iy = 1.0 / (grid.hy() * grid.hy());
  const double km = config.medium.conductivity;
  const double kf = config.fluid.conductivity;
  const double wf = kf / (km + kf);
  const double wm = km / (km + kf);
  const double lh = config.ground_transfer * grid.hy();
  const double rg = lh / (km + lh);
  const bool on = regime == PumpRegime::On;
  const double v = (on ? config.pump_velocity : 0.0) / grid.hx();

  // Rows with J = 0 have R = |diag| and S = 2 |diag|.
  auto balanced = [](double abs_diag) { return ClosedFormRow{-abs_diag, abs_diag, 0.0, 2.0 * abs_diag}; };

  switch (archetype) {
    case Archetype::MediumBottomCorner: {
      const double r = am * (ix + iy);
      const double j = rg * am * iy;
      return {-r - j, r, j, 2.0 * r + j};
    }
    case Archetype::MediumTopCorner: return balanced(am * (ix + iy));
    case Archetype::MediumBottom: {
      const double r = am * (2.0 * ix + iy);
      const double j = rg * am * iy;
      return {-r - j, r, j, 2.0 * r + j};
    }
    case Archetype::MediumTop: return balanced(am * (2.0 * ix + iy));
    case Archetype::MediumSide: return balanced(am * (ix + 2.0 * iy));
    case Archetype::MediumInterior: return balanced(2.0 * am * (ix + iy));
    case Archetype::FluidInterior: return balanced(2.0 * af * (ix + iy) + v);
    case Archetype::FluidInlet:
      if (on) {
        const double r = af * (ix + 2.0 * iy);
        return {-2.0 * af * (ix + iy) - v, r, af * ix + v, af * (3.0 * ix + 4.0 * iy) + v};
      }
      return balanced(af * (ix + 2.0 * iy));
    case Archetype::FluidOutlet: return balanced(af * (ix + 2.0 * iy) + v);
    case Archetype::MediumInterface: {
      const double d = am * (2.0 * ix + iy) + wf * am * iy;
      return {-d, 2.0 * am * ix + (1.0 + wf) * am * iy, 0.0,
              2.0 * am * (2.0 * ix + iy) + 2.0 * wf * am * iy};
    }
    case Archetype::MediumInterfaceSide: {
      const double d = am * (ix + iy) + wf * am * iy;
      return {-d, am * ix + (1.0 + wf) * am * iy, 0.0, 2.0 * am * (ix + iy) + 2.0 * wf * am * iy};
    }
    case Archetype::FluidInterface: {
      const double d = af * (2.0 * ix + iy) + wm * af * iy + v;
      return {-d, 2.0 * af * ix + (1.0 + wm) * af * iy + v, 0.0,
              2.0 * af * (2.0 * ix + iy) + 2.0 * wm * af * iy + 2.0 * v};
    }
    case Archetype::FluidInterfaceInlet: {
      const double r = af * ix + (1.0 + wm) * af * iy;
      if (on) {
        return {-af * (2.0 * ix + iy) - wm * af * iy - v, r, af * ix + v,
                af * (3.0 * ix + 2.0 * iy) + 2.0 * wm * af * iy + v};
      }
      return {-af * (ix + iy) - wm * af * iy, r, 0.0, 2.0 * af * (ix + iy) + 2.0 * wm * af * iy};
    }
    case Archetype::FluidInterfaceOutlet: {
      const double d = af * (ix + iy) + wm * af * iy + v;
      return {-d, af * ix + (1.0 + wm) * af * iy + v, 0.0,
              2.0 * af * (ix + iy) + 2.0 * wm * af * iy + 2.0 * v};
    }
    case Archetype::Other: break;
  }
  throw std::invalid_argument("closed_form_row: no closed form for archetype 'other'");
}

inline bool close_relative(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), std::numeric_limits<double>::min()});
}

/// Assembled versus closed-form characteristics for one archetype.
struct ArchetypeMatch {
  Archetype archetype{Archetype::Other};
  int row_count{};             ///< rows of this archetype; 0 means absent
  int representative_row{-1};  ///< first row of this archetype
  RowDiagnostics assembled{};
  ClosedFormRow expected{};
  double worst_relative_error{};  ///< over all rows of the archetype and all four values
  bool match{};
};

inline double relative_error(double got, double want) {
  const double scale = std::max(std::abs(want), std::numeric_limits<double>::min());
  return std::abs(got - want) / scale;
}

/// Compares every row of every archetype with its closed form. The margin of
/// a balanced row is compared in absolute terms against its row sum, since
/// the exact value is zero.
inline std::array<ArchetypeMatch, kArchetypeCount> compare_archetypes(
    const StorageConfig& config, const GridModel& grid, const SparseMatrix& a, PumpRegime regime,
    double tolerance = 1e-12) {
  std::array<ArchetypeMatch, kArchetypeCount> out{};
  for (int k = 0; k < kArchetypeCount; ++k) {
    out[k].archetype = static_cast<Archetype>(k + 1);
    out[k].expected = closed_form_row(config, grid, regime, out[k].archetype);
  }
  const auto rows = row_diagnostics(a, grid);
  for (int l = 0; l < static_cast<int>(rows.size()); ++l) {
    const RowDiagnostics& r = rows[l];
    if (r.archetype == Archetype::Other) continue;
    ArchetypeMatch& m = out[static_cast<int>(r.archetype) - 1];
    if (m.row_count++ == 0) {
      m.representative_row = l;
      m.assembled = r;
    }
    const ClosedFormRow& e = m.expected;
    const double margin_error = e.margin == 0.0 ? std::abs(r.margin) / e.row_sum
                                                : relative_error(r.margin, e.margin);
    m.worst_relative_error =
        std::max({m.worst_relative_error, relative_error(r.diagonal, e.diagonal),
                  relative_error(r.radius, e.radius), margin_error,
                  relative_error(r.row_sum, e.row_sum)});
  }
  for (auto& m : out) m.match = m.row_count > 0 && m.worst_relative_error <= tolerance;
  return out;
}

// ---------------------------------------------------------------------------
// Norm checks for the theta recursion
// ---------------------------------------------------------------------------

/// Bounds on G = I - tau theta A and H = I + tau (1 - theta) A for one regime.
struct ThetaRegimeCheck {
  PumpRegime regime{PumpRegime::On};
  double a_norm{};                ///< ||A||_inf
  double a_norm_bound{};          ///< 4 max(a) (1/h_x^2 + 1/h_y^2) + 2 v_0 / h_x
  bool a_norm_within_bound{};
  bool a_norm_bound_attained{};   ///< equality to 1e-12 relative
  double g_min_margin{};          ///< min_i J_i(G), computed from G itself
  bool g_strictly_dominant{};     ///< min_i J_i(G) >= 1 up to rounding
  double g_inverse_bound{};       ///< Varah bound 1 / min_i J_i(G)
  double h_norm{};                ///< ||H||_inf
  double h_step_limit{};          ///< 2 / ((1 - theta) ||A||_inf), +inf for theta = 1
  bool h_norm_at_most_one{};      ///< ||H||_inf <= 1 up to rounding
  bool h_consistent{};            ///< ||H|| <= 1 exactly when tau <= h_step_limit
};

struct ThetaNormReport {
  double theta{};
  double tau{};
  double tau_max{};
  bool tau_guaranteed{};  ///< theta == 1 or tau <= tau_max
  ThetaRegimeCheck on;
  ThetaRegimeCheck off;
};

/// Rounding allowance for quantities that are exactly 1 in real arithmetic.
inline double unit_slack(double scale) { return 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + scale); }

inline SparseMatrix identity_plus(const SparseMatrix& a, double factor) {
  SparseMatrix id(a.rows(), a.cols());
  id.setIdentity();
  SparseMatrix out = id + factor * a;
  out.makeCompressed();
  return out;
}

inline ThetaRegimeCheck theta_regime_check(const StorageConfig& config, const GridModel& grid,
                                           const RegimeSystem& sys, double theta, double tau) {
  ThetaRegimeCheck c;
  c.regime = sys.regime;
  c.a_norm = max_norm(sys.a);
  c.a_norm_bound = system_norm_bound(config, grid, sys.regime);
  c.a_norm_within_bound = c.a_norm <= c.a_norm_bound * (1.0 + 1e-12);
  c.a_norm_bound_attained = close_relative(c.a_norm, c.a_norm_bound, 1e-12);

  const SparseMatrix g = identity_plus(sys.a, -tau * theta);
  const auto g_rows = row_diagnostics(g);
  c.g_min_margin = std::numeric_limits<double>::infinity();
  for (const auto& r : g_rows) c.g_min_margin = std::min(c.g_min_margin, r.margin);
  c.g_strictly_dominant = c.g_min_margin >= 1.0 - unit_slack(tau * theta * c.a_norm);
  c.g_inverse_bound = c.g_min_margin > 0.0 ? 1.0 / c.g_min_margin
                                           : std::numeric_limits<double>::infinity();

  const SparseMatrix h = identity_plus(sys.a, tau * (1.0 - theta));
  c.h_norm = max_norm(h);
  c.h_step_limit = theta == 1.0 ? std::numeric_limits<double>::infinity()
                                : 2.0 / ((1.0 - theta) * c.a_norm);
  c.h_norm_at_most_one = c.h_norm <= 1.0 + unit_slack(tau * (1.0 - theta) * c.a_norm);
  c.h_consistent = (tau <= c.h_step_limit) == c.h_norm_at_most_one;
  return c;
}

inline ThetaNormReport theta_norm_checks(const StorageConfig& config, const GridModel& grid,
                                         const SystemMatrices& mats, double theta, double tau) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0, 1]");
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  ThetaNormReport r;
  r.theta = theta;
  r.tau = tau;
  r.tau_max = stability_threshold(config, grid, theta);
  r.tau_guaranteed = theta == 1.0 || tau <= r.tau_max;
  r.on = theta_regime_check(config, grid, mats.on, theta, tau);
  r.off = theta_regime_check(config, grid, mats.off, theta, tau);
  return r;
}

// ---------------------------------------------------------------------------
// Stability report
// ---------------------------------------------------------------------------

struct StabilityReport {
  PumpRegime regime{PumpRegime::On};
  int n{};
  long nonzeros{};
  std::vector<RowDiagnostics> rows;
  DominanceEvidence evidence;
  double max_norm{};
  double min_margin{};
  std::optional<double> varah_bound;  ///< present iff min_i J_i > 0
  std::optional<SpectrumSummary> spectrum;
  StabilityVerdict verdict{StabilityVerdict::Inconclusive};
  double theta{};
  double eta{};
  double tau_max{};
};

/// Production diagnostics are O(nnz); the dense spectrum is only computed
/// when n <= dense_limit (pass 0 to skip it).
inline StabilityReport analyze(const StorageConfig& config, const GridModel& grid,
                               const RegimeSystem& sys, double theta,
                               int dense_limit = kDefaultDenseLimit) {
  StabilityReport r;
  r.regime = sys.regime;
  r.n = static_cast<int>(sys.a.rows());
  r.nonzeros = sys.a.nonZeros();
  r.rows = row_diagnostics(sys.a, grid);
  r.evidence = verify_nonsingular_stable(sys.a);
  r.max_norm = max_norm(sys.a);
  r.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& row : r.rows) r.min_margin = std::min(r.min_margin, row.margin);
  if (r.min_margin > 0.0) r.varah_bound = 1.0 / r.min_margin;
  if (r.n <= dense_limit) r.spectrum = eigen_oracle(sys.a, dense_limit);

  if (r.evidence.stable) {
    r.verdict = StabilityVerdict::ProvenByDominance;
  } else if (r.spectrum) {
    r.verdict = r.spectrum->max_real < -1e-12 * r.max_norm ? StabilityVerdict::ConfirmedByEigenvalues
                                                           : StabilityVerdict::RefutedByEigenvalues;
  }
  r.theta = theta;
  r.eta = stability_eta(config, grid);
  r.tau_max = stability_threshold(config, grid, theta);
  return r;
}

inline std::string join_indices(const std::vector<int>& v, std::size_t limit = 16) {
  std::string s;
  for (std::size_t k = 0; k < v.size() && k < limit; ++k) {
    if (k) s += ',';
    s += std::to_string(v[k]);
  }
  if (v.size() > limit) s += ",...";
  return s;
}

/// key=value text with one [section] per report.
inline void write_report(std::ostream& os, const StabilityReport& r) {
  os << "[system_" << to_string(r.regime) << "]\n";
  os << "n=" << r.n << "\n";
  os << "nonzeros=" << r.nonzeros << "\n";
  os << "negative_diagonal=" << format_bool(r.evidence.negative_diagonal) << "\n";
  os << "weakly_dominant=" << format_bool(r.evidence.weakly_dominant) << "\n";
  os << "strongly_connected=" << format_bool(r.evidence.strongly_connected) << "\n";
  os << "strictly_dominant_row_count=" << r.evidence.strictly_dominant_rows.size() << "\n";
  os << "strictly_dominant_rows=" << join_indices(r.evidence.strictly_dominant_rows) << "\n";
  os << "gershgorin_in_left_half=" << format_bool(r.evidence.gershgorin_in_left_half) << "\n";
  os << "nonsingular_by_dominance=" << format_bool(r.evidence.nonsingular) << "\n";
  os << "stable_by_dominance=" << format_bool(r.evidence.stable) << "\n";
  if (!r.evidence.failing_link.empty()) os << "failing_link=" << r.evidence.failing_link << "\n";
  os << "max_norm=" << format_shortest(r.max_norm) << "\n";
  os << "min_margin=" << format_shortest(r.min_margin) << "\n";
  os << "varah_bound=" << (r.varah_bound ? format_shortest(*r.varah_bound) : "not_applicable") << "\n";
  if (r.spectrum) {
    os << "eigen_max_real=" << format_shortest(r.spectrum->max_real) << "\n";
    os << "eigen_count=" << r.spectrum->count << "\n";
    os << "eigen_negative_real=" << r.spectrum->count_negative_real << "\n";
  } else {
    os << "eigen_max_real=skipped\n";
  }
  os << "verdict=" << to_string(r.verdict) << "\n";
}

inline void write_report(std::ostream& os, const ThetaNormReport& t) {
  os << "[theta_checks]\n";
  os << "theta=" << format_shortest(t.theta) << "\n";
  os << "tau=" << format_shortest(t.tau) << "\n";
  os << "tau_max=" << format_shortest(t.tau_max) << "\n";
  os << "tau_guaranteed=" << format_bool(t.tau_guaranteed) << "\n";
  for (const ThetaRegimeCheck* c : {&t.on, &t.off}) {
    const std::string p = std::string(to_string(c->regime)) + ".";
    os << p << "a_norm=" << format_shortest(c->a_norm) << "\n";
    os << p << "a_norm_bound=" << format_shortest(c->a_norm_bound) << "\n";
    os << p << "a_norm_within_bound=" << format_bool(c->a_norm_within_bound) << "\n";
    os << p << "a_norm_bound_attained=" << format_bool(c->a_norm_bound_attained) << "\n";
    os << p << "g_min_margin=" << format_shortest(c->g_min_margin) << "\n";
    os << p << "g_strictly_dominant=" << format_bool(c->g_strictly_dominant) << "\n";
    os << p << "g_inverse_bound=" << format_shortest(c->g_inverse_bound) << "\n";
    os << p << "h_norm=" << format_shortest(c->h_norm) << "\n";
    os << p << "h_step_limit=" << format_shortest(c->h_step_limit) << "\n";
    os << p << "h_norm_at_most_one=" << format_bool(c->h_norm_at_most_one) << "\n";
  }
}

}  // namespace geostorage

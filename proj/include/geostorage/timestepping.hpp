#pragma once

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "geostorage/analysis.hpp"
#include "geostorage/assembly.hpp"
#include "geostorage/coefficients.hpp"
#include "geostorage/errors.hpp"
#include "geostorage/format.hpp"

namespace geostorage {

/// Inlet temperature as a function of time.
using InletProfile = std::function<double(double)>;

inline InletProfile constant_inlet(double value) {
  return [value](double) { return value; };
}

/// Pump state on [start, end).
struct ScheduleInterval {
  double start{};
  double end{};
  PumpRegime regime{PumpRegime::Off};
  InletProfile inlet{constant_inlet(0.0)};
};

/// Piecewise-constant pump regime over [0, T] on a uniform time grid.
///
/// The time step is shrunk, if needed, so that T is an integer multiple of it,
/// and interval boundaries are snapped to the nearest grid time. Both
/// adjustments are recorded in warnings(). The regime at a grid time t_k is
/// that of the interval containing t_k; t_N = T belongs to the last interval.
class PumpSchedule {
 public:
  PumpSchedule(std::vector<ScheduleInterval> intervals, double horizon, double tau);

  static PumpSchedule constant(PumpRegime regime, double inlet, double horizon, double tau) {
    return PumpSchedule({{0.0, horizon, regime, constant_inlet(inlet)}}, horizon, tau);
  }

  double tau() const { return tau_; }
  double horizon() const { return horizon_; }
  int steps() const { return steps_; }
  double time(int k) const { return k == steps_ ? horizon_ : k * tau_; }

  PumpRegime regime_at_step(int k) const { return intervals_[interval_index(k)].regime; }
  double inlet_at_step(int k) const { return intervals_[interval_index(k)].inlet(time(k)); }

  const std::vector<ScheduleInterval>& intervals() const { return intervals_; }
  /// First step of each interval, plus steps() at the end.
  const std::vector<int>& boundaries() const { return boundaries_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::size_t interval_index(int k) const;

  std::vector<ScheduleInterval> intervals_;
  std::vector<int> boundaries_;
  std::vector<std::string> warnings_;
  double horizon_{};
  double tau_{};
  int steps_{};
};

inline PumpSchedule::PumpSchedule(std::vector<ScheduleInterval> intervals, double horizon,
                                  double tau)
    : horizon_(horizon) {
  if (!(horizon > 0.0)) throw ConfigError("schedule: horizon must be positive");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("schedule: tau must be positive");
  if (intervals.empty()) throw ConfigError("schedule: no intervals");
  std::sort(intervals.begin(), intervals.end(),
            [](const auto& a, const auto& b) { return a.start < b.start; });

  const double eps = 1e-9 * horizon;
  if (std::abs(intervals.front().start) > eps) {
    throw ConfigError("schedule: gap [0, " + format_shortest(intervals.front().start) +
                      ") uncovered");
  }
  for (std::size_t k = 0; k < intervals.size(); ++k) {
    const auto& iv = intervals[k];
    if (!(iv.end > iv.start)) {
      throw ConfigError("schedule: interval [" + format_shortest(iv.start) + ", " +
                        format_shortest(iv.end) + ") is empty");
    }
    if (!iv.inlet) throw ConfigError("schedule: interval without inlet profile");
    if (k + 1 < intervals.size()) {
      const double next = intervals[k + 1].start;
      if (next > iv.end + eps) {
        throw ConfigError("schedule: gap [" + format_shortest(iv.end) + ", " +
                          format_shortest(next) + ") uncovered");
      }
      if (next < iv.end - eps) {
        throw ConfigError("schedule: intervals overlap on [" + format_shortest(next) + ", " +
                          format_shortest(iv.end) + ")");
      }
    }
  }
  if (std::abs(intervals.back().end - horizon) > eps) {
    if (intervals.back().end < horizon) {
      throw ConfigError("schedule: gap [" + format_shortest(intervals.back().end) + ", " +
                        format_shortest(horizon) + ") uncovered");
    }
    throw ConfigError("schedule: extends beyond the horizon " + format_shortest(horizon));
  }

  steps_ = static_cast<int>(std::ceil(horizon / tau - 1e-9));
  steps_ = std::max(steps_, 1);
  tau_ = horizon / steps_;
  if (std::abs(tau_ - tau) > 1e-12 * tau) {
    warnings_.push_back("tau reduced from " + format_shortest(tau) + " to " +
                        format_shortest(tau_) + " so that the horizon is a whole number of steps");
  }

  boundaries_.push_back(0);
  for (std::size_t k = 0; k < intervals.size(); ++k) {
    const double end = intervals[k].end;
    const int snapped = static_cast<int>(std::llround(end / tau_));
    if (std::abs(snapped * tau_ - end) > 1e-9 * tau_) {
      warnings_.push_back("schedule boundary " + format_shortest(end) + " snapped to " +
                          format_shortest(snapped * tau_));
    }
    const int bounded = k + 1 == intervals.size() ? steps_ : std::min(snapped, steps_);
    if (bounded <= boundaries_.back()) {
      warnings_.push_back("interval [" + format_shortest(intervals[k].start) + ", " +
                          format_shortest(end) + ") is shorter than one step and was dropped");
      continue;
    }
    intervals_.push_back(std::move(intervals[k]));
    boundaries_.push_back(bounded);
  }
  if (intervals_.empty()) throw ConfigError("schedule: every interval is shorter than one step");
}

inline std::size_t PumpSchedule::interval_index(int k) const {
  if (k < 0 || k > steps_) throw std::out_of_range("schedule: step index out of range");
  if (k == steps_) return intervals_.size() - 1;
  const auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), k);
  return static_cast<std::size_t>(it - boundaries_.begin()) - 1;
}

/// The theta recursion G^{k+1} Y^{k+1} = H^k Y^k + tau F^k with
/// G = I - tau theta A, H = I + tau (1 - theta) A and
/// F^k = theta B^{k+1} g^{k+1} + (1 - theta) B^k g^k.
///
/// A, B and G depend only on the pump regime, so G is factorized once per
/// regime. The explicit half uses the regime at t_k and the implicit half the
/// regime at t_{k+1}. Immutable after construction.
class ThetaStepper {
 public:
  ThetaStepper(const StorageConfig& config, const GridModel& grid, SystemMatrices mats,
               PumpSchedule schedule, double theta);

  double theta() const { return theta_; }
  double tau() const { return schedule_.tau(); }
  int steps() const { return schedule_.steps(); }
  int n() const { return mats_.n(); }
  double time(int k) const { return schedule_.time(k); }
  double tau_max() const { return tau_max_; }
  /// theta = 1 or tau <= tau_max.
  bool guaranteed() const { return theta_ == 1.0 || tau() <= tau_max_; }
  /// max(||B_on||_inf, ||B_off||_inf).
  double input_bound_constant() const { return input_bound_; }

  const SystemMatrices& matrices() const { return mats_; }
  const PumpSchedule& schedule() const { return schedule_; }
  const StorageConfig& config() const { return config_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  PumpRegime regime(int k) const { return schedule_.regime_at_step(k); }
  /// g^k.
  InputSignal input(int k) const {
    return input_at(config_, regime(k), time(k), schedule_.inlet_at_step(k));
  }

  /// Y^{k+1} from Y^k.
  Vector step(const Vector& y, int k) const;

 private:
  using ColumnMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  using Factorization = Eigen::SparseLU<ColumnMatrix, Eigen::COLAMDOrdering<int>>;

  struct RegimeOperators {
    SparseMatrix g;
    SparseMatrix h;
    double g_norm{};
    std::shared_ptr<const Factorization> lu;  // null when G = I
  };

  const RegimeOperators& ops(PumpRegime r) const { return r == PumpRegime::On ? on_ : off_; }
  RegimeOperators build(const RegimeSystem& sys) const;

  StorageConfig config_;
  SystemMatrices mats_;
  PumpSchedule schedule_;
  double theta_;
  double tau_max_;
  double input_bound_;
  std::vector<std::string> warnings_;
  RegimeOperators on_;
  RegimeOperators off_;
};

inline ThetaStepper::ThetaStepper(const StorageConfig& config, const GridModel& grid,
                                  SystemMatrices mats, PumpSchedule schedule, double theta)
    : config_(config), mats_(std::move(mats)), schedule_(std::move(schedule)), theta_(theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in [0, 1]");
  if (mats_.n() != grid.n()) throw AssemblyError("stepper: matrices do not match the grid");
  if (std::abs(schedule_.horizon() - config_.horizon) > 1e-9 * config_.horizon) {
    throw ConfigError("stepper: schedule horizon differs from the configured horizon");
  }
  tau_max_ = stability_threshold(config_, grid, theta_);
  input_bound_ = std::max(max_norm(Eigen::MatrixXd(mats_.on.b)), max_norm(Eigen::MatrixXd(mats_.off.b)));
  warnings_ = schedule_.warnings();
  if (!guaranteed()) {
    warnings_.push_back("tau=" + format_shortest(tau()) + " exceeds tau_max=" +
                        format_shortest(tau_max_) + " for theta=" + format_shortest(theta_) +
                        "; max-norm stability is not guaranteed");
  }
  on_ = build(mats_.on);
  off_ = build(mats_.off);
}

inline ThetaStepper::RegimeOperators ThetaStepper::build(const RegimeSystem& sys) const {
  RegimeOperators r;
  const double t = tau();
  r.g = identity_plus(sys.a, -t * theta_);
  r.h = identity_plus(sys.a, t * (1.0 - theta_));
  r.g_norm = max_norm(r.g);

  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& row : row_diagnostics(r.g)) min_margin = std::min(min_margin, row.margin);
  if (!(min_margin >= 1.0 - unit_slack(t * theta_ * max_norm(sys.a)))) {
    throw AssemblyError("G for regime " + std::string(to_string(sys.regime)) +
                        " is not strictly diagonally dominant (min margin " +
                        format_shortest(min_margin) + ")");
  }
  if (theta_ > 0.0) {
    auto lu = std::make_shared<Factorization>();
    ColumnMatrix g = r.g;
    lu->compute(g);
    if (lu->info() != Eigen::Success) {
      throw AssemblyError("factorization of G failed: " + lu->lastErrorMessage());
    }
    r.lu = std::move(lu);
  }
  return r;
}

inline Vector ThetaStepper::step(const Vector& y, int k) const {
  if (y.size() != n()) throw std::invalid_argument("step: state has wrong size");
  if (k < 0 || k >= steps()) throw std::out_of_range("step: k outside 0..N_tau-1");
  const PumpRegime now = regime(k);
  const PumpRegime next = regime(k + 1);
  const InputSignal g_now = input(k);
  const InputSignal g_next = input(k + 1);
  const double t = tau();

  Vector rhs = ops(now).h * y;
  rhs.noalias() += (t * theta_) * (mats_[next].b * g_next.vector());
  rhs.noalias() += (t * (1.0 - theta_)) * (mats_[now].b * g_now.vector());

  const RegimeOperators& implicit = ops(next);
  Vector out = implicit.lu ? Vector(implicit.lu->solve(rhs)) : rhs;
  if (!out.allFinite()) throw SimulationError("non-finite state", k + 1);

  if (implicit.lu) {
    const double residual = max_norm(Vector(implicit.g * out - rhs));
    const double allowed =
        std::max(1e-10 * (1.0 + max_norm(y)),
                 64.0 * std::numeric_limits<double>::epsilon() *
                     (implicit.g_norm * max_norm(out) + max_norm(rhs)));
    if (residual > allowed) {
      throw SimulationError("linear solve residual " + format_shortest(residual) +
                                " exceeds " + format_shortest(allowed),
                            k + 1);
    }
  }
  return out;
}

/// Which states a simulation keeps: every stride-th step plus the first and
/// the last. stride = 0 keeps only the first and the last.
struct SnapshotPolicy {
  int stride{1};
  bool store_states{true};

  bool wants(int k, int last) const {
    return k == 0 || k == last || (stride > 0 && k % stride == 0);
  }
};

struct Snapshot {
  int step{};
  double time{};
  PumpRegime regime{PumpRegime::Off};
  InputSignal input{};
  Vector state;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::vector<double> times;          ///< t_k, k = 0..N
  std::vector<double> max_norms;      ///< ||Y^k||_inf
  std::vector<PumpRegime> regimes;    ///< regime at t_k
  std::vector<double> norm_bounds;    ///< ||Y^0|| + C_B T max_{j<=k} ||g^j||
  double input_bound{};               ///< C_B
  bool guaranteed{};                  ///< tau inside the guaranteed region
  std::vector<int> bound_violations;  ///< steps where ||Y^k|| exceeds its bound
};

/// Runs k = 0..N-1 and checks the max-norm stability inequality with
/// C_0 = 1 and C_g = C_B T after every step.
inline Trajectory simulate(const ThetaStepper& stepper, const Vector& y0,
                           SnapshotPolicy policy = {},
                           const std::function<void(const Snapshot&)>& on_snapshot = {}) {
  if (y0.size() != stepper.n()) throw std::invalid_argument("simulate: initial state has wrong size");
  if (!y0.allFinite()) throw SimulationError("non-finite initial state", 0);
  const int last = stepper.steps();
  Trajectory tr;
  tr.input_bound = stepper.input_bound_constant();
  tr.guaranteed = stepper.guaranteed();
  const double gain = tr.input_bound * stepper.schedule().horizon();
  const double y0_norm = max_norm(y0);

  double max_input = 0.0;
  Vector y = y0;
  for (int k = 0; k <= last; ++k) {
    if (k > 0) y = stepper.step(y, k - 1);
    const InputSignal g = stepper.input(k);
    max_input = std::max(max_input, g.max_norm());
    const double norm = max_norm(y);
    const double bound = y0_norm + gain * max_input;
    tr.times.push_back(stepper.time(k));
    tr.max_norms.push_back(norm);
    tr.regimes.push_back(stepper.regime(k));
    tr.norm_bounds.push_back(bound);
    if (norm > bound * (1.0 + 1e-12) + std::numeric_limits<double>::min()) {
      tr.bound_violations.push_back(k);
    }
    if (policy.wants(k, last)) {
      Snapshot s{k, stepper.time(k), stepper.regime(k), g, {}};
      if (policy.store_states || on_snapshot) s.state = y;
      if (on_snapshot) on_snapshot(s);
      if (policy.store_states) tr.snapshots.push_back(std::move(s));
    }
  }
  return tr;
}

}  // namespace geostorage

#pragma once

#include <cstddef>
#include <vector>

#include "dptune/backstepping.hpp"
#include "dptune/types.hpp"

namespace dptune {

/// Per-axis (x, y, psi) damping ratios and natural frequencies of the reference filter.
struct FilterParams {
  static constexpr std::size_t kSize = 6;
  Vec3 zeta = Vec3::Constant(0.05);
  Vec3 omega = Vec3::Constant(1.0);

  /// Parameter i in the order (zeta_x, zeta_y, zeta_psi, omega_x, omega_y, omega_psi).
  static Interval bounds(std::size_t i);
  bool in_bounds() const;
};

struct FilterState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();

  static FilterState at_rest(const Vec3& p) { return {p, Vec3::Zero(), Vec3::Zero()}; }
  ReferenceSignal signal() const { return {position, velocity, acceleration}; }
};

/// Advances p_d''' + G W p_d'' + G W^2 p_d' + W^3 p_d = W^3 p_r, G = 2 Z + I,
/// by dt using `substeps` explicit Euler steps. Axes are independent.
FilterState filter_step(const FilterState& state, const Vec3& target, double dt,
                        const FilterParams& params, int substeps = 1);

struct Waypoint {
  double time = 0.0;
  Vec3 target = Vec3::Zero();
};

/// Raw references activated at increasing times, starting at 0.
struct WaypointPlan {
  std::vector<Waypoint> schedule;
};

struct SegmentCaps {
  double interval = 20.0;               // [s] between activations
  double position = 4.0;                // [m] max step in the (x, y) plane
  double heading = deg_to_rad(30.0);    // [rad] max step in heading
};

/// Splits start -> goal into waypoints no further apart than the caps, one per
/// interval. Position is interpolated on the straight line, heading along the
/// shorter arc. The last waypoint is `goal` itself.
WaypointPlan segment_targets(const Vec3& start, const Vec3& goal, const SegmentCaps& caps);

/// Piecewise-constant hold: the target of the latest activation time <= t.
Vec3 reference_at(const WaypointPlan& plan, double t);

struct PhaseSwitching {
  double position_tolerance = 0.1;             // [m]
  double heading_tolerance = deg_to_rad(1.0);  // [rad]
  double timeout = 120.0;                      // [s]
};

/// Drives a sequence of goals. Each goal is segmented from the previous one;
/// the next phase starts once the filtered reference has settled on the
/// current goal (position and rate within tolerance) or the phase times out.
class PhasedReference {
 public:
  PhasedReference(const Vec3& start, std::vector<Vec3> goals, SegmentCaps caps,
                  PhaseSwitching switching);

  /// Raw reference p_r at time t. Call with non-decreasing t, once per step.
  Vec3 update(double t, const FilterState& filter);

  std::size_t phase() const { return phase_; }
  std::size_t phase_count() const { return goals_.size(); }
  const Vec3& goal() const { return goals_[phase_]; }
  const WaypointPlan& plan() const { return plan_; }

 private:
  bool settled(const FilterState& filter) const;
  void start_phase(std::size_t phase, const Vec3& from, double t);

  std::vector<Vec3> goals_;
  SegmentCaps caps_;
  PhaseSwitching switching_;
  std::size_t phase_ = 0;
  double phase_start_ = 0.0;
  WaypointPlan plan_;
};

}  // namespace dptune

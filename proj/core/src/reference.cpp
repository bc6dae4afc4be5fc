#include "dptune/reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace dptune {

Interval FilterParams::bounds(std::size_t i) {
  return i < 3 ? Interval{0.01, 0.1} : Interval{0.8, 2.0};
}

bool FilterParams::in_bounds() const {
  for (std::size_t i = 0; i < 3; ++i) {
    if (!bounds(i).contains(zeta(i)) || !bounds(i + 3).contains(omega(i))) return false;
  }
  return true;
}

FilterState filter_step(const FilterState& state, const Vec3& target, double dt,
                        const FilterParams& params, int substeps) {
  const int n = std::max(substeps, 1);
  const double h = dt / n;
  FilterState s = state;
  for (int axis = 0; axis < 3; ++axis) {
    const double w = params.omega(axis);
    const double g = 2.0 * params.zeta(axis) + 1.0;
    const double w2 = w * w;
    const double w3 = w2 * w;
    double p = s.position(axis);
    double dp = s.velocity(axis);
    double ddp = s.acceleration(axis);
    for (int k = 0; k < n; ++k) {
      const double jerk = w3 * (target(axis) - p) - g * w * ddp - g * w2 * dp;
      p += h * dp;
      dp += h * ddp;
      ddp += h * jerk;
    }
    s.position(axis) = p;
    s.velocity(axis) = dp;
    s.acceleration(axis) = ddp;
  }
  return s;
}

WaypointPlan segment_targets(const Vec3& start, const Vec3& goal, const SegmentCaps& caps) {
  if (!(caps.interval > 0.0) || !(caps.position > 0.0) || !(caps.heading > 0.0)) {
    throw std::invalid_argument("segmentation interval and caps must be positive");
  }
  const double dx = goal.x() - start.x();
  const double dy = goal.y() - start.y();
  const double dpsi = wrap_to_pi(goal.z() - start.z());
  const double distance = std::hypot(dx, dy);

  // Fraction of the path covered per waypoint, set by whichever cap binds.
  double fraction = 1.0;
  if (distance > 0.0) fraction = std::min(fraction, caps.position / distance);
  if (dpsi != 0.0) fraction = std::min(fraction, caps.heading / std::abs(dpsi));

  // Ratios that land on an integer up to rounding should not spawn an extra waypoint.
  const double segments = std::ceil(1.0 / fraction - 1e-9);
  const auto count = static_cast<std::size_t>(std::max(segments, 1.0));

  WaypointPlan plan;
  plan.schedule.reserve(count);
  for (std::size_t i = 1; i < count; ++i) {
    const double s = fraction * static_cast<double>(i);
    plan.schedule.push_back({caps.interval * static_cast<double>(i - 1),
                             Vec3{start.x() + s * dx, start.y() + s * dy, start.z() + s * dpsi}});
  }
  plan.schedule.push_back({caps.interval * static_cast<double>(count - 1), goal});
  return plan;
}

Vec3 reference_at(const WaypointPlan& plan, double t) {
  if (plan.schedule.empty()) throw std::invalid_argument("empty waypoint plan");
  auto it = std::upper_bound(plan.schedule.begin(), plan.schedule.end(), t,
                             [](double value, const Waypoint& w) { return value < w.time; });
  if (it == plan.schedule.begin()) return plan.schedule.front().target;
  return std::prev(it)->target;
}

PhasedReference::PhasedReference(const Vec3& start, std::vector<Vec3> goals, SegmentCaps caps,
                                 PhaseSwitching switching)
    : goals_(std::move(goals)), caps_(caps), switching_(switching) {
  if (goals_.empty()) throw std::invalid_argument("at least one goal is required");
  start_phase(0, start, 0.0);
}

void PhasedReference::start_phase(std::size_t phase, const Vec3& from, double t) {
  phase_ = phase;
  phase_start_ = t;
  plan_ = segment_targets(from, goals_[phase], caps_);
}

bool PhasedReference::settled(const FilterState& filter) const {
  const Vec3& g = goals_[phase_];
  const double pos_err = std::hypot(filter.position.x() - g.x(), filter.position.y() - g.y());
  const double head_err = std::abs(wrap_to_pi(filter.position.z() - g.z()));
  const double speed = std::hypot(filter.velocity.x(), filter.velocity.y());
  return pos_err <= switching_.position_tolerance && head_err <= switching_.heading_tolerance &&
         speed <= switching_.position_tolerance && std::abs(filter.velocity.z()) <= switching_.heading_tolerance;
}

Vec3 PhasedReference::update(double t, const FilterState& filter) {
  if (phase_ + 1 < goals_.size()) {
    const double elapsed = t - phase_start_;
    const bool all_active = elapsed >= plan_.schedule.back().time;
    if ((all_active && settled(filter)) || elapsed >= switching_.timeout) {
      start_phase(phase_ + 1, goals_[phase_], t);
    }
  }
  return reference_at(plan_, t - phase_start_);
}

}  // namespace dptune

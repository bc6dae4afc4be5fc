#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dptune {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle to (-pi, pi].
inline double wrap_to_pi(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

/// Wraps an angle to [0, 2pi).
inline double wrap_to_two_pi(double angle) {
  double a = std::fmod(angle, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  if (a >= 2.0 * kPi) a = 0.0;
  return a;
}

/// Closed interval [lower, upper].
struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  double width() const { return upper - lower; }
  bool contains(double s) const { return s >= lower && s <= upper; }
  double clamp(double s) const { return std::min(std::max(s, lower), upper); }
  bool empty() const { return !(lower <= upper); }
};

/// Earth-frame position and heading. Heading is kept unwrapped.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;

  Vec3 vector() const { return {x, y, psi}; }
  static Pose from(const Vec3& p) { return {p.x(), p.y(), p.z()}; }
};

/// Body-frame surge, sway and yaw rate.
struct Velocity {
  double surge = 0.0;
  double sway = 0.0;
  double yaw_rate = 0.0;

  Vec3 vector() const { return {surge, sway, yaw_rate}; }
  static Velocity from(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
};

/// Port/starboard rudder angles [rad] and bow thruster speed [1/s].
struct ActuatorState {
  double port = 0.0;
  double starboard = 0.0;
  double bow = 0.0;

  Vec3 vector() const { return {port, starboard, bow}; }
  static ActuatorState from(const Vec3& u) { return {u.x(), u.y(), u.z()}; }
};

struct ShipState {
  Pose pose;
  Velocity velocity;
  ActuatorState actuators;
};

/// Steady wind: true speed [m/s] and the earth-frame direction it blows from [rad].
struct WindCondition {
  double speed = 0.0;
  double direction = 0.0;
};

}  // namespace dptune

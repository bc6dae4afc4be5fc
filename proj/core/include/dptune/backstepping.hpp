#pragma once

#include <array>
#include <cstddef>

#include "dptune/ship_dynamics.hpp"
#include "dptune/types.hpp"

namespace dptune {

/// Entries of the lower-triangular factors A1, A2, row-major:
/// (a11, a12, a13, a14, a15, a16) fill A1 as [[a11,0,0],[a12,a13,0],[a14,a15,a16]],
/// and a21..a26 fill A2 the same way.
struct GainParams {
  static constexpr std::size_t kSize = 12;
  std::array<double, kSize> a{};

  /// Search box of entry i: diagonal entries [0.001, 10], off-diagonal [-10, 10].
  static Interval bounds(std::size_t i);
  static bool is_diagonal(std::size_t i);
  bool in_bounds() const;
};

struct GainMatrices {
  Mat3 c1 = Mat3::Identity();
  Mat3 c2 = Mat3::Identity();
};

/// C1 = A1 A1^T, C2 = A2 A2^T. Throws ParameterBoundsError outside the box.
GainMatrices build_gains(const GainParams& x);

/// Desired pose and its first two time derivatives.
struct ReferenceSignal {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
};

struct TrackingErrors {
  Vec3 e1 = Vec3::Zero();
  Vec3 e2 = Vec3::Zero();
  Vec3 alpha1 = Vec3::Zero();
};

/// e1 = p - p_d (heading wrapped), alpha1 = -C1 e1 + p_d', e2 = J(psi) v - alpha1.
TrackingErrors tracking_errors(const Pose& pose, const Velocity& velocity,
                               const ReferenceSignal& ref, const GainMatrices& gains);

struct ControlOptions {
  bool wind_feedforward = true;
  double max_condition = 1e12;
};

/// Deviation command u~_c that makes the model-exact closed loop follow
/// e1' = -C1 e1 + e2 and e2' = -C2 e2 - e1. Solves
///   J B u~ = -C2 e2 - e1 + C1^2 e1 - C1 e2 - (dJ/dpsi v3) v + J A v - J M^-1 tau_wind + p_d''.
/// Throws ControlSingularityError when cond(B) exceeds options.max_condition.
Vec3 control_law(const ShipState& state, const ReferenceSignal& ref, const GainMatrices& gains,
                 const Vec3& tau_wind, const ShipModel& model, const ControlOptions& options = {});

/// Right-hand side of the linear system solved by control_law.
Vec3 control_target(const ShipState& state, const ReferenceSignal& ref, const GainMatrices& gains,
                    const Vec3& tau_wind, const ShipModel& model, const ControlOptions& options = {});

/// Inverse of actuator_deviation. No clipping: the raw command feeds the penalties.
ActuatorState command_to_actuator(const Vec3& u_tilde_c, const ShipParams& params);

}  // namespace dptune

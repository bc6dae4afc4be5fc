#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "dptune/errors.hpp"
#include "dptune/ship_dynamics.hpp"

using namespace dptune;

namespace {

ShipParams unit_ship() {
  ShipParams p = ShipParams::defaults();
  p.mass = Mat3::Identity();
  p.damping = Mat3::Identity();
  p.force_map = Mat3::Identity();
  return p;
}

}  // namespace

TEST(Rotation, IdentityAtZero) {
  EXPECT_EQ(rotation_matrix(0.0), Mat3::Identity());
}

TEST(Rotation, QuarterTurnMapsSurgeToNorth) {
  const Vec3 r = rotation_matrix(kPi / 2.0) * Vec3(1.0, 0.0, 0.0);
  EXPECT_NEAR(r.x(), 0.0, 1e-15);
  EXPECT_NEAR(r.y(), 1.0, 1e-15);
  EXPECT_EQ(r.z(), 0.0);
}

TEST(Rotation, OrthogonalForRandomHeadings) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> psi(-20.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 j = rotation_matrix(psi(rng));
    EXPECT_LT((j * j.transpose() - Mat3::Identity()).cwiseAbs().rowwise().sum().maxCoeff(), 1e-12);
  }
}

TEST(RotationDerivative, KnownValues) {
  Mat3 at_zero;
  at_zero << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  EXPECT_EQ(rotation_derivative(0.0), at_zero);
  Mat3 at_pi;
  at_pi << 0, 1, 0, -1, 0, 0, 0, 0, 0;
  EXPECT_LT((rotation_derivative(kPi) - at_pi).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RotationDerivative, MatchesCentralDifference) {
  const double h = 1e-6;
  for (double psi = -7.0; psi <= 7.0; psi += 0.37) {
    const Mat3 fd = (rotation_matrix(psi + h) - rotation_matrix(psi - h)) / (2.0 * h);
    EXPECT_LT((rotation_derivative(psi) - fd).cwiseAbs().maxCoeff(), 1e-8) << psi;
  }
}

TEST(RelativeWind, ShipAtRest) {
  const RelativeWind r = relative_wind({0, 0, 0.3}, {}, {1.0, 0.7});
  EXPECT_DOUBLE_EQ(r.speed, 1.0);
}

TEST(RelativeWind, PureSelfWindIsHeadOn) {
  const RelativeWind r = relative_wind({0, 0, 1.1}, {1.0, 0.0, 0.0}, {0.0, 0.0});
  EXPECT_DOUBLE_EQ(r.speed, 1.0);
  EXPECT_NEAR(std::min(r.angle, 2.0 * kPi - r.angle), 0.0, 1e-12);
}

TEST(RelativeWind, MatchesComplexArithmetic) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> a(-kPi, kPi), s(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const Pose pose{s(rng), s(rng), a(rng)};
    const Velocity vel{s(rng), s(rng), s(rng)};
    const WindCondition wind{std::abs(s(rng)), a(rng)};
    // Earth-frame air and ship velocities as complex numbers; body frame by rotating by -psi.
    const std::complex<double> air = std::polar(wind.speed, wind.direction + kPi);
    const std::complex<double> ship =
        std::complex<double>(vel.surge, vel.sway) * std::polar(1.0, pose.psi);
    const std::complex<double> body = (air - ship) * std::polar(1.0, -pose.psi);
    double from = std::arg(-body);
    if (from < 0.0) from += 2.0 * kPi;

    const RelativeWind r = relative_wind(pose, vel, wind);
    EXPECT_NEAR(r.speed, std::abs(body), 1e-12);
    const double diff = std::remainder(r.angle - from, 2.0 * kPi);
    EXPECT_NEAR(diff, 0.0, 1e-10);
    EXPECT_GE(r.angle, 0.0);
    EXPECT_LT(r.angle, 2.0 * kPi);
  }
}

TEST(WindCoefficients, ZeroEncounter) {
  const ShipParams p = ShipParams::defaults();
  const auto& w = p.wind;
  const WindCoefficients c = wind_coefficients(2.0 * kPi, p);
  EXPECT_NEAR(c.cx, w.xx0 + w.xx1 + w.xx3 + w.xx5, 1e-15);
  EXPECT_NEAR(c.cy, 0.0, 1e-15);
  EXPECT_NEAR(c.cpsi, 0.0, 1e-15);
}

TEST(WindCoefficients, Astern) {
  const ShipParams p = ShipParams::defaults();
  const auto& w = p.wind;
  const WindCoefficients c = wind_coefficients(kPi, p);
  EXPECT_NEAR(c.cx, w.xx0 - w.xx1 - w.xx3 - w.xx5, 1e-15);
  EXPECT_NEAR(c.cy, 0.0, 1e-15);
  EXPECT_NEAR(c.cpsi, 0.0, 1e-15);
}

TEST(WindCoefficients, ZeroRegressors) {
  ShipParams p = ShipParams::defaults();
  p.wind = {};
  const WindCoefficients c = wind_coefficients(1.234, p);
  EXPECT_EQ(c.cx, 0.0);
  EXPECT_EQ(c.cy, 0.0);
  EXPECT_EQ(c.cpsi, 0.0);
}

TEST(WindForce, NoWindNoForce) {
  EXPECT_EQ(wind_force(0.0, 0.8, ShipParams::defaults()), Vec3::Zero());
}

TEST(WindForce, QuadraticInSpeed) {
  const ShipParams p = ShipParams::defaults();
  const Vec3 f1 = wind_force(0.9, 2.1, p);
  const Vec3 f2 = wind_force(1.8, 2.1, p);
  EXPECT_LT((f2 - 4.0 * f1).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(WindForce, HandEvaluation) {
  ShipParams p = ShipParams::defaults();
  p.wind = {0.1, -0.6, 0.05, -0.02, 0.7, -0.04, 0.01, 0.06, -0.03, 0.02};
  p.air_density = 1.2;
  p.area_transverse = 0.1;
  p.area_lateral = 0.3;
  p.length_pp = 2.0;
  // gamma_A = 60 deg -> argument 300 deg: cos = 1/2, sin = -sqrt(3)/2;
  // 3x = 900 deg = 180: cos -1, sin 0; 5x = 1500 = 60: cos 1/2, sin sqrt(3)/2;
  // 2x = 600 = 240: sin -sqrt(3)/2.
  const double r3 = std::sqrt(3.0) / 2.0;
  const double cx = 0.1 - 0.6 * 0.5 + 0.05 * -1.0 - 0.02 * 0.5;
  const double cy = 0.7 * -r3 - 0.04 * 0.0 + 0.01 * r3;
  const double cn = 0.06 * -r3 - 0.03 * -r3 + 0.02 * 0.0;
  const double q = 0.5 * 1.2 * 2.0 * 2.0;
  const Vec3 f = wind_force(2.0, deg_to_rad(60.0), p);
  EXPECT_NEAR(f.x(), q * 0.1 * cx, 1e-12);
  EXPECT_NEAR(f.y(), q * 0.3 * cy, 1e-12);
  EXPECT_NEAR(f.z(), q * 0.3 * 2.0 * cn, 1e-12);
}

TEST(ActuatorDeviation, HoverIsZero) {
  const ShipParams p = ShipParams::defaults();
  EXPECT_EQ(actuator_deviation({p.hover_port, p.hover_starboard, 0.0}, p), Vec3::Zero());
}

TEST(ActuatorDeviation, SignedSquare) {
  const ShipParams p = ShipParams::defaults();
  EXPECT_EQ(actuator_deviation({p.hover_port, p.hover_starboard, 60.0}, p).z(), 3600.0);
  EXPECT_EQ(actuator_deviation({p.hover_port, p.hover_starboard, -60.0}, p).z(), -3600.0);
}

TEST(ActuatorForce, LinearMap) {
  EXPECT_EQ(actuator_force(Vec3::Zero(), ShipParams::defaults()), Vec3::Zero());
  EXPECT_EQ(actuator_force(Vec3(1, 2, 3), unit_ship()), Vec3(1, 2, 3));
  const ShipParams p = ShipParams::defaults();
  const Vec3 u1(0.1, -0.2, 300.0), u2(-0.05, 0.3, -1200.0);
  const Vec3 lhs = actuator_force(2.5 * u1 - 0.5 * u2, p);
  const Vec3 rhs = 2.5 * actuator_force(u1, p) - 0.5 * actuator_force(u2, p);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Acceleration, RestEquilibrium) {
  const ShipModel m(ShipParams::defaults());
  EXPECT_EQ(acceleration({}, Vec3::Zero(), Vec3::Zero(), m), Vec3::Zero());
}

TEST(Acceleration, UnitDecay) {
  const ShipModel m(unit_ship());
  EXPECT_EQ(acceleration({1, 0, 0}, Vec3::Zero(), Vec3::Zero(), m), Vec3(-1, 0, 0));
}

TEST(Acceleration, ResidualOfEquationOfMotion) {
  const ShipParams p = ShipParams::defaults();
  const ShipModel m(p);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> s(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const Velocity v{s(rng), s(rng), s(rng)};
    const Vec3 tau(s(rng), s(rng), s(rng)), tw(s(rng), s(rng), s(rng));
    const Vec3 vd = acceleration(v, tau, tw, m);
    EXPECT_LT((p.mass * vd + p.damping * v.vector() - tau - tw).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ActuatorLimits, HoldWhenCommandEqualsState) {
  const ActuatorLimits lim;
  const ActuatorState u{deg_to_rad(-70), deg_to_rad(90), 12.0};
  const ActuatorState n = apply_actuator_limits(u, u, 0.1, lim);
  EXPECT_EQ(n.port, u.port);
  EXPECT_EQ(n.starboard, u.starboard);
  EXPECT_EQ(n.bow, u.bow);
}

TEST(ActuatorLimits, SlewIsRateLimited) {
  const ActuatorLimits lim;
  const ActuatorState u{deg_to_rad(-80), deg_to_rad(80), 0.0};
  const ActuatorState c{deg_to_rad(-62), deg_to_rad(100), 50.0};
  const ActuatorState n = apply_actuator_limits(u, c, 0.1, lim);
  EXPECT_DOUBLE_EQ(n.port, u.port + 0.0349);
  EXPECT_DOUBLE_EQ(n.starboard, u.starboard + 0.0349);
  EXPECT_DOUBLE_EQ(n.bow, 10.0);
}

TEST(ActuatorLimits, OutOfBoxLandsOnBoundary) {
  const ActuatorLimits lim;
  const ActuatorState u{deg_to_rad(-61), deg_to_rad(104), 59.0};
  const ActuatorState c{0.0, 3.0, 500.0};
  const ActuatorState n = apply_actuator_limits(u, c, 0.1, lim);
  EXPECT_EQ(n.port, lim.port.upper);
  EXPECT_EQ(n.starboard, lim.starboard.upper);
  EXPECT_EQ(n.bow, lim.bow.upper);
}

TEST(ShipModel, RejectsBadParameters) {
  ShipParams p = ShipParams::defaults();
  p.mass(0, 1) = 1.0;
  EXPECT_THROW(ShipModel{p}, ConfigError);
  p = ShipParams::defaults();
  p.mass.setZero();
  EXPECT_THROW(ShipModel{p}, ConfigError);
  p = ShipParams::defaults();
  p.force_map.col(2).setZero();
  EXPECT_THROW(ShipModel{p}, ConfigError);
  p = ShipParams::defaults();
  p.limits.rate(1) = 0.0;
  EXPECT_THROW(ShipModel{p}, ConfigError);
  p = ShipParams::defaults();
  p.limits.bow = {1.0, -1.0};
  EXPECT_THROW(ShipModel{p}, ConfigError);
}

TEST(Step, EquilibriumOnlySlewsActuators) {
  const ShipParams p = ShipParams::defaults();
  const ShipModel m(p);
  ShipState s;
  s.pose = {1.0, -2.0, 0.4};
  s.actuators = {p.hover_port, p.hover_starboard, 0.0};
  const ShipState n = step(s, s.actuators, {0.0, 0.0}, 0.1, m);
  EXPECT_EQ(n.pose.vector(), s.pose.vector());
  EXPECT_EQ(n.velocity.vector(), Vec3::Zero());
}

TEST(Step, PureYawRateIntegratesHeading) {
  ShipParams p = unit_ship();
  p.damping.setZero();
  const ShipModel m(p);
  ShipState s;
  s.velocity = {0.0, 0.0, 0.2};
  s.actuators = {p.hover_port, p.hover_starboard, 0.0};
  for (int k = 0; k < 10; ++k) s = step(s, s.actuators, {0.0, 0.0}, 0.1, m);
  EXPECT_NEAR(s.pose.psi, 0.2, 1e-14);
  EXPECT_EQ(s.pose.x, 0.0);
  EXPECT_EQ(s.pose.y, 0.0);
}

TEST(Step, NonFiniteStateThrows) {
  const ShipModel m(ShipParams::defaults());
  ShipState s;
  s.velocity = {std::nan(""), 0.0, 0.0};
  EXPECT_THROW(step(s, s.actuators, {}, 0.1, m, {1, 7, nullptr}), DivergenceError);
}

TEST(Step, EulerConvergesAtFirstOrder) {
  const ShipParams p = ShipParams::defaults();
  const ShipModel m(p);
  const WindCondition wind{1.0, deg_to_rad(30.0)};
  ShipState s0;
  s0.velocity = {0.3, -0.1, 0.05};
  s0.actuators = {p.hover_port + 0.1, p.hover_starboard - 0.05, 20.0};

  auto run = [&](double dt) {
    ShipState s = s0;
    const auto n = static_cast<int>(std::lround(120.0 / dt));
    for (int k = 0; k < n; ++k) s = step(s, s0.actuators, wind, dt, m);
    return Vec3(s.pose.x, s.pose.y, s.pose.psi);
  };
  const Vec3 a = run(0.1), b = run(0.05), c = run(0.025);
  const double e1 = (a - b).norm(), e2 = (b - c).norm();
  ASSERT_GT(e2, 0.0);
  EXPECT_NEAR(e1 / e2, 2.0, 0.3);
}

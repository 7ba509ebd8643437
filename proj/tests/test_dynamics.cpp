#include "oracles.hpp"
#include "pursuit/control.hpp"
#include "pursuit/dynamics.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace pursuit;

namespace {

QuadStated hover_state(const QuadParamsd& params) {
  QuadStated s;
  s.p = Vec3(0, 0, 0.6);
  s.rotor_speeds = Vec4::Constant(params.hover_rotor_speed());
  return s;
}

double spin_error(double dt, const QuadParamsd& params, const oracle::Spin& exact, double T) {
  QuadStated s;
  s.w = Vec3(3.0, 1.0, 2.0);
  const int n = static_cast<int>(std::lround(T / dt));
  for (int i = 0; i < n; ++i) s = integrate(s, Vec4::Zero().eval(), dt, params).state;
  oracle::Spin got;
  got << s.q.w(), s.q.x(), s.q.y(), s.q.z(), s.w;
  // q and -q are the same attitude
  if (got.head<4>().dot(exact.head<4>()) < 0) got.head<4>() *= -1;
  return (got - exact).norm();
}

}  // namespace

TEST(Dynamics, CrazyflieDefaultsAreConsistent) {
  const auto p = QuadParamsd::crazyflie();
  EXPECT_NO_THROW(p.validate());
  EXPECT_NEAR(4 * p.k_f * p.omega_max * p.omega_max, p.f_max, 1e-12);
  EXPECT_NEAR(4 * p.k_f * std::pow(p.hover_rotor_speed(), 2), p.mass * p.gravity, 1e-12);
}

TEST(Dynamics, ValidateRejectsBadParameters) {
  auto p = QuadParamsd::crazyflie();
  p.mass = -1;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = QuadParamsd::crazyflie();
  p.inertia.x() = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Dynamics, LinearAccelerationMatchesRotationOracle) {
  const auto params = QuadParamsd::crazyflie();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int i = 0; i < 50; ++i) {
    QuadStated s;
    s.q = Eigen::Quaterniond(g(rng), g(rng), g(rng), g(rng)).normalized();
    s.rotor_speeds = Vec4(2000 + 100 * g(rng), 2100, 1900 + 50 * g(rng), 2000);
    const double thrust = params.k_f * s.rotor_speeds.squaredNorm();
    const Eigen::Matrix3d R = oracle::rotation(s.q.w(), s.q.x(), s.q.y(), s.q.z());
    const Vec3 expect = R.col(2) * thrust / params.mass - Vec3(0, 0, params.gravity);
    EXPECT_LT((linear_acceleration(s, params) - expect).norm(), 1e-10);
  }
}

TEST(Dynamics, TorqueFromRotorArmsAndDrag) {
  const auto params = QuadParamsd::crazyflie();
  const Vec4 omega(2000, 2200, 2400, 2600);
  Vec3 expect = Vec3::Zero();
  for (int i = 0; i < 4; ++i) {
    const double f = params.k_f * omega[i] * omega[i];
    expect += params.rotor_pos[i].cross(Vec3(0, 0, f));
    expect.z() += params.rotor_spin[i] * params.k_m * omega[i] * omega[i];
  }
  EXPECT_LT((body_torque(omega, params) - expect).norm(), 1e-15);
}

TEST(Dynamics, MotorLagMatchesFineEuler) {
  const auto params = QuadParamsd::crazyflie();
  const Vec4 omega(1000, 1500, 2000, 1800);
  const Vec4 cmd(2000, 1200, 900, 2050);
  const double dt = 0.005;
  const Vec4 got = motor_step(omega, cmd, dt, params);
  for (int i = 0; i < 4; ++i)
    EXPECT_NEAR(got[i], oracle::motor_euler(omega[i], cmd[i], params.motor_rate, dt, 200000), 1e-3);
}

TEST(Dynamics, MotorCommandClampedToLimit) {
  const auto params = QuadParamsd::crazyflie();
  const Vec4 got = motor_step(Vec4(Vec4::Constant(params.omega_max)), Vec4(Vec4::Constant(10 * params.omega_max)), 1.0, params);
  EXPECT_LE(got.maxCoeff(), params.omega_max + 1e-9);
}

TEST(Dynamics, HoverHoldsPosition) {
  const auto params = QuadParamsd::crazyflie();
  QuadStated s = hover_state(params);
  const Vec3 start = s.p;
  for (int i = 0; i < 200; ++i) s = integrate(s, s.rotor_speeds, 0.005, params).state;
  EXPECT_LT((s.p - start).norm(), 1e-6);
}

TEST(Dynamics, FreeFallIsExact) {
  const auto params = QuadParamsd::crazyflie();
  QuadStated s;
  s.p = Vec3(0, 0, 1);
  for (int i = 0; i < 100; ++i) s = integrate(s, Vec4::Zero().eval(), 0.005, params).state;
  EXPECT_NEAR(s.p.z(), 1 - 0.5 * params.gravity * 0.25, 1e-12);
}

TEST(Dynamics, FourthOrderOnTorqueFreeSpin) {
  auto params = QuadParamsd::crazyflie();
  params.inertia = Vec3(1.0, 2.0, 3.0) * 1e-5;
  const double T = 1.0;
  oracle::Spin s0;
  s0 << 1, 0, 0, 0, 3.0, 1.0, 2.0;
  const oracle::Spin exact = oracle::spin_solve(s0, params.inertia, T, 100000);
  const double coarse = spin_error(0.02, params, exact, T);
  const double fine = spin_error(0.01, params, exact, T);
  const double ratio = coarse / fine;
  EXPECT_GT(ratio, 12.0);
  EXPECT_LT(ratio, 20.0);
}

TEST(Dynamics, QuaternionStaysUnit) {
  const auto params = QuadParamsd::crazyflie();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, params.omega_max);
  QuadStated s = hover_state(params);
  for (int i = 0; i < 2000; ++i) {
    s = integrate(s, Vec4(u(rng), u(rng), u(rng), u(rng)), 0.005, params).state;
    ASSERT_NEAR(s.q.norm(), 1.0, 1e-12);
  }
}

TEST(Dynamics, NonFiniteStateReported) {
  const auto params = QuadParamsd::crazyflie();
  QuadStated s;
  s.v.x() = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(integrate(s, Vec4::Zero().eval(), 0.005, params).finite);
  EXPECT_THROW(integrate(s, Vec4::Zero().eval(), 0.0, params), std::invalid_argument);
}

TEST(Dynamics, FloatInstantiation) {
  auto params = QuadParams<float>::crazyflie();
  QuadState<float> s;
  s.rotor_speeds = Vec4T<float>::Constant(params.hover_rotor_speed());
  const auto r = integrate(s, s.rotor_speeds, 0.005f, params);
  EXPECT_TRUE(r.finite);
  EXPECT_LT(r.state.p.norm(), 1e-4f);
}

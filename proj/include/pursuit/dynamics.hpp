#pragma once

// Quadrotor rigid-body model: rotor thrust/drag, first-order motor lag and an
// RK4 integrator over (position, attitude, velocity, body rates).

#include "pursuit/types.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pursuit {

template <typename Scalar>
struct QuadState {
  Vec3T<Scalar> p = Vec3T<Scalar>::Zero();
  Eigen::Quaternion<Scalar> q = Eigen::Quaternion<Scalar>::Identity();  // body -> world
  Vec3T<Scalar> v = Vec3T<Scalar>::Zero();                             // world frame
  Vec3T<Scalar> w = Vec3T<Scalar>::Zero();                             // body frame
  Vec4T<Scalar> rotor_speeds = Vec4T<Scalar>::Zero();                  // rad/s

  EIGEN_MAKE_ALIGNED_OPERATOR_NEW
};

template <typename Scalar>
struct QuadParams {
  Scalar mass = Scalar(0.027);
  Vec3T<Scalar> inertia{Scalar(1.657e-5), Scalar(1.666e-5), Scalar(2.926e-5)};
  Scalar k_f = Scalar(2.88e-8);
  Scalar k_m = Scalar(1.7e-10);
  // Rate constant of the motor lag: dOmega/dt = motor_rate * (cmd - Omega), units 1/s.
  Scalar motor_rate = Scalar(40);
  std::array<Vec3T<Scalar>, 4> rotor_pos{};
  Vec4T<Scalar> rotor_spin{Scalar(1), Scalar(-1), Scalar(1), Scalar(-1)};
  Scalar omega_max = Scalar(0);
  Scalar f_max = Scalar(0);
  Scalar gravity = Scalar(9.81);

  EIGEN_MAKE_ALIGNED_OPERATOR_NEW

  /// Crazyflie-2.1-class defaults: 27 g, 46 mm arm, ~0.5 N thrust cap.
  static QuadParams crazyflie() {
    QuadParams params;
    params.set_x_layout(Scalar(0.046));
    params.set_thrust_cap(Scalar(0.5));
    return params;
  }

  /// X layout, rotor order front-right, back-right, back-left, front-left.
  void set_x_layout(Scalar arm) {
    const Scalar a = arm / std::sqrt(Scalar(2));
    rotor_pos[0] = Vec3T<Scalar>(a, -a, 0);
    rotor_pos[1] = Vec3T<Scalar>(-a, -a, 0);
    rotor_pos[2] = Vec3T<Scalar>(-a, a, 0);
    rotor_pos[3] = Vec3T<Scalar>(a, a, 0);
  }

  /// Sets F_max and derives omega_max so that F_max = 4 k_f omega_max^2.
  void set_thrust_cap(Scalar total_thrust) {
    f_max = total_thrust;
    omega_max = std::sqrt(total_thrust / (Scalar(4) * k_f));
  }

  Scalar hover_rotor_speed() const { return std::sqrt(mass * gravity / (Scalar(4) * k_f)); }

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("quad: " + what); };
    if (!(mass > 0)) fail("mass must be positive");
    if (!(inertia.minCoeff() > 0)) fail("inertia components must be positive");
    if (!(k_f > 0) || !(k_m > 0) || !(motor_rate > 0)) fail("k_f, k_m, motor_rate must be positive");
    if (!(omega_max > 0)) fail("omega_max must be positive");
    const Scalar implied = Scalar(4) * k_f * omega_max * omega_max;
    if (std::abs(implied - f_max) > Scalar(1e-9) * std::max(Scalar(1), f_max))
      fail("f_max must equal 4 * k_f * omega_max^2");
  }
};

using QuadStated = QuadState<double>;
using QuadParamsd = QuadParams<double>;

template <typename Scalar>
Vec4T<Scalar> rotor_thrusts(const Vec4T<Scalar>& rotor_speeds, const QuadParams<Scalar>& params) {
  return params.k_f * rotor_speeds.array().square().matrix();
}

template <typename Scalar>
Vec3T<Scalar> linear_acceleration(const QuadState<Scalar>& state, const QuadParams<Scalar>& params) {
  const Scalar thrust = rotor_thrusts(state.rotor_speeds, params).sum();
  const Vec3T<Scalar> body_accel(Scalar(0), Scalar(0), thrust / params.mass);
  return Vec3T<Scalar>(Scalar(0), Scalar(0), -params.gravity) + state.q.normalized().toRotationMatrix() * body_accel;
}

/// Body-frame torque from rotor drag and thrust lever arms.
template <typename Scalar>
Vec3T<Scalar> body_torque(const Vec4T<Scalar>& rotor_speeds, const QuadParams<Scalar>& params) {
  const Vec3T<Scalar> z = Vec3T<Scalar>::UnitZ();
  Vec3T<Scalar> torque = Vec3T<Scalar>::Zero();
  for (int j = 0; j < 4; ++j) {
    const Scalar omega_sq = rotor_speeds[j] * rotor_speeds[j];
    torque += params.rotor_spin[j] * params.k_m * omega_sq * z;
    torque += params.rotor_pos[j].cross(params.k_f * omega_sq * z);
  }
  return torque;
}

template <typename Scalar>
Vec3T<Scalar> angular_acceleration(const QuadState<Scalar>& state, const QuadParams<Scalar>& params) {
  const Vec3T<Scalar> torque = body_torque(state.rotor_speeds, params);
  const Vec3T<Scalar> gyroscopic = state.w.cross(params.inertia.cwiseProduct(state.w));
  return (torque - gyroscopic).cwiseQuotient(params.inertia);
}

/// Exact solution of the first-order motor lag over dt, clamped to [0, omega_max].
template <typename Scalar>
Vec4T<Scalar> motor_step(const Vec4T<Scalar>& rotor_speeds, const Vec4T<Scalar>& cmd, Scalar dt,
                         const QuadParams<Scalar>& params) {
  const Scalar blend = -std::expm1(-params.motor_rate * dt);
  const Vec4T<Scalar> next = rotor_speeds + blend * (cmd - rotor_speeds);
  return next.cwiseMax(Scalar(0)).cwiseMin(params.omega_max);
}

template <typename Scalar>
bool is_finite(const QuadState<Scalar>& s) {
  return s.p.allFinite() && s.q.coeffs().allFinite() && s.v.allFinite() && s.w.allFinite() &&
         s.rotor_speeds.allFinite();
}

template <typename Scalar>
struct IntegrationResult {
  QuadState<Scalar> state;
  bool finite = true;
};

namespace detail {

template <typename Scalar>
struct RigidDerivative {
  Vec3T<Scalar> dp;
  Eigen::Matrix<Scalar, 4, 1> dq;  // (w, x, y, z)
  Vec3T<Scalar> dv;
  Vec3T<Scalar> dw;
};

template <typename Scalar>
Eigen::Matrix<Scalar, 4, 1> quat_vec(const Eigen::Quaternion<Scalar>& q) {
  return {q.w(), q.x(), q.y(), q.z()};
}

template <typename Scalar>
Eigen::Quaternion<Scalar> vec_quat(const Eigen::Matrix<Scalar, 4, 1>& v) {
  return Eigen::Quaternion<Scalar>(v[0], v[1], v[2], v[3]);
}

template <typename Scalar>
RigidDerivative<Scalar> derivative(const QuadState<Scalar>& s, const QuadParams<Scalar>& params) {
  const Eigen::Quaternion<Scalar> omega(Scalar(0), s.w.x(), s.w.y(), s.w.z());
  const Eigen::Quaternion<Scalar> qdot = s.q * omega;
  return {s.v, Scalar(0.5) * quat_vec(qdot), linear_acceleration(s, params), angular_acceleration(s, params)};
}

template <typename Scalar>
QuadState<Scalar> offset(const QuadState<Scalar>& s, const RigidDerivative<Scalar>& d, Scalar h,
                         const Vec4T<Scalar>& rotor_speeds) {
  QuadState<Scalar> out;
  out.p = s.p + h * d.dp;
  out.q = vec_quat<Scalar>(quat_vec(s.q) + h * d.dq);
  out.v = s.v + h * d.dv;
  out.w = s.w + h * d.dw;
  out.rotor_speeds = rotor_speeds;
  return out;
}

}  // namespace detail

/// One RK4 step of the rigid-body ODE. Rotor speeds follow the exact motor
/// lag toward `cmd`, evaluated at the stage times 0, dt/2 and dt.
template <typename Scalar>
IntegrationResult<Scalar> integrate(const QuadState<Scalar>& state, const Vec4T<Scalar>& cmd, Scalar dt,
                                    const QuadParams<Scalar>& params) {
  if (!(dt > 0)) throw std::invalid_argument("integrate: dt must be positive");
  const Vec4T<Scalar> omega_mid = motor_step(state.rotor_speeds, cmd, dt / 2, params);
  const Vec4T<Scalar> omega_end = motor_step(state.rotor_speeds, cmd, dt, params);

  using detail::derivative;
  using detail::offset;
  const auto k1 = derivative(state, params);
  const auto k2 = derivative(offset(state, k1, dt / 2, omega_mid), params);
  const auto k3 = derivative(offset(state, k2, dt / 2, omega_mid), params);
  const auto k4 = derivative(offset(state, k3, dt, omega_end), params);

  const Scalar sixth = dt / Scalar(6);
  QuadState<Scalar> next;
  next.p = state.p + sixth * (k1.dp + 2 * k2.dp + 2 * k3.dp + k4.dp);
  next.q = detail::vec_quat<Scalar>(detail::quat_vec(state.q) + sixth * (k1.dq + 2 * k2.dq + 2 * k3.dq + k4.dq));
  next.q.normalize();
  next.v = state.v + sixth * (k1.dv + 2 * k2.dv + 2 * k3.dv + k4.dv);
  next.w = state.w + sixth * (k1.dw + 2 * k2.dw + 2 * k3.dw + k4.dw);
  next.rotor_speeds = omega_end;
  return {next, is_finite(next)};
}

}  // namespace pursuit

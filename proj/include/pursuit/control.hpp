#pragma once

// Low-level control: CTBR command -> rotor speed commands through a body-rate
// PID and an X-configuration mixer, plus the point-mass velocity controller
// used by the heuristic baselines.

#include "pursuit/dynamics.hpp"

#include <algorithm>
#include <numbers>

namespace pursuit {

template <typename Scalar>
struct CtbrCommandT {
  Scalar thrust = Scalar(0);                     // normalized collective thrust, [0, 1]
  Vec3T<Scalar> rates = Vec3T<Scalar>::Zero();  // roll, pitch, yaw rates, rad/s

  CtbrCommandT clamped() const {
    const Scalar pi = std::numbers::pi_v<Scalar>;
    return {std::clamp(thrust, Scalar(0), Scalar(1)), rates.cwiseMax(-pi).cwiseMin(pi)};
  }

  /// (F, wx, wy, wz), the vector the smoothness reward differences.
  Vec4T<Scalar> as_vector() const { return {thrust, rates.x(), rates.y(), rates.z()}; }
  static CtbrCommandT from_vector(const Vec4T<Scalar>& a) { return {a[0], a.template tail<3>()}; }
};

using CtbrCommand = CtbrCommandT<double>;

template <typename Scalar>
struct RatePidConfigT {
  Vec3T<Scalar> kp{Scalar(20), Scalar(20), Scalar(12)};
  Vec3T<Scalar> ki{Scalar(2), Scalar(2), Scalar(1)};
  Vec3T<Scalar> kd{Scalar(0.05), Scalar(0.05), Scalar(0)};
  Vec3T<Scalar> i_limit{Scalar(1), Scalar(1), Scalar(1)};
  // PID output is an angular-acceleration demand; torque = output_scale * I * output.
  Scalar output_scale = Scalar(1);

  bool valid() const {
    return kp.allFinite() && ki.allFinite() && kd.allFinite() && std::isfinite(output_scale) &&
           (i_limit.array() > Scalar(0)).all();
  }
};

using RatePidConfig = RatePidConfigT<double>;

template <typename Scalar>
struct PidStateT {
  Vec3T<Scalar> integral = Vec3T<Scalar>::Zero();
  Vec3T<Scalar> prev_rate = Vec3T<Scalar>::Zero();
  bool has_prev = false;
  bool saturated = false;  // last mixer call had to scale down torque demands
};

using PidState = PidStateT<double>;

/// Maps per-rotor thrusts to (collective thrust, roll, pitch, yaw torque).
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 4> allocation_matrix(const QuadParams<Scalar>& params) {
  Eigen::Matrix<Scalar, 4, 4> a;
  for (int j = 0; j < 4; ++j) {
    a(0, j) = Scalar(1);
    a(1, j) = params.rotor_pos[j].y();
    a(2, j) = -params.rotor_pos[j].x();
    a(3, j) = params.rotor_spin[j] * params.k_m / params.k_f;
  }
  return a;
}

/// Per-rotor thrust targets for a wrench. Collective thrust is preserved; if
/// any rotor would leave [0, f_max/4] the torque part is scaled down uniformly.
template <typename Scalar>
Vec4T<Scalar> mix(Scalar collective, const Vec3T<Scalar>& torque, const QuadParams<Scalar>& params,
                  bool* saturated = nullptr) {
  const Eigen::Matrix<Scalar, 4, 4> inv = allocation_matrix(params).inverse();
  const Scalar rotor_cap = params.k_f * params.omega_max * params.omega_max;
  const Vec4T<Scalar> base = Vec4T<Scalar>::Constant(collective / Scalar(4));
  Vec4T<Scalar> wrench = Vec4T<Scalar>::Zero();
  wrench.template tail<3>() = torque;
  const Vec4T<Scalar> diff = inv * wrench;

  Scalar scale = Scalar(1);
  for (int j = 0; j < 4; ++j) {
    if (diff[j] > 0 && base[j] + diff[j] > rotor_cap)
      scale = std::min(scale, std::max(Scalar(0), (rotor_cap - base[j]) / diff[j]));
    if (diff[j] < 0 && base[j] + diff[j] < 0) scale = std::min(scale, std::max(Scalar(0), base[j] / -diff[j]));
  }
  if (saturated) *saturated = scale < Scalar(1);
  return base + scale * diff;
}

template <typename Scalar>
Vec4T<Scalar> thrust_to_rotor_cmd(const Vec4T<Scalar>& thrusts, const QuadParams<Scalar>& params) {
  return (thrusts.cwiseMax(Scalar(0)) / params.k_f).cwiseSqrt().cwiseMin(params.omega_max);
}

template <typename Scalar>
struct RotorCommandResult {
  Vec4T<Scalar> rotor_cmd;
  PidStateT<Scalar> pid;
};

template <typename Scalar>
RotorCommandResult<Scalar> ctbr_to_rotor_cmd(const CtbrCommandT<Scalar>& raw_cmd, const QuadState<Scalar>& state,
                                             const PidStateT<Scalar>& pid, const QuadParams<Scalar>& params,
                                             const RatePidConfigT<Scalar>& gains, Scalar dt) {
  if (!(dt > 0)) throw std::invalid_argument("ctbr_to_rotor_cmd: dt must be positive");
  const CtbrCommandT<Scalar> cmd = raw_cmd.clamped();
  PidStateT<Scalar> next = pid;

  const Vec3T<Scalar> error = cmd.rates - state.w;
  next.integral = (pid.integral + error * dt).cwiseMax(-gains.i_limit).cwiseMin(gains.i_limit);
  // Derivative on measurement, no kick on setpoint steps.
  const Vec3T<Scalar> rate_derivative = pid.has_prev ? Vec3T<Scalar>((state.w - pid.prev_rate) / dt)
                                                     : Vec3T<Scalar>(Vec3T<Scalar>::Zero());
  const Vec3T<Scalar> accel_demand = gains.kp.cwiseProduct(error) + gains.ki.cwiseProduct(next.integral) -
                                     gains.kd.cwiseProduct(rate_derivative);
  next.prev_rate = state.w;
  next.has_prev = true;

  const Vec3T<Scalar> torque = gains.output_scale * params.inertia.cwiseProduct(accel_demand);
  bool saturated = false;
  const Vec4T<Scalar> thrusts = mix(cmd.thrust * params.f_max, torque, params, &saturated);
  next.saturated = saturated;
  return {thrust_to_rotor_cmd(thrusts, params), next};
}

/// Point-mass kinematics for velocity-commanded baselines: velocity follows
/// the (speed-clamped) demand through a first-order lag, attitude stays level.
template <typename Scalar>
QuadState<Scalar> velocity_to_motion(const Vec3T<Scalar>& desired_v, const QuadState<Scalar>& state,
                                     Scalar max_speed, Scalar dt, Scalar lag_tau) {
  if (!(dt > 0)) throw std::invalid_argument("velocity_to_motion: dt must be positive");
  auto clamp_speed = [max_speed](Vec3T<Scalar> v) {
    const Scalar n = v.norm();
    if (n > max_speed) v *= max_speed / n;
    return v;
  };
  const Vec3T<Scalar> target = clamp_speed(desired_v);
  const Scalar blend = lag_tau > 0 ? -std::expm1(-dt / lag_tau) : Scalar(1);
  QuadState<Scalar> next = state;
  next.v = clamp_speed(state.v + blend * (target - state.v));
  next.p = state.p + next.v * dt;
  next.q = Eigen::Quaternion<Scalar>::Identity();
  next.w.setZero();
  return next;
}

}  // namespace pursuit

#pragma once

// Multiplicative (error-state) quaternion EKF for phone attitude.
//
// Frames: body (phone axes) and earth NED (north, east, down). The attitude q
// rotates body vectors into the earth frame. A device at rest reads gravity as
// +g along its body-frame "down" direction, so a flat phone reads (0, 0, g).
//
// Error state is a 3-vector small rotation in the body frame:
//   q_true = q * Exp(dtheta)
// Prediction integrates the gyro; corrections use the accelerometer direction
// (gated during dynamic motion) and the tilt-compensated magnetic heading.

#include "error.hpp"
#include "trace_io.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <span>

namespace texive {

inline constexpr double kGravity = 9.80665;

struct EkfConfig {
    double gyro_var = 1e-3;         // (rad/s)^2 per sample
    double accel_var = 5e-2;        // (m/s^2)^2 per axis
    double mag_var = 1e-1;          // uT^2 on the horizontal field
    double init_attitude_var = (5.0 * std::numbers::pi / 180.0) * (5.0 * std::numbers::pi / 180.0);
    double accel_gate = 2.0;        // m/s^2 deviation of |a| from g
    Vec3 gyro_bias = Vec3::Zero();
    bool use_accel = true;
    bool use_mag = true;
    double static_gyro_max = 0.2;   // rad/s, mean magnitude allowed during init
    std::int64_t min_init_ms = 500;
};

struct OrientationState {
    Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
    Eigen::Matrix3d P = Eigen::Matrix3d::Zero();
    std::int64_t t_ms = 0;
};

struct EulerAngles {
    double pitch = 0;
    double roll = 0;
    double yaw = 0;
};

struct EfcSample {
    std::int64_t t_ms = 0;
    Vec3 linear_accel = Vec3::Zero();  // (north, east, down), gravity removed
    Vec3 mag = Vec3::Zero();           // uT, earth frame
};

namespace detail {

inline Eigen::Matrix3d skew(const Vec3& v) {
    Eigen::Matrix3d m;
    m << 0, -v.z(), v.y(),
         v.z(), 0, -v.x(),
         -v.y(), v.x(), 0;
    return m;
}

inline Eigen::Quaterniond exp_map(const Vec3& rotvec) {
    const double angle = rotvec.norm();
    if (angle < 1e-12) {
        Eigen::Quaterniond dq(1.0, 0.5 * rotvec.x(), 0.5 * rotvec.y(), 0.5 * rotvec.z());
        return dq.normalized();
    }
    return Eigen::Quaterniond(Eigen::AngleAxisd(angle, rotvec / angle));
}

inline double wrap_pi(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a + std::numbers::pi, two_pi);
    if (a <= 0) a += two_pi;
    return a - std::numbers::pi;
}

inline void symmetrize(Eigen::Matrix3d& P) { P = 0.5 * (P + P.transpose()).eval(); }

} // namespace detail

inline Eigen::Quaterniond from_euler(const EulerAngles& e) {
    Eigen::Quaterniond q = Eigen::AngleAxisd(e.yaw, Vec3::UnitZ()) *
                           Eigen::AngleAxisd(e.pitch, Vec3::UnitY()) *
                           Eigen::AngleAxisd(e.roll, Vec3::UnitX());
    return q.normalized();
}

// Z-Y-X (yaw, pitch, roll) decomposition of a body->earth rotation.
inline EulerAngles to_euler(const Eigen::Quaterniond& q) {
    const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
    EulerAngles e;
    e.roll = std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y));
    e.pitch = std::asin(std::clamp(2.0 * (w * y - z * x), -1.0, 1.0));
    e.yaw = std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
    // atan2 can return -pi; the convention is (-pi, pi].
    if (e.roll == -std::numbers::pi) e.roll = std::numbers::pi;
    if (e.yaw == -std::numbers::pi) e.yaw = std::numbers::pi;
    return e;
}

inline Vec3 rotate(const Eigen::Quaterniond& q, const Vec3& v) { return q * v; }

inline EfcSample to_efc(const OrientationState& state, const SensorSample& s) {
    EfcSample out;
    out.t_ms = s.t_ms;
    out.linear_accel = rotate(state.q, s.accel) - Vec3(0, 0, kGravity);
    out.mag = rotate(state.q, s.mag);
    return out;
}

// Closed-form tilt from a gravity reading.
inline EulerAngles tilt_from_accel(const Vec3& a) {
    EulerAngles e;
    e.roll = std::atan2(a.y(), a.z());
    e.pitch = std::atan2(-a.x(), std::hypot(a.y(), a.z()));
    return e;
}

inline OrientationState ekf_init(std::span<const SensorSample> window, const EkfConfig& cfg = {}) {
    if (window.size() < 2) throw Error(Errc::InvalidParams, "initialization needs at least 2 samples");
    const auto n = static_cast<double>(window.size());
    const double span_ms =
        static_cast<double>(window.back().t_ms - window.front().t_ms) * n / (n - 1.0);
    if (span_ms + 1e-9 < static_cast<double>(cfg.min_init_ms))
        throw Error(Errc::InvalidParams, "initialization window shorter than " + std::to_string(cfg.min_init_ms) + " ms");

    Vec3 acc = Vec3::Zero(), mag = Vec3::Zero();
    double gyro_mag = 0;
    for (const auto& s : window) {
        acc += s.accel;
        mag += s.mag;
        gyro_mag += (s.gyro - cfg.gyro_bias).norm();
    }
    acc /= n;
    mag /= n;
    gyro_mag /= n;
    if (gyro_mag >= cfg.static_gyro_max)
        throw Error(Errc::NotStatic, "mean gyro magnitude " + std::to_string(gyro_mag) + " rad/s");
    if (acc.norm() < 1e-6) throw Error(Errc::NotStatic, "no gravity reading");

    EulerAngles e = tilt_from_accel(acc);
    const Eigen::Quaterniond tilt = from_euler({e.pitch, e.roll, 0.0});
    const Vec3 level = tilt * mag;
    e.yaw = (std::hypot(level.x(), level.y()) > 1e-9) ? std::atan2(-level.y(), level.x()) : 0.0;

    OrientationState st;
    st.q = from_euler(e);
    st.P = Eigen::Matrix3d::Identity() * cfg.init_attitude_var;
    st.t_ms = window.back().t_ms;
    return st;
}

namespace detail {

inline void apply_correction(OrientationState& st, const Vec3& dtheta) {
    st.q = (st.q * exp_map(dtheta)).normalized();
}

} // namespace detail

inline OrientationState ekf_step(const OrientationState& prev, const SensorSample& s, const EkfConfig& cfg = {}) {
    if (s.t_ms <= prev.t_ms)
        throw Error(Errc::NonIncreasingTime,
                    "sample t_ms " + std::to_string(s.t_ms) + " <= state t_ms " + std::to_string(prev.t_ms));
    OrientationState st = prev;
    const double dt = static_cast<double>(s.t_ms - prev.t_ms) * 1e-3;

    // Predict.
    const Vec3 dphi = (s.gyro - cfg.gyro_bias) * dt;
    const Eigen::Quaterniond dq = detail::exp_map(dphi);
    st.q = (st.q * dq).normalized();
    const Eigen::Matrix3d F = dq.toRotationMatrix().transpose();
    st.P = F * st.P * F.transpose() + Eigen::Matrix3d::Identity() * (cfg.gyro_var * dt * dt);
    st.t_ms = s.t_ms;

    const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();

    // Gravity direction.
    const double anorm = s.accel.norm();
    if (cfg.use_accel && anorm > 1e-6 && std::abs(anorm - kGravity) <= cfg.accel_gate) {
        const Vec3 h = st.q.conjugate() * Vec3(0, 0, anorm);
        const Eigen::Matrix3d H = detail::skew(h);
        const Eigen::Matrix3d S = H * st.P * H.transpose() + I * cfg.accel_var;
        const Eigen::Matrix3d K = st.P * H.transpose() * S.inverse();
        const Vec3 y = s.accel - h;
        detail::apply_correction(st, K * y);
        const Eigen::Matrix3d IKH = I - K * H;
        st.P = IKH * st.P * IKH.transpose() + K * (cfg.accel_var * I) * K.transpose();
        detail::symmetrize(st.P);
    }

    // Magnetic heading (yaw only).
    if (cfg.use_mag) {
        const Vec3 m_e = st.q * s.mag;
        const double horiz = std::hypot(m_e.x(), m_e.y());
        if (horiz > 1e-3 * std::max(1.0, s.mag.norm())) {
            const double innovation = detail::wrap_pi(-std::atan2(m_e.y(), m_e.x()));
            const Eigen::RowVector3d H = st.q.toRotationMatrix().row(2);
            const double r = cfg.mag_var / (horiz * horiz);
            const double S = (H * st.P * H.transpose())(0, 0) + r;
            const Vec3 K = st.P * H.transpose() / S;
            detail::apply_correction(st, K * innovation);
            const Eigen::Matrix3d IKH = I - K * H;
            st.P = IKH * st.P * IKH.transpose() + (K * K.transpose()) * r;
            detail::symmetrize(st.P);
        }
    }
    return st;
}

} // namespace texive

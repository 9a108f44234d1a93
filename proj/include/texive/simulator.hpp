#pragma once

// Synthetic 20 Hz traces with ground truth.
//
// Each segment describes the phone's true attitude (yaw/pitch/roll), the
// earth-frame linear acceleration and the earth-frame magnetic field as smooth
// functions of time. Body-frame readings are then derived consistently:
//   accel = R^T (a_lin + g_down),  mag = R^T m,  gyro = Log(q_{k-1}^-1 q_k) / dt
// plus independent Gaussian channel noise. The shapes are idealized versions of
// the published signal morphologies, not replays of recordings.

#include "error.hpp"
#include "labels.hpp"
#include "localize.hpp"
#include "orientation.hpp"
#include "scheduler.hpp"
#include "texting.hpp"
#include "trace_io.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <array>
#include <numbers>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace texive {

enum class SegmentKind {
    Walk,
    Stairs,
    SitDown,
    EnterVehicleLeft,
    EnterVehicleRight,
    Idle,
    EngineStart,
    Drive,
    BusBoard,
    Run,
    Jump,
};

inline constexpr std::array<SegmentKind, 11> kAllSegmentKinds = {
    SegmentKind::Walk,  SegmentKind::Stairs,   SegmentKind::SitDown, SegmentKind::EnterVehicleLeft,
    SegmentKind::EnterVehicleRight, SegmentKind::Idle, SegmentKind::EngineStart, SegmentKind::Drive,
    SegmentKind::BusBoard, SegmentKind::Run, SegmentKind::Jump};

constexpr std::string_view segment_kind_name(SegmentKind k) {
    switch (k) {
        case SegmentKind::Walk: return "Walk";
        case SegmentKind::Stairs: return "Stairs";
        case SegmentKind::SitDown: return "SitDown";
        case SegmentKind::EnterVehicleLeft: return "EnterVehicleLeft";
        case SegmentKind::EnterVehicleRight: return "EnterVehicleRight";
        case SegmentKind::Idle: return "Idle";
        case SegmentKind::EngineStart: return "EngineStart";
        case SegmentKind::Drive: return "Drive";
        case SegmentKind::BusBoard: return "BusBoard";
        case SegmentKind::Run: return "Run";
        case SegmentKind::Jump: return "Jump";
    }
    return "Idle";
}

inline std::optional<SegmentKind> parse_segment_kind(std::string_view s) {
    for (auto k : kAllSegmentKinds)
        if (segment_kind_name(k) == s) return k;
    return std::nullopt;
}

constexpr ActivityLabel segment_label(SegmentKind k) {
    switch (k) {
        case SegmentKind::Walk: return ActivityLabel::Walking;
        case SegmentKind::Stairs: return ActivityLabel::Stairs;
        case SegmentKind::SitDown: return ActivityLabel::SittingDown;
        case SegmentKind::EnterVehicleLeft:
        case SegmentKind::EnterVehicleRight: return ActivityLabel::EnteringVehicle;
        case SegmentKind::Idle: return ActivityLabel::Standing;
        case SegmentKind::BusBoard: return ActivityLabel::GettingOnBus;
        default: return ActivityLabel::Other;
    }
}

enum class Seat { Front, Back };

constexpr std::string_view seat_name(Seat s) { return s == Seat::Front ? "Front" : "Back"; }

struct SegmentParams {
    double intensity = 1.0;               // scales motion amplitudes
    double bump_rate = kDefaultBumpRate;  // Drive: bumps per second
    Seat seat = Seat::Front;              // Drive: bump amplitude profile
    double spike_ut = 3.0;                // EngineStart: transient size

    bool operator==(const SegmentParams&) const = default;
};

struct Segment {
    SegmentKind kind = SegmentKind::Idle;
    double duration_s = 1.0;
    SegmentParams params;

    bool operator==(const Segment&) const = default;
};

struct NoiseConfig {
    double accel = 0.05;  // m/s^2
    double gyro = 0.005;  // rad/s
    double mag = 0.15;    // uT

    bool operator==(const NoiseConfig&) const = default;
};

struct Scenario {
    std::uint64_t seed = 0;
    std::vector<Segment> segments;
    Pocket pocket = Pocket::LeftPocket;
    NoiseConfig noise;
    double heading_deg = 0;         // initial walking direction, clockwise from north
    double standing_pitch_deg = 0;  // phone pitch in the pocket while standing
    double sitting_pitch_deg = 0;   // ... and while seated

    bool operator==(const Scenario&) const = default;
};

struct GroundTruthEvent {
    SegmentKind kind;
    std::int64_t start_ms;
    std::int64_t end_ms;
};

struct GeneratedTrace {
    Trace trace;
    std::vector<EulerAngles> attitude;       // true attitude per sample
    std::vector<std::int64_t> bump_times_ms; // front-wheel pass times
    std::vector<GroundTruthEvent> events;    // one per segment
};

namespace sim {

inline constexpr double kDeg = std::numbers::pi / 180.0;
inline constexpr std::int64_t kPeriodMs = 50;
inline const Vec3 kAmbientField{30.0, 0.0, 40.0};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x51u));
}

// Minimum-jerk profile and its derivatives on u in [0, 1].
inline double mj(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}
inline double mj_dd(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return 60.0 * u - 180.0 * u * u + 120.0 * u * u * u;
}
// Position-like ramp from 0 to 1 over [t0, t0 + T].
inline double ramp(double t, double t0, double T) { return mj((t - t0) / T); }
// Acceleration of a displacement d moved with a minimum-jerk ramp over [t0, t0 + T].
inline double ramp_accel(double t, double t0, double T, double d) { return d * mj_dd((t - t0) / T) / (T * T); }
// sin^2 bump, zero outside [t0, t0 + T].
inline double pulse(double t, double t0, double T) {
    if (t <= t0 || t >= t0 + T) return 0.0;
    const double s = std::sin(std::numbers::pi * (t - t0) / T);
    return s * s;
}
inline double gauss(double t, double center, double sigma) {
    const double x = (t - center) / sigma;
    return std::exp(-0.5 * x * x);
}
// Smooth on/off envelope with edges of length `edge`.
inline double envelope(double t, double duration, double edge) {
    if (duration <= 0) return 0.0;
    edge = std::min(edge, duration / 2.0);
    return mj(t / edge) * mj((duration - t) / edge);
}

struct Kinematics {
    double yaw = 0, pitch = 0, roll = 0;  // radians, absolute
    double a_fwd = 0, a_right = 0, a_down = 0;
    Vec3 mag = kAmbientField;
};

// State carried from one segment into the next.
struct Carry {
    double heading = 0;
    double pitch = 0;
    double roll = 0;
    Vec3 field_offset = Vec3::Zero();  // vehicle interior field, earth frame
    bool seated = false;
};

struct Gait {
    double f = 2.0;       // step frequency (Hz)
    double av = 2.0;      // vertical amplitude
    double ah = 1.0;      // forward amplitude
    double harm = 0.3;    // second-harmonic share of vertical
    double swing = 15.0;  // thigh pitch swing (deg)
    double lateral = 1.0; // -1 mirrors sideways sway for the right pocket
    double phase[5] = {0, 0, 0, 0, 0};
};

inline void add_gait(Kinematics& k, const Gait& g, double t, double env) {
    const double w = 2.0 * std::numbers::pi * g.f;
    k.a_down += env * (-g.av * std::sin(w * t + g.phase[0]) - g.harm * g.av * std::sin(2.0 * w * t + g.phase[1]));
    k.a_fwd += env * g.ah * std::sin(w * t + g.phase[2]);
    k.a_right += g.lateral * env * 0.4 * g.ah * std::sin(0.5 * w * t + g.phase[3]);
    k.pitch += env * g.swing * kDeg * std::sin(0.5 * w * t + g.phase[3]);
    k.roll += g.lateral * env * 3.0 * kDeg * std::sin(0.5 * w * t + g.phase[4]);
}

// A fully parameterized segment instance.
struct Plan {
    SegmentKind kind{};
    double duration = 0;
    Carry start;
    Carry end;
    Gait gait;
    // Shared transient parameters; meaning depends on kind.
    double t_turn = 0, turn = 0, t_sit = 0, sit_T = 1.4, drop = 0.4;
    double pitch_from = 0, pitch_to = 0;
    double roll_amp = 0, roll_t = 0;
    double lift_t1 = 0, lift_t2 = 0, lift_a1 = 0, lift_a2 = 0;
    double side_sign = 1;  // +1 left-side entry, -1 right-side
    double fluct_amp = 0, fluct_f1 = 0.7, fluct_f2 = 1.3, fluct_p1 = 0, fluct_p2 = 0;
    Vec3 field_to = Vec3::Zero();
    double spike_t = 0, spike_amp = 0;
    // Drive
    double launch_t = 0.5, launch_T = 4.0, launch_a = 2.0;
    double cruise_phase[6] = {0, 0, 0, 0, 0, 0};
    struct Bump {
        double t;
        double lag;
        double a1;
        double a2;
    };
    std::vector<Bump> bumps;
};

inline Vec3 field_direction() { return kAmbientField.normalized(); }

// Field left behind once the starter motor stops (running engine, alternator).
inline double residual_field(double spike_ut) { return std::min(0.1 * spike_ut, 0.5); }

inline Kinematics eval(const Plan& p, double t) {
    Kinematics k;
    const Carry& c = p.start;
    k.yaw = c.heading;
    k.pitch = c.pitch;
    k.roll = c.roll;
    k.mag = kAmbientField + c.field_offset;
    const double D = p.duration;

    switch (p.kind) {
        case SegmentKind::Idle:
            break;

        case SegmentKind::Walk:
        case SegmentKind::Stairs:
        case SegmentKind::Run:
            add_gait(k, p.gait, t, envelope(t, D, 0.4));
            break;

        case SegmentKind::Jump: {
            // Take-off push then landing impact, once per gait period.
            const double period = 1.0 / p.gait.f;
            const double ph = std::fmod(t + p.gait.phase[0], period);
            const double env = envelope(t, D, 0.3);
            k.a_down += env * (-p.gait.av * gauss(ph, 0.15, 0.07) + 1.4 * p.gait.av * gauss(ph, 0.55, 0.05));
            k.pitch += env * 8.0 * kDeg * gauss(ph, 0.55, 0.1);
            k.a_fwd += env * 0.5 * std::sin(2.0 * std::numbers::pi * t / period + p.gait.phase[1]);
            break;
        }

        case SegmentKind::SitDown: {
            const double walk_env = envelope(t, p.t_turn + 1.0, 0.3);
            add_gait(k, p.gait, t, walk_env * 0.5);
            k.yaw += p.turn * ramp(t, p.t_turn, 1.2);
            k.a_down += ramp_accel(t, p.t_sit, p.sit_T, p.drop);
            k.a_fwd += ramp_accel(t, p.t_sit, p.sit_T, -0.3 * p.drop);
            k.pitch = p.pitch_from + (p.pitch_to - p.pitch_from) * ramp(t, p.t_sit, p.sit_T);
            k.roll += p.roll_amp * kDeg * pulse(t, p.t_sit, p.sit_T + 0.4);
            break;
        }

        case SegmentKind::EnterVehicleLeft:
        case SegmentKind::EnterVehicleRight:
        case SegmentKind::BusBoard: {
            const double S = p.side_sign;
            // Approach on foot, slowing down.
            add_gait(k, p.gait, t, envelope(t, p.t_turn + 0.4, 0.3));
            if (p.kind == SegmentKind::BusBoard) {
                // Two or three steps up into the bus.
                Gait up = p.gait;
                up.av *= 1.6;
                up.swing = 25.0;
                add_gait(k, up, t - p.t_turn, envelope(t - p.t_turn, 1.8, 0.3));
            } else {
                // Door pull.
                k.a_fwd += -0.8 * pulse(t, p.t_turn - 0.8, 0.7);
                k.a_right += S * 0.8 * (pulse(t, p.roll_t, 0.6) - pulse(t, p.roll_t + 0.6, 0.6));
            }
            k.yaw += p.turn * ramp(t, p.t_turn, 1.0);
            k.a_down += ramp_accel(t, p.t_sit, p.sit_T, p.drop);
            k.pitch = p.pitch_from + (p.pitch_to - p.pitch_from) * ramp(t, p.t_sit, p.sit_T);
            // Leg lifts raise the thigh toward horizontal; the first belongs to
            // the leg nearer the vehicle.
            k.pitch -= p.lift_a1 * kDeg * pulse(t, p.lift_t1, 0.9) + p.lift_a2 * kDeg * pulse(t, p.lift_t2, 0.9);
            k.a_down += -1.2 * (pulse(t, p.lift_t1, 0.45) * p.lift_a1 / 35.0 + pulse(t, p.lift_t2, 0.45) * p.lift_a2 / 35.0);
            // Body twist into the seat, then a partial rebound.
            k.roll += S * p.roll_amp * kDeg * (pulse(t, p.roll_t, 1.6) - 0.4 * pulse(t, p.roll_t + 1.5, 0.8));
            // Vehicle field: fluctuation while approaching, settling to the interior level.
            const double fenv = pulse(t, 0.0, std::min(D, p.t_sit + p.sit_T + 0.4));
            const double fl = p.fluct_amp * fenv *
                              (std::sin(2 * std::numbers::pi * p.fluct_f1 * t + p.fluct_p1) +
                               0.6 * std::sin(2 * std::numbers::pi * p.fluct_f2 * t + p.fluct_p2));
            const Vec3 lateral(0.0, S, 0.0);
            k.mag += fl * (field_direction() + 0.3 * lateral) +
                     (p.field_to - c.field_offset) * ramp(t, p.t_sit - 0.5, 2.0);
            break;
        }

        case SegmentKind::EngineStart: {
            const double s = gauss(t, p.spike_t, 0.1);
            k.mag += field_direction() * (p.spike_amp * s + residual_field(p.spike_amp) * ramp(t, p.spike_t, 0.6));
            break;
        }

        case SegmentKind::Drive: {
            k.a_fwd += p.launch_a * envelope(t - p.launch_t, p.launch_T, 0.8) * (t > p.launch_t ? 1.0 : 0.0);
            const double cruise = ramp(t, p.launch_t + p.launch_T, 2.0);
            k.a_fwd += cruise * 0.3 * std::sin(0.13 * t + p.cruise_phase[0]);
            k.a_right += cruise * 0.25 * std::sin(0.21 * t + p.cruise_phase[1]);
            k.a_down += 0.08 * std::sin(2 * std::numbers::pi * 3.1 * t + p.cruise_phase[2]) +
                        0.06 * std::sin(2 * std::numbers::pi * 4.7 * t + p.cruise_phase[3]) +
                        0.05 * std::sin(2 * std::numbers::pi * 1.9 * t + p.cruise_phase[4]);
            for (const auto& b : p.bumps) {
                if (t < b.t - 0.5 || t > b.t + b.lag + 0.6) continue;
                // Each wheel: jolt upward, then land.
                k.a_down += -b.a1 * gauss(t, b.t, 0.06) + 0.6 * b.a1 * gauss(t, b.t + 0.14, 0.05);
                k.a_down += -b.a2 * gauss(t, b.t + b.lag, 0.06) + 0.6 * b.a2 * gauss(t, b.t + b.lag + 0.14, 0.05);
            }
            break;
        }
    }
    return k;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Gait random_gait(std::mt19937_64& rng, SegmentKind kind, double intensity) {
    Gait g;
    switch (kind) {
        case SegmentKind::Stairs:
            g.f = uniform(rng, 1.3, 1.7);
            g.av = uniform(rng, 3.0, 4.0);
            g.ah = uniform(rng, 0.4, 0.8);
            g.harm = 0.6;
            g.swing = 22.0;
            break;
        case SegmentKind::Run:
            g.f = uniform(rng, 2.5, 3.0);
            g.av = uniform(rng, 6.0, 9.0);
            g.ah = uniform(rng, 2.5, 4.0);
            g.harm = 0.4;
            g.swing = 25.0;
            break;
        case SegmentKind::Jump:
            g.f = uniform(rng, 0.8, 1.2);
            g.av = uniform(rng, 7.0, 11.0);
            g.ah = 0.5;
            break;
        default:
            g.f = uniform(rng, 1.7, 2.1);
            g.av = uniform(rng, 1.8, 2.6);
            g.ah = uniform(rng, 0.8, 1.3);
            g.harm = 0.3;
            g.swing = 15.0;
            break;
    }
    g.av *= intensity;
    g.ah *= intensity;
    for (double& ph : g.phase) ph = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    return g;
}

// Arrival times of a homogeneous Poisson process on [t0, t1).
inline std::vector<double> poisson_arrivals(double rate, double t0, double t1, std::mt19937_64& rng) {
    std::vector<double> out;
    if (!(rate > 0)) return out;
    std::exponential_distribution<double> gap(rate);
    for (double t = t0 + gap(rng); t < t1; t += gap(rng)) out.push_back(t);
    return out;
}

inline Plan make_plan(const Segment& seg, const Carry& start, const Scenario& sc, std::mt19937_64& rng) {
    Plan p;
    p.kind = seg.kind;
    p.duration = seg.duration_s;
    p.start = start;
    p.end = start;
    const double standing = sc.standing_pitch_deg * kDeg;
    const double sitting = sc.sitting_pitch_deg * kDeg;
    p.gait = random_gait(rng, seg.kind, seg.params.intensity);
    p.gait.lateral = sc.pocket == Pocket::RightPocket ? -1.0 : 1.0;
    const double D = seg.duration_s;

    switch (seg.kind) {
        case SegmentKind::SitDown: {
            p.t_turn = uniform(rng, 0.0, 0.4) * std::min(1.0, D / 4.0);
            p.turn = (uniform(rng, 0, 1) < 0.5 ? -1.0 : 1.0) * uniform(rng, 120.0, 180.0) * kDeg;
            p.t_sit = p.t_turn + 1.0;
            p.sit_T = uniform(rng, 1.2, 1.6);
            p.drop = uniform(rng, 0.35, 0.5) * seg.params.intensity;
            p.pitch_from = start.pitch;
            p.pitch_to = sitting;
            p.roll_amp = (uniform(rng, 0, 1) < 0.5 ? -1.0 : 1.0) * uniform(rng, 4.0, 9.0);
            p.end.heading = start.heading + p.turn;
            p.end.pitch = sitting;
            p.end.seated = true;
            break;
        }
        case SegmentKind::EnterVehicleLeft:
        case SegmentKind::EnterVehicleRight:
        case SegmentKind::BusBoard: {
            const bool bus = seg.kind == SegmentKind::BusBoard;
            const double scale = D / (bus ? 9.0 : 5.5);
            p.side_sign = seg.kind == SegmentKind::EnterVehicleRight ? -1.0 : 1.0;
            if (bus) p.side_sign = uniform(rng, 0, 1) < 0.5 ? -1.0 : 1.0;
            p.t_turn = (bus ? 2.0 : uniform(rng, 1.4, 1.8)) * scale;
            p.turn = -p.side_sign * uniform(rng, 75.0, 105.0) * kDeg;
            p.t_sit = (bus ? 6.5 : uniform(rng, 2.3, 2.6)) * scale;
            p.sit_T = uniform(rng, 1.1, 1.4) * std::min(1.0, scale);
            p.drop = uniform(rng, 0.3, 0.45);
            p.pitch_from = start.pitch;
            p.pitch_to = sitting;
            // Leg nearer the vehicle: the right leg for a left-side entry, and vice versa.
            const bool inner = (p.side_sign > 0) == (sc.pocket == Pocket::RightPocket);
            const double big = uniform(rng, 28.0, 38.0), small = uniform(rng, 7.0, 12.0);
            p.lift_t1 = p.t_sit - 0.2 * scale;
            p.lift_t2 = p.t_sit + 1.3 * std::min(1.0, scale);
            p.lift_a1 = inner ? big : small;
            p.lift_a2 = inner ? small : big;
            p.roll_amp = uniform(rng, 18.0, 28.0);
            p.roll_t = p.t_sit - 0.1;
            p.fluct_amp = uniform(rng, 3.0, 4.5);
            p.fluct_f1 = uniform(rng, 0.6, 0.9);
            p.fluct_f2 = uniform(rng, 1.2, 1.6);
            p.fluct_p1 = uniform(rng, 0.0, 2 * std::numbers::pi);
            p.fluct_p2 = uniform(rng, 0.0, 2 * std::numbers::pi);
            p.field_to = Vec3(uniform(rng, -6.0, 6.0), p.side_sign * uniform(rng, 1.0, 4.0), uniform(rng, 3.0, 9.0));
            p.end.heading = start.heading + p.turn;
            p.end.pitch = sitting;
            p.end.field_offset = p.field_to;
            p.end.seated = true;
            break;
        }
        case SegmentKind::EngineStart:
            p.spike_t = uniform(rng, std::min(0.8, D / 3.0), std::max(std::min(0.8, D / 3.0), D - 1.2));
            p.spike_amp = seg.params.spike_ut;
            p.end.field_offset = start.field_offset + field_direction() * residual_field(p.spike_amp);
            break;
        case SegmentKind::Drive: {
            p.launch_t = 0.5;
            p.launch_T = uniform(rng, 3.5, 5.0);
            p.launch_a = uniform(rng, 1.8, 2.6) * seg.params.intensity;
            for (double& ph : p.cruise_phase) ph = uniform(rng, 0.0, 2 * std::numbers::pi);
            const double first = p.launch_t + p.launch_T + 1.0;
            for (double t : poisson_arrivals(seg.params.bump_rate, first, D - 2.5, rng)) {
                Plan::Bump b;
                b.t = t;
                b.lag = uniform(rng, 0.45, 0.9);  // wheelbase over speed
                b.a1 = uniform(rng, 1.8, 3.0);
                const double ratio = seg.params.seat == Seat::Front ? uniform(rng, 1.0, 1.4) : uniform(rng, 2.8, 3.8);
                b.a2 = b.a1 * ratio;
                p.bumps.push_back(b);
            }
            break;
        }
        default:
            if (!start.seated) p.end.pitch = standing;
            break;
    }
    return p;
}

} // namespace sim

inline void validate_scenario(const Scenario& sc) {
    if (sc.segments.empty()) throw Error(Errc::InvalidScenario, "scenario has no segments");
    for (std::size_t i = 0; i < sc.segments.size(); ++i) {
        const auto& s = sc.segments[i];
        if (!(s.duration_s > 0) || !std::isfinite(s.duration_s) || s.duration_s > 1e6)
            throw Error(Errc::InvalidScenario, "segment " + std::to_string(i) + " needs a positive duration");
        if (!(s.params.intensity > 0) || !(s.params.bump_rate >= 0) || !(s.params.spike_ut >= 0))
            throw Error(Errc::InvalidScenario, "segment " + std::to_string(i) + " has invalid parameters");
        if ((s.kind == SegmentKind::EnterVehicleLeft || s.kind == SegmentKind::EnterVehicleRight) && s.duration_s < 4.0)
            throw Error(Errc::InvalidScenario, "vehicle entry needs at least 4 s");
        if (s.kind == SegmentKind::BusBoard && s.duration_s < 7.0)
            throw Error(Errc::InvalidScenario, "bus boarding needs at least 7 s");
        if (s.kind == SegmentKind::SitDown && s.duration_s < 3.0)
            throw Error(Errc::InvalidScenario, "sitting down needs at least 3 s");
    }
    if (!(sc.noise.accel >= 0) || !(sc.noise.gyro >= 0) || !(sc.noise.mag >= 0))
        throw Error(Errc::InvalidScenario, "noise must be non-negative");
}

inline GeneratedTrace generate(const Scenario& sc) {
    validate_scenario(sc);
    using namespace sim;

    // Segment plans, each from its own stream so appending segments leaves earlier ones intact.
    std::vector<Plan> plans;
    std::vector<double> starts;
    Carry carry;
    carry.heading = sc.heading_deg * kDeg;
    carry.pitch = sc.standing_pitch_deg * kDeg;
    double t_acc = 0;
    for (std::size_t i = 0; i < sc.segments.size(); ++i) {
        std::mt19937_64 rng(stream_seed(sc.seed, 1000 + i));
        plans.push_back(make_plan(sc.segments[i], carry, sc, rng));
        carry = plans.back().end;
        starts.push_back(t_acc);
        t_acc += sc.segments[i].duration_s;
    }

    GeneratedTrace out;
    const auto n = static_cast<std::size_t>(std::llround(t_acc * 1000.0 / static_cast<double>(kPeriodMs)));
    out.trace.samples.reserve(n);
    out.attitude.reserve(n);

    std::mt19937_64 acc_rng(stream_seed(sc.seed, 1)), gyro_rng(stream_seed(sc.seed, 2)), mag_rng(stream_seed(sc.seed, 3));
    std::normal_distribution<double> unit(0.0, 1.0);
    auto noise3 = [&](std::mt19937_64& r, double sd) {
        Vec3 v;
        for (int k = 0; k < 3; ++k) v[k] = sd * unit(r);
        return v;
    };

    std::size_t seg = 0;
    Eigen::Quaterniond q_prev = Eigen::Quaterniond::Identity();
    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t t_ms = static_cast<std::int64_t>(i) * kPeriodMs;
        const double t = static_cast<double>(t_ms) * 1e-3;
        while (seg + 1 < plans.size() && t >= starts[seg + 1] - 1e-9) ++seg;
        const Plan& p = plans[seg];
        const Kinematics k = eval(p, t - starts[seg]);

        const EulerAngles e{k.pitch, k.roll, k.yaw};
        const Eigen::Quaterniond q = from_euler(e);
        const double hdg = p.start.heading;
        const Vec3 fwd(std::cos(hdg), std::sin(hdg), 0.0), right(-std::sin(hdg), std::cos(hdg), 0.0);
        const Vec3 a_e = k.a_fwd * fwd + k.a_right * right + Vec3(0.0, 0.0, k.a_down + kGravity);

        SensorSample s;
        s.t_ms = t_ms;
        s.accel = q.conjugate() * a_e;
        s.mag = q.conjugate() * k.mag;
        if (i > 0) {
            const Eigen::AngleAxisd rel(q_prev.conjugate() * q);
            double angle = rel.angle();
            Vec3 axis = rel.axis();
            if (angle > std::numbers::pi) angle -= 2.0 * std::numbers::pi;
            s.gyro = axis * angle / (static_cast<double>(kPeriodMs) * 1e-3);
        }
        s.accel += noise3(acc_rng, sc.noise.accel);
        s.gyro += noise3(gyro_rng, sc.noise.gyro);
        s.mag += noise3(mag_rng, sc.noise.mag);
        q_prev = q;

        out.trace.samples.push_back(s);
        out.attitude.push_back(to_euler(q));
    }

    const std::int64_t last = out.trace.samples.empty() ? 0 : out.trace.samples.back().t_ms;
    for (std::size_t i = 0; i < plans.size(); ++i) {
        const auto b = std::min(last, static_cast<std::int64_t>(std::llround(starts[i] * 1000.0)));
        const auto e = std::min(last, static_cast<std::int64_t>(std::llround((starts[i] + plans[i].duration) * 1000.0)));
        out.events.push_back({plans[i].kind, b, e});
        if (e > b) out.trace.labels.push_back({b, e, segment_label(plans[i].kind)});
        for (const auto& bump : plans[i].bumps)
            out.bump_times_ms.push_back(static_cast<std::int64_t>(std::llround((starts[i] + bump.t) * 1000.0)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Keystrokes

// Two-component gamma mixture whose overall mean and SD hit the targets exactly:
// a fast component (share p, mean m1, SD s1) plus a slow one solved from the moments.
struct IntervalMixture {
    double p, m1, s1, m2, s2;

    static IntervalMixture solve(double mean, double sd, double p, double m1, double s1) {
        const double m2 = (mean - p * m1) / (1.0 - p);
        const double second = (sd * sd + mean * mean - p * (s1 * s1 + m1 * m1)) / (1.0 - p);
        return {p, m1, s1, m2, std::sqrt(second - m2 * m2)};
    }
};

inline IntervalMixture normal_typing_mixture() {
    return IntervalMixture::solve(kNormalMeanIntervalMs, 327.03, 0.9, 460.0, 160.0);
}
inline IntervalMixture distracted_typing_mixture() {
    return IntervalMixture::solve(kDistractedMeanIntervalMs, 528.68, 0.62, 380.0, 150.0);
}

inline KeystrokeLog generate_keystrokes(TextingClass cls, std::size_t n_letters, std::uint64_t seed,
                                        std::int64_t start_ms = 0) {
    const IntervalMixture mix = cls == TextingClass::Normal ? normal_typing_mixture() : distracted_typing_mixture();
    const double typo_every = cls == TextingClass::Normal ? 50.0 : 30.0;
    std::mt19937_64 rng(sim::stream_seed(seed, cls == TextingClass::Normal ? 77 : 78));
    auto gamma_ms = [&](double m, double s) {
        const double shape = (m / s) * (m / s);
        return std::gamma_distribution<double>(shape, s * s / m)(rng);
    };
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    KeystrokeLog log;
    log.events.reserve(n_letters + n_letters / 20);
    double t = static_cast<double>(start_ms);
    for (std::size_t i = 0; i < n_letters; ++i) {
        if (i > 0) {
            const double gap = u01(rng) < mix.p ? gamma_ms(mix.m1, mix.s1) : gamma_ms(mix.m2, mix.s2);
            if (u01(rng) < 1.0 / typo_every)
                log.events.push_back({static_cast<std::int64_t>(std::llround(t + 0.5 * gap)), KeyKind::Backspace});
            t += gap;
        }
        log.events.push_back({static_cast<std::int64_t>(std::llround(t)), KeyKind::Letter});
    }
    return log;
}

} // namespace texive

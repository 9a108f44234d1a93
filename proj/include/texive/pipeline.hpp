#pragma once

// Streaming driver/passenger pipeline: one forward pass over a trace with a
// fixed amount of retained state, emitting timestamped detection events.

#include "activity.hpp"
#include "error.hpp"
#include "features.hpp"
#include "localize.hpp"
#include "orientation.hpp"
#include "texting.hpp"
#include "trace_io.hpp"

#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace texive {

enum class Region { LeftHandDrive, RightHandDrive };
enum class Role { Driver, Passenger, NotInVehicle };

constexpr std::string_view region_name(Region r) {
    return r == Region::LeftHandDrive ? "left-hand-drive" : "right-hand-drive";
}
inline std::optional<Region> parse_region(std::string_view s) {
    if (s == "left-hand-drive") return Region::LeftHandDrive;
    if (s == "right-hand-drive") return Region::RightHandDrive;
    return std::nullopt;
}
constexpr std::string_view role_name(Role r) {
    switch (r) {
        case Role::Driver: return "Driver";
        case Role::Passenger: return "Passenger";
        case Role::NotInVehicle: return "NotInVehicle";
    }
    return "NotInVehicle";
}

struct Evidence {
    bool entered_vehicle = false;
    double entry_confidence = 0;
    std::int64_t entry_t_ms = 0;
    std::optional<SideVerdict> side;
    std::int64_t side_t_ms = 0;
    RowVerdict row;  // source None until a row cue is observed
    std::int64_t row_t_ms = 0;
    std::optional<TextingVerdict> texting;
    std::int64_t texting_t_ms = 0;
    bool moving = false;
};

struct RoleVerdict {
    Role role = Role::NotInVehicle;
    bool distracted = false;
    double confidence = 0;
    std::int64_t latency_ms = -1;  // verdict time minus detected entry time; -1 when no entry
};

inline constexpr double kMissingRowDiscount = 0.5;

// Rule table. The driver sits on the left in left-hand-drive regions and on
// the right otherwise; only the front row holds a driver.
inline RoleVerdict fuse(const Evidence& ev, Region region) {
    if (!ev.entered_vehicle || !ev.side) throw Error(Errc::NoEntryEvidence, "no confirmed vehicle entry");
    const Side driver_side = region == Region::LeftHandDrive ? Side::Left : Side::Right;
    RoleVerdict v;
    const double base = ev.entry_confidence * ev.side->confidence;
    if (ev.side->side != driver_side) {
        v.role = Role::Passenger;
        v.confidence = base;
    } else if (ev.row.source == RowSource::None) {
        v.role = Role::Driver;
        v.confidence = base * kMissingRowDiscount;
    } else {
        v.role = ev.row.row == Row::Front ? Role::Driver : Role::Passenger;
        v.confidence = base * ev.row.confidence;
    }
    v.distracted = v.role == Role::Driver && ev.moving && ev.texting && ev.texting->verdict == TextingClass::Distracted;
    return v;
}

// Belief-function combination of side and row masses was considered for the
// fusion step; the rule table above replaces it. Kept for reference:
//
// inline RoleVerdict fuse_dempster_shafer(const Evidence& ev, Region region) {
//     // m_side({Left}), m_side({Right}), m_side(Theta); m_row({Front}), m_row({Back}), m_row(Theta)
//     // combine with Dempster's rule over {Driver, Passenger} and normalize by 1 - K.
// }

struct DetectionEvent {
    std::int64_t t_ms = 0;
    std::string kind;
    std::string detail;

    bool operator==(const DetectionEvent&) const = default;
};

struct PipelineConfig {
    std::int64_t window_ms = kDefaultWindowMs;
    std::int64_t step_ms = 500;
    std::size_t dct_k = kDefaultDctCoefficients;
    double rate_hz = kDefaultRateHz;
    Region region = Region::LeftHandDrive;
    EkfConfig ekf;
    ConfirmConfig confirm;
    SpikeConfig spike;
    BumpConfig bump;
    TextingConfig texting;
    double bump_ratio_threshold = kDefaultRatioThreshold;
    int latch_windows = 2;
    std::int64_t confirm_wait_ms = 120000;   // drive-away must follow a candidate within this
    std::int64_t spike_search_ms = 120000;   // engine-start search bound after entry
    std::int64_t settle_ms = 1000;           // stillness before the spike search arms
    double settle_gyro = 0.1;                // rad/s mean magnitude counted as still
};

struct Models {
    ActivityModel activity;
    SideModel side;
};

struct PipelineResult {
    Evidence evidence;
    RoleVerdict verdict;
    std::vector<DetectionEvent> events;
    std::optional<std::int64_t> first_verdict_t_ms;
    std::size_t peak_buffered_samples = 0;
};

namespace pipeline_detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

// Fixed-capacity ring yielding its contents oldest first.
template <typename T>
class Ring {
public:
    explicit Ring(std::size_t cap) : data_(cap) {}
    void push(const T& v) {
        data_[head_] = v;
        head_ = (head_ + 1) % data_.size();
        if (size_ < data_.size()) ++size_;
    }
    bool full() const { return size_ == data_.size(); }
    std::size_t size() const { return size_; }
    void clear() { head_ = size_ = 0; }
    void copy_to(std::vector<T>& out) const {
        out.resize(size_);
        const std::size_t start = (head_ + data_.size() - size_) % data_.size();
        for (std::size_t i = 0; i < size_; ++i) out[i] = data_[(start + i) % data_.size()];
    }

private:
    std::vector<T> data_;
    std::size_t head_ = 0, size_ = 0;
};

} // namespace pipeline_detail

class Pipeline {
public:
    Pipeline(const Models& models, const PipelineConfig& cfg = {})
        : models_(models),
          cfg_(cfg),
          n_(window_sample_count(cfg.window_ms, cfg.rate_hz)),
          fx_(n_, cfg.dct_k),
          efc_(n_),
          att_(n_),
          still_cap_(std::max<std::size_t>(1, static_cast<std::size_t>(cfg.settle_ms * cfg.rate_hz / 1000.0))),
          latch_(cfg.latch_windows),
          drive_(cfg.confirm),
          spike_(cfg.spike),
          bumps_(cfg.bump) {
        if (models_.activity.empty() || models_.side.empty()) throw Error(Errc::ModelNotTrained, "pipeline needs both models");
        if (models_.activity.dim() != 2 * cfg.dct_k + 3)
            throw Error(Errc::DimensionMismatch, "activity model dim does not match dct_k");
        if (models_.side.dim() != 4 * cfg.dct_k + 5)
            throw Error(Errc::DimensionMismatch, "side model dim does not match dct_k");
        if (cfg.step_ms <= 0) throw Error(Errc::InvalidParams, "step must be positive");
        init_cap_ = static_cast<std::size_t>(std::ceil(cfg.ekf.min_init_ms * cfg.rate_hz / 1000.0));
    }

    void push(const SensorSample& s) {
        if (last_t_ && s.t_ms <= *last_t_)
            throw Error(Errc::NonMonotonicTimestamp, "sample at " + std::to_string(s.t_ms) + " ms");
        last_t_ = s.t_ms;
        if (!ekf_) {
            initialize(s);
            note_buffer();
            return;
        }
        const double dt = static_cast<double>(s.t_ms - ekf_->t_ms) * 1e-3;
        *ekf_ = ekf_step(*ekf_, s, cfg_.ekf);
        const EfcSample e = to_efc(*ekf_, s);

        // Gyro-only attitude branch for the drive-away check; the filter itself
        // leans into sustained acceleration and would under-report it.
        q_gyro_ = (q_gyro_ * detail::exp_map((s.gyro - cfg_.ekf.gyro_bias) * dt)).normalized();
        const Vec3 lin_gyro = q_gyro_ * s.accel - Vec3(0, 0, kGravity);
        const double horiz_gyro = std::hypot(lin_gyro.x(), lin_gyro.y());
        if (horiz_gyro < 0.5 * cfg_.confirm.drive_accel_threshold && !drive_run_) q_gyro_ = ekf_->q;
        drive_run_ = horiz_gyro > cfg_.confirm.drive_accel_threshold;

        efc_.push(e);
        att_.push(to_euler(ekf_->q));
        still_vals_.push_back(s.gyro.norm());
        still_sum_ += s.gyro.norm();
        if (still_vals_.size() > still_cap_) {
            still_sum_ -= still_vals_.front();
            still_vals_.pop_front();
        }

        const bool moving_now = drive_.push(s.t_ms, horiz_gyro);
        on_sample(s, e, moving_now);

        if (efc_.full() && s.t_ms >= next_step_t_) {
            step(s.t_ms);
            next_step_t_ = s.t_ms + cfg_.step_ms;
        }
        note_buffer();
    }

    PipelineResult finish(const KeystrokeLog* keys = nullptr) {
        if (phase_ == Phase::SpikeSearch) end_spike_search(*last_t_, false);
        if (keys && ev_.entered_vehicle && ev_.moving) texting(*keys);
        PipelineResult r;
        r.evidence = ev_;
        r.events = events_;
        r.first_verdict_t_ms = first_verdict_t_;
        r.peak_buffered_samples = peak_buffer_;
        if (ev_.entered_vehicle) {
            r.verdict = fuse(ev_, cfg_.region);
            r.verdict.latency_ms = first_verdict_t_ ? *first_verdict_t_ - ev_.entry_t_ms : -1;
        } else {
            r.verdict.role = Role::NotInVehicle;
            r.verdict.confidence = 1.0;
        }
        return r;
    }

    std::size_t buffered_samples() const {
        return init_.size() + efc_.size() + att_.size() + still_vals_.size() + spike_.buffered();
    }

private:
    enum class Phase { Searching, Entering, Pending, SpikeSearch, Driving };

    struct Candidate {
        std::int64_t t_ms;
        ActivityLabel label;
        double confidence;
        double mag_var;
        SideVerdict side;
    };

    void emit(std::int64_t t, std::string kind, std::string detail) {
        events_.push_back({t, std::move(kind), std::move(detail)});
    }

    void note_buffer() { peak_buffer_ = std::max(peak_buffer_, buffered_samples()); }

    void initialize(const SensorSample& s) {
        init_.push_back(s);
        if (init_.size() > init_cap_) init_.pop_front();
        if (init_.size() < init_cap_) return;
        std::vector<SensorSample> win(init_.begin(), init_.end());
        double g = 0;
        for (const auto& w : win) g += (w.gyro - cfg_.ekf.gyro_bias).norm();
        if (g / static_cast<double>(win.size()) >= cfg_.ekf.static_gyro_max) return;
        ekf_ = ekf_init(win, cfg_.ekf);
        q_gyro_ = ekf_->q;
        init_.clear();
        emit(s.t_ms, "ekf_init", "");
    }

    double still_mean() const { return still_sum_ / static_cast<double>(still_vals_.size()); }

    void on_sample(const SensorSample& s, const EfcSample& e, bool moving_now) {
        const std::int64_t t = s.t_ms;
        switch (phase_) {
            case Phase::Searching:
                break;
            case Phase::Entering: {
                const bool settled = still_vals_.size() == still_cap_ && still_mean() < cfg_.settle_gyro;
                if (settled || t - candidate_->t_ms >= cfg_.window_ms) decide_side(t, settled);
                break;
            }
            case Phase::Pending:
                feed_spike(t, e);
                if (moving_now) {
                    confirm(*candidate_, t, "drive");
                } else if (t - candidate_->t_ms > cfg_.confirm_wait_ms) {
                    emit(t, "candidate_dropped", "");
                    candidate_.reset();
                    phase_ = Phase::Searching;
                }
                break;
            case Phase::SpikeSearch:
                feed_spike(t, e);
                if (moving_now) {
                    end_spike_search(t, true);
                } else if (t - ev_.entry_t_ms > cfg_.spike_search_ms) {
                    end_spike_search(t, true);
                }
                break;
            case Phase::Driving:
                if (auto b = bumps_.push(t, e.linear_accel.z())) {
                    bump_events_.push_back(*b);
                    emit(b->t_back_ms, "bump", "ratio=" + pipeline_detail::fmt(b->ratio));
                    const auto before = fuse(ev_, cfg_.region);
                    ev_.row = resolve_row(spike_row_, classify_row_by_bump(bump_events_, cfg_.bump_ratio_threshold));
                    ev_.row_t_ms = t;
                    const auto after = fuse(ev_, cfg_.region);
                    if (after.role != before.role || after.confidence != before.confidence) publish(t);
                }
                break;
        }
    }

    // The spike detector arms once the user has been still for settle_ms, so the
    // field swings of the approach itself are not taken for an engine start.
    void arm_spike(std::int64_t t) {
        spike_armed_ = true;
        spike_.reset();
        emit(t, "spike_search_armed", "");
    }

    void feed_spike(std::int64_t t, const EfcSample& e) {
        if (!spike_armed_) {
            if (still_vals_.size() == still_cap_ && still_mean() < cfg_.settle_gyro) arm_spike(t);
            else return;
        }
        if (auto d = spike_.push(t, e.mag.norm()); d && (!best_spike_ || d->amplitude > best_spike_->amplitude)) {
            best_spike_ = *d;
            emit(d->t_ms, "engine_spike", "amplitude=" + pipeline_detail::fmt(d->amplitude));
        }
    }

    void step(std::int64_t t) {
        efc_.copy_to(efc_buf_);
        const FeatureVector fv = fx_.extract(efc_buf_);
        const auto pred = classify(models_.activity, fv);
        if (phase_ == Phase::Entering) candidate_->mag_var = std::max(candidate_->mag_var, fv.mag_var);
        const auto latched = latch_.push(pred.label);
        if (!latched) return;
        emit(t, "activity", std::string(label_name(*latched)));
        if (phase_ != Phase::Searching && phase_ != Phase::Pending) return;
        if (*latched != ActivityLabel::EnteringVehicle && *latched != ActivityLabel::SittingDown) return;

        candidate_ = Candidate{t, *latched, pred.posterior.of(*latched), fv.mag_var, {}};
        emit(t, "entry_candidate", std::string(label_name(candidate_->label)));
        spike_armed_ = false;
        best_spike_.reset();
        phase_ = Phase::Entering;
    }

    // The side window is taken once the user has settled into the seat (or one
    // window length after the candidate, whichever comes first).
    void decide_side(std::int64_t t, bool settled) {
        efc_.copy_to(efc_buf_);
        att_.copy_to(att_buf_);
        const FeatureVector fv = fx_.extract(efc_buf_);
        auto& c = *candidate_;
        c.mag_var = std::max(c.mag_var, fv.mag_var);
        c.side = detect_side(models_.side, att_buf_, fv, fx_);
        emit(t, "side_window", std::string(settled ? "settled" : "timeout") + " mag_var=" + pipeline_detail::fmt(c.mag_var));
        if (settled) arm_spike(t);
        if (c.mag_var > cfg_.confirm.mag_var_threshold) {
            confirm(c, t, "magnetic");
        } else {
            drive_.reset();
            phase_ = Phase::Pending;
        }
    }

    void confirm(const Candidate& c, std::int64_t t, std::string_view how) {
        ev_.entered_vehicle = true;
        ev_.entry_confidence = c.confidence;
        ev_.entry_t_ms = c.t_ms;
        ev_.side = c.side;
        ev_.side_t_ms = t;
        emit(t, "entry_confirmed", std::string(how));
        emit(t, "side",
             std::string(side_name(c.side.side)) + " confidence=" + pipeline_detail::fmt(c.side.confidence));
        publish(t);
        candidate_.reset();
        if (how == "drive") {
            ev_.moving = true;
            end_spike_search(t, spike_armed_);
        } else {
            drive_.reset();
            phase_ = Phase::SpikeSearch;
        }
    }

    void end_spike_search(std::int64_t t, bool moving) {
        SpikeSearch search;
        search.window_observed = spike_armed_;
        if (best_spike_) search.detection = best_spike_;
        spike_row_ = classify_row_by_spike(search);
        ev_.row = spike_row_;
        ev_.row_t_ms = t;
        emit(t, "row", std::string(row_name(ev_.row.row)) + " via " + std::string(row_source_name(ev_.row.source)));
        spike_.reset();
        spike_armed_ = false;
        if (moving) {
            ev_.moving = true;
            emit(t, "vehicle_moving", "");
            phase_ = Phase::Driving;
        } else {
            phase_ = Phase::Searching;
        }
        publish(t);
    }

    void texting(const KeystrokeLog& keys) {
        KeystrokeLog during;
        for (const auto& k : keys.events)
            if (k.t_ms >= ev_.row_t_ms && k.t_ms <= *last_t_) during.events.push_back(k);
        try {
            const auto st = compute_stats(during);
            ev_.texting = classify_texting(st, cfg_.texting);
            ev_.texting_t_ms = during.events.back().t_ms;
            emit(ev_.texting_t_ms, "texting", std::string(texting_name(ev_.texting->verdict)) +
                                                 " mean_ms=" + pipeline_detail::fmt(st.mean_interval_ms));
        } catch (const Error& e) {
            if (e.code() != Errc::TooFewEvents) throw;
        }
    }

    void publish(std::int64_t t) {
        const auto v = fuse(ev_, cfg_.region);
        if (!first_verdict_t_) first_verdict_t_ = t;
        emit(t, "verdict", std::string(role_name(v.role)) + " confidence=" + pipeline_detail::fmt(v.confidence));
    }

    const Models& models_;
    PipelineConfig cfg_;
    std::size_t n_;
    FeatureExtractor fx_;
    pipeline_detail::Ring<EfcSample> efc_;
    pipeline_detail::Ring<EulerAngles> att_;
    std::size_t still_cap_;
    std::deque<double> still_vals_;
    double still_sum_ = 0;
    std::vector<EfcSample> efc_buf_;
    std::vector<EulerAngles> att_buf_;
    std::deque<SensorSample> init_;
    std::size_t init_cap_ = 10;
    std::optional<OrientationState> ekf_;
    Eigen::Quaterniond q_gyro_ = Eigen::Quaterniond::Identity();
    bool drive_run_ = false;
    ActivityLatch latch_;
    DriveDetector drive_;
    EngineSpikeDetector spike_;
    BumpDetector bumps_;
    Phase phase_ = Phase::Searching;
    std::optional<Candidate> candidate_;
    bool spike_armed_ = false;
    std::optional<SpikeDetection> best_spike_;
    RowVerdict spike_row_;
    std::vector<BumpEvent> bump_events_;
    Evidence ev_;
    std::vector<DetectionEvent> events_;
    std::optional<std::int64_t> first_verdict_t_;
    std::optional<std::int64_t> last_t_;
    std::int64_t next_step_t_ = 0;
    std::size_t peak_buffer_ = 0;
};

inline PipelineResult run_pipeline(const Trace& trace, const Models& models, const PipelineConfig& cfg = {},
                                   const KeystrokeLog* keys = nullptr) {
    if (trace.samples.empty()) throw Error(Errc::EmptyTrace, "trace has no samples");
    Pipeline p(models, cfg);
    for (const auto& s : trace.samples) p.push(s);
    return p.finish(keys);
}

} // namespace texive

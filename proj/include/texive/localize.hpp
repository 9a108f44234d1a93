#pragma once

// Seat localization: entry side from pitch/roll signatures, and seat row from
// the engine-start magnetic transient or the wheel-pass bump amplitude ratio.

#include "activity.hpp"
#include "features.hpp"
#include "naive_bayes.hpp"
#include "orientation.hpp"

#include <array>
#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace texive {

enum class Side { Left, Right };
enum class Pocket { LeftPocket, RightPocket, Unknown };
enum class Row { Front, Back };
enum class RowSource { EngineSpike, Bump, None };

constexpr std::string_view side_name(Side s) { return s == Side::Left ? "Left" : "Right"; }
constexpr std::string_view row_name(Row r) { return r == Row::Front ? "Front" : "Back"; }
constexpr std::string_view pocket_name(Pocket p) {
    return p == Pocket::LeftPocket ? "LeftPocket" : p == Pocket::RightPocket ? "RightPocket" : "Unknown";
}
constexpr std::string_view row_source_name(RowSource s) {
    return s == RowSource::EngineSpike ? "EngineSpike" : s == RowSource::Bump ? "Bump" : "None";
}
constexpr Side flip(Side s) { return s == Side::Left ? Side::Right : Side::Left; }
constexpr Pocket flip(Pocket p) {
    return p == Pocket::LeftPocket ? Pocket::RightPocket : p == Pocket::RightPocket ? Pocket::LeftPocket : Pocket::Unknown;
}

// The four training cases: vehicle side entered from x trouser pocket holding the phone.
enum class EntryCase { LeftSideLeftPocket, LeftSideRightPocket, RightSideLeftPocket, RightSideRightPocket };

inline constexpr std::array<EntryCase, 4> kAllEntryCases = {
    EntryCase::LeftSideLeftPocket, EntryCase::LeftSideRightPocket, EntryCase::RightSideLeftPocket,
    EntryCase::RightSideRightPocket};

constexpr std::string_view entry_case_name(EntryCase c) {
    switch (c) {
        case EntryCase::LeftSideLeftPocket: return "LeftSideLeftPocket";
        case EntryCase::LeftSideRightPocket: return "LeftSideRightPocket";
        case EntryCase::RightSideLeftPocket: return "RightSideLeftPocket";
        case EntryCase::RightSideRightPocket: return "RightSideRightPocket";
    }
    return "LeftSideLeftPocket";
}

constexpr EntryCase make_entry_case(Side s, Pocket p) {
    const bool left_pocket = p != Pocket::RightPocket;
    if (s == Side::Left) return left_pocket ? EntryCase::LeftSideLeftPocket : EntryCase::LeftSideRightPocket;
    return left_pocket ? EntryCase::RightSideLeftPocket : EntryCase::RightSideRightPocket;
}
constexpr Side case_side(EntryCase c) {
    return (c == EntryCase::LeftSideLeftPocket || c == EntryCase::LeftSideRightPocket) ? Side::Left : Side::Right;
}
constexpr Pocket case_pocket(EntryCase c) {
    return (c == EntryCase::LeftSideLeftPocket || c == EntryCase::RightSideLeftPocket) ? Pocket::LeftPocket
                                                                                        : Pocket::RightPocket;
}
constexpr EntryCase mirror(EntryCase c) { return make_entry_case(flip(case_side(c)), flip(case_pocket(c))); }

template <>
struct LabelTraits<EntryCase> {
    static std::string_view name(EntryCase c) { return entry_case_name(c); }
    static std::optional<EntryCase> parse(std::string_view s) {
        for (auto c : kAllEntryCases)
            if (entry_case_name(c) == s) return c;
        return std::nullopt;
    }
    static int rank(EntryCase c) { return static_cast<int>(c); }
};

using SideModel = GaussianNaiveBayes<EntryCase>;

struct SideVerdict {
    Side side = Side::Left;
    double confidence = 0;
    Pocket pocket = Pocket::Unknown;
};

struct RowVerdict {
    Row row = Row::Back;
    RowSource source = RowSource::None;
    double confidence = 0;
};

// ---------------------------------------------------------------------------
// Side detection

// Pitch/roll DCT features of the entry window followed by the acceleration
// features of the same window. Yaw is never used, so vehicle heading drops out.
inline std::vector<double> side_features(std::span<const EulerAngles> attitude, const FeatureVector& accel_fv,
                                         const FeatureExtractor& fx) {
    std::vector<double> pitch(attitude.size()), roll(attitude.size());
    for (std::size_t i = 0; i < attitude.size(); ++i) {
        pitch[i] = attitude[i].pitch;
        roll[i] = attitude[i].roll;
    }
    auto x = fx.extract_series(pitch, roll).flatten();
    x.pop_back();  // the series extractor carries no magnetic channel
    const auto a = accel_fv.flatten();
    x.insert(x.end(), a.begin(), a.end());
    return x;
}

// Left/right mirror of an attitude sequence: roll and yaw change sign.
inline std::vector<EulerAngles> mirror_attitude(std::span<const EulerAngles> attitude) {
    std::vector<EulerAngles> out(attitude.begin(), attitude.end());
    for (auto& e : out) {
        e.roll = -e.roll;
        e.yaw = -e.yaw;
    }
    return out;
}

// Trains on the given examples plus their mirror images, which makes the model
// exactly symmetric under a roll sign flip.
inline SideModel train_side_model(std::span<const std::pair<std::vector<double>, EntryCase>> examples,
                                  std::size_t k, double variance_floor = kVarianceFloor) {
    std::vector<SideModel::Example> all(examples.begin(), examples.end());
    for (const auto& [x, c] : examples) {
        auto m = x;
        // roll block sits at [k, 2k) and its variance at 2k + 1 (unchanged by negation).
        for (std::size_t i = k; i < 2 * k && i < m.size(); ++i) m[i] = -m[i];
        all.emplace_back(std::move(m), mirror(c));
    }
    return SideModel::train(all, variance_floor);
}

inline SideVerdict side_from_prediction(const Prediction<EntryCase>& pred) {
    double left = 0, right = 0;
    for (const auto& [c, p] : pred.posterior.probs) (case_side(c) == Side::Left ? left : right) += p;
    SideVerdict v;
    v.side = left >= right ? Side::Left : Side::Right;
    v.confidence = std::max(left, right);
    v.pocket = case_side(pred.label) == v.side ? case_pocket(pred.label) : Pocket::Unknown;
    return v;
}

inline SideVerdict detect_side(const SideModel& model, std::span<const EulerAngles> attitude,
                               const FeatureVector& accel_fv, const FeatureExtractor& fx) {
    if (model.empty()) throw Error(Errc::ModelNotTrained, "side model has no classes");
    const auto x = side_features(attitude, accel_fv, fx);
    return side_from_prediction(model.classify(x));
}

// ---------------------------------------------------------------------------
// Engine-start magnetic spike

struct SpikeConfig {
    double threshold_ut = 2.0;
    std::int64_t baseline_ms = 2000;
    std::int64_t decay_ms = 1000;
    std::int64_t period_ms = 50;
};

struct SpikeDetection {
    bool detected = false;
    double amplitude = 0;  // uT above the trailing baseline
    std::int64_t t_ms = 0;
};

// Streaming: a rise of more than threshold above the trailing-window mean that
// falls back within decay_ms counts as a transient. A rise that does not fall
// back (a level shift) is discarded.
class EngineSpikeDetector {
public:
    explicit EngineSpikeDetector(const SpikeConfig& cfg = {}) : cfg_(cfg) {
        capacity_ = static_cast<std::size_t>(std::max<std::int64_t>(1, cfg.baseline_ms / cfg.period_ms));
    }

    std::optional<SpikeDetection> push(std::int64_t t_ms, double mag_norm) {
        std::optional<SpikeDetection> out;
        if (candidate_) {
            if (mag_norm > candidate_->peak) {
                candidate_->peak = mag_norm;
                candidate_->peak_t = t_ms;
            }
            if (mag_norm - candidate_->baseline < 0.5 * cfg_.threshold_ut) {
                if (t_ms - candidate_->start_t <= cfg_.decay_ms)
                    out = SpikeDetection{true, candidate_->peak - candidate_->baseline, candidate_->peak_t};
                candidate_.reset();
            } else if (t_ms - candidate_->start_t > cfg_.decay_ms) {
                candidate_.reset();
            }
        } else if (history_.size() >= capacity_ / 2) {
            const double base = sum_ / static_cast<double>(history_.size());
            if (mag_norm - base > cfg_.threshold_ut) candidate_ = Candidate{base, mag_norm, t_ms, t_ms};
        }
        history_.push_back(mag_norm);
        sum_ += mag_norm;
        if (history_.size() > capacity_) {
            sum_ -= history_.front();
            history_.pop_front();
        }
        return out;
    }

    std::size_t buffered() const { return history_.size(); }
    std::size_t capacity() const { return capacity_; }

    void reset() {
        history_.clear();
        sum_ = 0;
        candidate_.reset();
    }

private:
    struct Candidate {
        double baseline;
        double peak;
        std::int64_t start_t;
        std::int64_t peak_t;
    };

    SpikeConfig cfg_;
    std::size_t capacity_;
    std::deque<double> history_;
    double sum_ = 0;
    std::optional<Candidate> candidate_;
};

// Batch form over a uniformly sampled |mag| series; returns the strongest transient.
inline SpikeDetection detect_engine_spike(std::span<const double> mag_norm, std::int64_t baseline_ms = 2000,
                                          std::int64_t t0_ms = 0, const SpikeConfig& base_cfg = {}) {
    SpikeConfig cfg = base_cfg;
    cfg.baseline_ms = baseline_ms;
    EngineSpikeDetector det(cfg);
    SpikeDetection best;
    for (std::size_t i = 0; i < mag_norm.size(); ++i) {
        const auto t = t0_ms + static_cast<std::int64_t>(i) * cfg.period_ms;
        if (auto d = det.push(t, mag_norm[i]); d && d->amplitude > best.amplitude) best = *d;
    }
    return best;
}

struct SpikeSearch {
    bool window_observed = false;     // the engine-start interval was sampled
    std::optional<SpikeDetection> detection;
};

inline constexpr double kSpikeFrontConfidence = 0.9;
inline constexpr double kSpikeAbsentConfidence = 0.6;

inline RowVerdict classify_row_by_spike(const SpikeSearch& search) {
    if (!search.window_observed) return {Row::Back, RowSource::None, 0.0};
    if (search.detection && search.detection->detected) return {Row::Front, RowSource::EngineSpike, kSpikeFrontConfidence};
    return {Row::Back, RowSource::EngineSpike, kSpikeAbsentConfidence};
}

// ---------------------------------------------------------------------------
// Bumps

struct BumpEvent {
    std::int64_t t_front_ms = 0;
    std::int64_t t_back_ms = 0;
    double amp_first = 0;
    double amp_second = 0;
    double ratio = 0;
};

struct BumpConfig {
    double excursion_threshold = 1.0;  // m/s^2 on |vertical|
    std::int64_t merge_gap_ms = 150;
    std::int64_t min_lag_ms = 200;
    std::int64_t max_lag_ms = 2000;
};

// Groups vertical-acceleration excursions into front-wheel / back-wheel pairs.
class BumpDetector {
public:
    explicit BumpDetector(const BumpConfig& cfg = {}) : cfg_(cfg) {}

    std::optional<BumpEvent> push(std::int64_t t_ms, double vertical) {
        std::optional<BumpEvent> out;
        const double a = std::abs(vertical);
        if (has_open_ && t_ms - open_.last_above > cfg_.merge_gap_ms) {
            out = close(open_);
            has_open_ = false;
        }
        if (a > cfg_.excursion_threshold) {
            if (!has_open_) {
                open_ = Excursion{a, t_ms, t_ms};
                has_open_ = true;
            } else if (a > open_.peak) {
                open_.peak = a;
                open_.peak_t = t_ms;
            }
            open_.last_above = t_ms;
        }
        if (has_pending_ && !has_open_ && t_ms - pending_.peak_t > cfg_.max_lag_ms) has_pending_ = false;
        return out;
    }

    void reset() {
        has_open_ = false;
        has_pending_ = false;
    }

private:
    struct Excursion {
        double peak = 0;
        std::int64_t peak_t = 0;
        std::int64_t last_above = 0;
    };

    std::optional<BumpEvent> close(const Excursion& e) {
        if (has_pending_) {
            const auto lag = e.peak_t - pending_.peak_t;
            if (lag >= cfg_.min_lag_ms && lag <= cfg_.max_lag_ms) {
                BumpEvent ev{pending_.peak_t, e.peak_t, pending_.peak, e.peak, e.peak / pending_.peak};
                has_pending_ = false;
                return ev;
            }
            if (lag < cfg_.min_lag_ms) {
                if (e.peak > pending_.peak) pending_ = e;
                return std::nullopt;
            }
        }
        pending_ = e;
        has_pending_ = true;
        return std::nullopt;
    }

    BumpConfig cfg_;
    Excursion open_, pending_;
    bool has_open_ = false, has_pending_ = false;
};

inline std::vector<BumpEvent> detect_bumps(std::span<const double> vertical, std::int64_t t0_ms = 0,
                                           std::int64_t period_ms = 50, const BumpConfig& cfg = {}) {
    BumpDetector det(cfg);
    std::vector<BumpEvent> out;
    std::int64_t t = t0_ms;
    for (double v : vertical) {
        if (auto ev = det.push(t, v)) out.push_back(*ev);
        t += period_ms;
    }
    // Flush any excursion still open at the end of the series.
    for (std::int64_t i = 0; i <= cfg.merge_gap_ms / period_ms + 1; ++i) {
        if (auto ev = det.push(t, 0.0)) out.push_back(*ev);
        t += period_ms;
    }
    return out;
}

inline constexpr double kDefaultRatioThreshold = 2.0;

inline RowVerdict classify_row_by_bump(std::span<const BumpEvent> events, double ratio_threshold = kDefaultRatioThreshold) {
    if (events.empty()) throw Error(Errc::EmptyEvidence, "no bump events");
    std::size_t back = 0;
    for (const auto& e : events)
        if (e.ratio >= ratio_threshold) ++back;
    const std::size_t front = events.size() - back;
    RowVerdict v;
    v.source = RowSource::Bump;
    v.row = back > front ? Row::Back : Row::Front;
    v.confidence = static_cast<double>(back > front ? back - front : front - back) / static_cast<double>(events.size());
    return v;
}

// Row precedence: a detected engine spike decides; without one, bump evidence
// decides when present; otherwise the spike search result (absent or unobserved).
inline RowVerdict resolve_row(const RowVerdict& spike, const std::optional<RowVerdict>& bump) {
    if (spike.source == RowSource::EngineSpike && spike.row == Row::Front) return spike;
    if (bump && bump->source == RowSource::Bump) return *bump;
    return spike;
}

} // namespace texive

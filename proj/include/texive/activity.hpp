#pragma once

#include "features.hpp"
#include "labels.hpp"
#include "naive_bayes.hpp"

#include <optional>
#include <span>
#include <vector>

namespace texive {

template <>
struct LabelTraits<ActivityLabel> {
    static std::string_view name(ActivityLabel l) { return label_name(l); }
    static std::optional<ActivityLabel> parse(std::string_view s) { return parse_activity_label(s); }
    static int rank(ActivityLabel l) { return label_rank(l); }
};

using ActivityModel = GaussianNaiveBayes<ActivityLabel>;
using ActivityPrediction = Prediction<ActivityLabel>;

inline ActivityModel train_activity(std::span<const std::pair<FeatureVector, ActivityLabel>> examples,
                                    double variance_floor = kVarianceFloor) {
    std::vector<ActivityModel::Example> flat;
    flat.reserve(examples.size());
    for (const auto& [fv, l] : examples) flat.emplace_back(fv.flatten(), l);
    return ActivityModel::train(flat, variance_floor);
}

inline ActivityPrediction classify(const ActivityModel& model, const FeatureVector& fv) {
    const auto x = fv.flatten();
    return model.classify(x);
}

inline ActivityModel update(const ActivityModel& model, const FeatureVector& fv, ActivityLabel label,
                            bool allow_new_class = false) {
    const auto x = fv.flatten();
    return model.update(x, label, allow_new_class);
}

struct ConfirmConfig {
    double mag_var_threshold = 1.0;     // uT^2 over the approach window
    double drive_accel_threshold = 1.0; // m/s^2 horizontal
    std::int64_t drive_min_ms = 2000;
};

// Longest run of consecutive samples whose horizontal acceleration stays above
// the threshold, measured first-to-last sample time.
inline std::int64_t sustained_horizontal_ms(std::span<const EfcSample> stream, double threshold) {
    std::int64_t best = 0;
    std::optional<std::int64_t> run_start;
    for (const auto& s : stream) {
        if (horizontal_magnitude(s) > threshold) {
            if (!run_start) run_start = s.t_ms;
            best = std::max(best, s.t_ms - *run_start);
        } else {
            run_start.reset();
        }
    }
    return best;
}

// Environment check applied after an EnteringVehicle / SittingDown candidate:
// a disturbed magnetic field near the vehicle, or the vehicle pulling away.
inline bool confirm_in_vehicle(double window_mag_var, std::span<const EfcSample> post_accel,
                               const ConfirmConfig& cfg = {}) {
    if (window_mag_var > cfg.mag_var_threshold) return true;
    return sustained_horizontal_ms(post_accel, cfg.drive_accel_threshold) >= cfg.drive_min_ms;
}

// Streaming drive detector with O(1) state, same rule as sustained_horizontal_ms.
class DriveDetector {
public:
    explicit DriveDetector(const ConfirmConfig& cfg = {}) : cfg_(cfg) {}

    bool push(std::int64_t t_ms, double horizontal) {
        if (horizontal > cfg_.drive_accel_threshold) {
            if (!run_start_) run_start_ = t_ms;
            if (t_ms - *run_start_ >= cfg_.drive_min_ms) fired_ = true;
        } else {
            run_start_.reset();
        }
        return fired_;
    }

    bool fired() const { return fired_; }
    void reset() {
        run_start_.reset();
        fired_ = false;
    }

private:
    ConfirmConfig cfg_;
    std::optional<std::int64_t> run_start_;
    bool fired_ = false;
};

// Emits a label once it has been seen on `required` consecutive windows, and
// again only after the label changes.
class ActivityLatch {
public:
    explicit ActivityLatch(int required = 2) : required_(required) {}

    std::optional<ActivityLabel> push(ActivityLabel l) {
        if (current_ && *current_ == l) {
            ++run_;
        } else {
            current_ = l;
            run_ = 1;
            emitted_ = false;
        }
        if (run_ >= required_ && !emitted_) {
            emitted_ = true;
            return l;
        }
        return std::nullopt;
    }

    void reset() {
        current_.reset();
        run_ = 0;
        emitted_ = false;
    }

private:
    int required_;
    std::optional<ActivityLabel> current_;
    int run_ = 0;
    bool emitted_ = false;
};

} // namespace texive

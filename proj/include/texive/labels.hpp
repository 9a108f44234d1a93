#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace texive {

// Canonical order doubles as the classifier tie-break order.
enum class ActivityLabel {
    Walking,
    EnteringVehicle,
    SittingDown,
    Stairs,
    Standing,
    GettingOnBus,
    Other,
};

inline constexpr std::array<ActivityLabel, 7> kAllActivityLabels = {
    ActivityLabel::Walking,  ActivityLabel::EnteringVehicle, ActivityLabel::SittingDown,
    ActivityLabel::Stairs,   ActivityLabel::Standing,        ActivityLabel::GettingOnBus,
    ActivityLabel::Other,
};

constexpr std::string_view label_name(ActivityLabel l) {
    switch (l) {
        case ActivityLabel::Walking: return "Walking";
        case ActivityLabel::EnteringVehicle: return "EnteringVehicle";
        case ActivityLabel::SittingDown: return "SittingDown";
        case ActivityLabel::Stairs: return "Stairs";
        case ActivityLabel::Standing: return "Standing";
        case ActivityLabel::GettingOnBus: return "GettingOnBus";
        case ActivityLabel::Other: return "Other";
    }
    return "Other";
}

inline std::optional<ActivityLabel> parse_activity_label(std::string_view s) {
    for (auto l : kAllActivityLabels) {
        if (label_name(l) == s) return l;
    }
    return std::nullopt;
}

constexpr int label_rank(ActivityLabel l) { return static_cast<int>(l); }

} // namespace texive

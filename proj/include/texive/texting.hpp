#pragma once

#include "error.hpp"
#include "trace_io.hpp"

#include <cmath>
#include <limits>
#include <string_view>
#include <vector>

namespace texive {

// Published per-class interval means (ms); the decision line sits midway.
inline constexpr double kNormalMeanIntervalMs = 536.55;
inline constexpr double kDistractedMeanIntervalMs = 742.42;
inline constexpr double kTextingThresholdMs = (kNormalMeanIntervalMs + kDistractedMeanIntervalMs) / 2.0;

struct TypingStats {
    double mean_interval_ms = 0;
    double sd_interval_ms = 0;
    double frac_under_800ms = 0;
    double inputs_per_typo = std::numeric_limits<double>::infinity();  // no typos -> +inf
    std::size_t n_intervals = 0;
    std::size_t n_letters = 0;
    std::size_t n_typos = 0;
};

enum class TextingClass { Normal, Distracted };

constexpr std::string_view texting_name(TextingClass c) { return c == TextingClass::Normal ? "Normal" : "Distracted"; }

struct TextingVerdict {
    TextingClass verdict = TextingClass::Normal;
    double confidence = 0;
};

struct TextingConfig {
    double threshold_ms = kTextingThresholdMs;
    double borderline_ms = 50.0;
    double typo_flip_inputs = 40.0;
    std::size_t min_intervals = 10;
    double confidence_scale_ms = 100.0;
};

// Intervals run letter-to-letter; a backspace breaks nothing in the chain but
// starts a typo, and a run of consecutive backspaces is one typo.
inline TypingStats compute_stats(const KeystrokeLog& log) {
    TypingStats st;
    std::int64_t prev_letter = 0;
    bool have_prev = false;
    bool in_backspace_run = false;
    double sum = 0, sum_sq = 0;
    std::size_t under = 0;
    std::vector<double> intervals;
    for (const auto& e : log.events) {
        if (e.kind == KeyKind::Backspace) {
            if (!in_backspace_run) ++st.n_typos;
            in_backspace_run = true;
            continue;
        }
        in_backspace_run = false;
        ++st.n_letters;
        if (have_prev) intervals.push_back(static_cast<double>(e.t_ms - prev_letter));
        prev_letter = e.t_ms;
        have_prev = true;
    }
    if (st.n_letters < 2) throw Error(Errc::TooFewEvents, "need at least 2 letter events");
    for (double d : intervals) {
        sum += d;
        if (d <= 800.0) ++under;
    }
    st.n_intervals = intervals.size();
    const double n = static_cast<double>(st.n_intervals);
    st.mean_interval_ms = sum / n;
    for (double d : intervals) sum_sq += (d - st.mean_interval_ms) * (d - st.mean_interval_ms);
    st.sd_interval_ms = std::sqrt(sum_sq / n);
    st.frac_under_800ms = static_cast<double>(under) / n;
    if (st.n_typos > 0) st.inputs_per_typo = static_cast<double>(st.n_letters) / static_cast<double>(st.n_typos);
    return st;
}

inline TextingVerdict classify_texting(const TypingStats& st, const TextingConfig& cfg = {}) {
    if (st.n_intervals < cfg.min_intervals)
        throw Error(Errc::TooFewEvents, std::to_string(st.n_intervals) + " intervals, need " + std::to_string(cfg.min_intervals));
    const double dist = st.mean_interval_ms - cfg.threshold_ms;
    TextingVerdict v;
    v.verdict = dist > 0 ? TextingClass::Distracted : TextingClass::Normal;
    v.confidence = 0.5 + 0.5 * std::tanh(std::abs(dist) / cfg.confidence_scale_ms);
    // Frequent typos tip a borderline Normal over.
    if (v.verdict == TextingClass::Normal && std::abs(dist) <= cfg.borderline_ms &&
        st.inputs_per_typo < cfg.typo_flip_inputs) {
        v.verdict = TextingClass::Distracted;
        v.confidence = 0.5;
    }
    return v;
}

} // namespace texive

#pragma once

#include "error.hpp"
#include "trace_io.hpp"

#include <cstddef>
#include <cstdio>
#include <optional>
#include <vector>
#include <string>

namespace texive {

struct MetricsReport {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    // Empty when the denominator is zero.
    std::optional<double> sensitivity, specificity, precision, accuracy;

    std::size_t total() const { return tp + fp + tn + fn; }
};

inline std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

inline MetricsReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
    MetricsReport r{tp, fp, tn, fn, {}, {}, {}, {}};
    if (r.total() == 0) throw Error(Errc::EmptyInput, "no predictions");
    r.precision = ratio(tp, tp + fp);
    r.sensitivity = ratio(tp, tp + fn);
    r.specificity = ratio(tn, tn + fp);
    r.accuracy = ratio(tp + tn, r.total());
    return r;
}

// Binary predictions against ground truth; `true` is the positive class.
inline MetricsReport compute_metrics(const std::vector<bool>& predictions, const std::vector<bool>& ground_truth) {
    if (predictions.empty()) throw Error(Errc::EmptyInput, "no predictions");
    if (predictions.size() != ground_truth.size())
        throw Error(Errc::DimensionMismatch, "prediction and ground-truth lengths differ");
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i]) (ground_truth[i] ? tp : fp) += 1;
        else (ground_truth[i] ? fn : tn) += 1;
    }
    return metrics_from_counts(tp, fp, tn, fn);
}

// Percent with two decimals, or "n/a" for an undefined rate.
inline std::string format_rate(const std::optional<double>& r) {
    if (!r) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", *r * 100.0);
    return buf;
}

} // namespace texive

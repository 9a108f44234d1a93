#pragma once

#include "error.hpp"
#include "orientation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace texive {

inline constexpr std::int64_t kDefaultWindowMs = 4500;
inline constexpr std::size_t kDefaultDctCoefficients = 20;

// Orthonormal DCT-II of a fixed length. The basis table is built once, with
// angles reduced modulo 4N before calling cos so large indices keep full precision.
class DctPlan {
public:
    explicit DctPlan(std::size_t n) : n_(n) {
        if (n == 0) throw Error(Errc::EmptySignal, "DCT of an empty signal");
        basis_.resize(n * n);
        const double s0 = std::sqrt(1.0 / static_cast<double>(n));
        const double sk = std::sqrt(2.0 / static_cast<double>(n));
        const std::size_t period = 4 * n;
        for (std::size_t k = 0; k < n; ++k) {
            const double scale = k == 0 ? s0 : sk;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t m = ((2 * i + 1) * k) % period;
                basis_[k * n + i] =
                    scale * std::cos(std::numbers::pi * static_cast<double>(m) / (2.0 * static_cast<double>(n)));
            }
        }
    }

    std::size_t size() const { return n_; }

    // First `count` coefficients only.
    void forward(std::span<const double> in, std::span<double> out) const {
        check(in.size());
        const std::size_t count = std::min(out.size(), n_);
        for (std::size_t k = 0; k < count; ++k) {
            const double* row = &basis_[k * n_];
            double acc = 0;
            for (std::size_t i = 0; i < n_; ++i) acc += row[i] * in[i];
            out[k] = acc;
        }
    }

    std::vector<double> forward(std::span<const double> in) const {
        std::vector<double> out(n_);
        forward(in, out);
        return out;
    }

    std::vector<double> inverse(std::span<const double> coeffs) const {
        check(coeffs.size());
        std::vector<double> out(n_, 0.0);
        for (std::size_t k = 0; k < n_; ++k) {
            const double* row = &basis_[k * n_];
            const double c = coeffs[k];
            for (std::size_t i = 0; i < n_; ++i) out[i] += row[i] * c;
        }
        return out;
    }

private:
    void check(std::size_t len) const {
        if (len == 0) throw Error(Errc::EmptySignal, "DCT of an empty signal");
        if (len != n_) throw Error(Errc::DimensionMismatch, "DCT plan length mismatch");
    }

    std::size_t n_;
    std::vector<double> basis_;
};

inline std::vector<double> dct(std::span<const double> signal) {
    if (signal.empty()) throw Error(Errc::EmptySignal, "DCT of an empty signal");
    return DctPlan(signal.size()).forward(signal);
}

inline std::vector<double> idct(std::span<const double> coeffs) {
    if (coeffs.empty()) throw Error(Errc::EmptySignal, "IDCT of an empty signal");
    return DctPlan(coeffs.size()).inverse(coeffs);
}

inline double horizontal_magnitude(const EfcSample& s) {
    return std::hypot(s.linear_accel.x(), s.linear_accel.y());
}

// Population (1/N) variance.
inline double variance(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double mean = 0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double acc = 0;
    for (double v : x) acc += (v - mean) * (v - mean);
    return acc / static_cast<double>(x.size());
}

struct Window {
    std::int64_t start_ms = 0;
    std::int64_t duration_ms = kDefaultWindowMs;
    std::span<const EfcSample> samples;
};

inline std::size_t window_sample_count(std::int64_t duration_ms, double rate_hz) {
    return static_cast<std::size_t>(std::llround(rate_hz * static_cast<double>(duration_ms) / 1000.0));
}

// Windows start at first_t + k * step_ms; a trailing partial window is dropped.
inline std::vector<Window> sliding_windows(std::span<const EfcSample> stream, std::int64_t duration_ms,
                                           std::int64_t step_ms, double rate_hz = kDefaultRateHz) {
    if (step_ms <= 0) throw Error(Errc::InvalidParams, "window step must be positive");
    std::vector<Window> out;
    const std::size_t n = window_sample_count(duration_ms, rate_hz);
    if (stream.empty() || n == 0) return out;
    const auto t0 = stream.front().t_ms;
    std::size_t idx = 0;
    for (std::int64_t start = t0;; start += step_ms) {
        while (idx < stream.size() && stream[idx].t_ms < start) ++idx;
        if (idx + n > stream.size()) break;
        out.push_back({stream[idx].t_ms, duration_ms, stream.subspan(idx, n)});
    }
    return out;
}

struct FeatureVector {
    std::vector<double> horiz_dct;
    std::vector<double> vert_dct;
    double horiz_var = 0;
    double vert_var = 0;
    double mag_var = 0;  // uT^2

    std::size_t size() const { return horiz_dct.size() + vert_dct.size() + 3; }

    // Flat layout: horiz_dct, vert_dct, horiz_var, vert_var, mag_var.
    std::vector<double> flatten() const {
        std::vector<double> v;
        v.reserve(size());
        v.insert(v.end(), horiz_dct.begin(), horiz_dct.end());
        v.insert(v.end(), vert_dct.begin(), vert_dct.end());
        v.push_back(horiz_var);
        v.push_back(vert_var);
        v.push_back(mag_var);
        return v;
    }

    bool operator==(const FeatureVector&) const = default;
};

// Reusable extractor: holds the DCT plan and scratch buffers for one window length.
class FeatureExtractor {
public:
    FeatureExtractor(std::size_t window_samples, std::size_t k) : plan_(window_samples), k_(k) {
        if (k > window_samples)
            throw Error(Errc::KTooLarge, "K=" + std::to_string(k) + " exceeds window of " + std::to_string(window_samples));
        horiz_.resize(window_samples);
        vert_.resize(window_samples);
        mag_.resize(window_samples);
    }

    std::size_t window_samples() const { return plan_.size(); }
    std::size_t k() const { return k_; }

    template <typename Range>
    FeatureVector extract(const Range& samples) {
        if (static_cast<std::size_t>(std::size(samples)) != plan_.size())
            throw Error(Errc::DimensionMismatch, "window length differs from extractor length");
        std::size_t i = 0;
        for (const EfcSample& s : samples) {
            horiz_[i] = horizontal_magnitude(s);
            vert_[i] = s.linear_accel.z();
            mag_[i] = s.mag.norm();
            ++i;
        }
        FeatureVector fv;
        fv.horiz_dct.resize(k_);
        fv.vert_dct.resize(k_);
        plan_.forward(horiz_, fv.horiz_dct);
        plan_.forward(vert_, fv.vert_dct);
        fv.horiz_var = variance(horiz_);
        fv.vert_var = variance(vert_);
        fv.mag_var = variance(mag_);
        return fv;
    }

    // Two scalar series (e.g. pitch and roll) in the same layout, mag_var left at 0.
    FeatureVector extract_series(std::span<const double> a, std::span<const double> b) const {
        FeatureVector fv;
        fv.horiz_dct.resize(k_);
        fv.vert_dct.resize(k_);
        plan_.forward(a, fv.horiz_dct);
        plan_.forward(b, fv.vert_dct);
        fv.horiz_var = variance(a);
        fv.vert_var = variance(b);
        return fv;
    }

private:
    DctPlan plan_;
    std::size_t k_;
    std::vector<double> horiz_, vert_, mag_;
};

inline FeatureVector extract_features(const Window& w, std::size_t k = kDefaultDctCoefficients) {
    if (w.samples.empty()) throw Error(Errc::EmptySignal, "empty window");
    if (k > w.samples.size())
        throw Error(Errc::KTooLarge, "K=" + std::to_string(k) + " exceeds window of " + std::to_string(w.samples.size()));
    FeatureExtractor fx(w.samples.size(), k);
    return fx.extract(w.samples);
}

} // namespace texive

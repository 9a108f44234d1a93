#pragma once

// Seeded synthetic corpora and the training routines built on them.

#include "activity.hpp"
#include "features.hpp"
#include "localize.hpp"
#include "orientation.hpp"
#include "pipeline.hpp"
#include "simulator.hpp"

#include <deque>
#include <map>
#include <optional>
#include <random>
#include <vector>

namespace texive {

// Filter a trace into earth-frame samples plus the estimated attitude. The
// first 0.5 s must be static; output starts right after it.
struct EfcStream {
    std::vector<EfcSample> efc;
    std::vector<EulerAngles> attitude;
};

inline EfcStream efc_stream(const Trace& trace, const EkfConfig& cfg = {}) {
    const auto n_init = static_cast<std::size_t>(std::ceil(cfg.min_init_ms * trace.nominal_rate_hz / 1000.0));
    if (trace.samples.size() <= n_init) throw Error(Errc::EmptyTrace, "trace shorter than the initialization window");
    auto st = ekf_init(std::span(trace.samples).first(n_init), cfg);
    EfcStream out;
    out.efc.reserve(trace.samples.size() - n_init);
    out.attitude.reserve(trace.samples.size() - n_init);
    for (std::size_t i = n_init; i < trace.samples.size(); ++i) {
        st = ekf_step(st, trace.samples[i], cfg);
        out.efc.push_back(to_efc(st, trace.samples[i]));
        out.attitude.push_back(to_euler(st.q));
    }
    return out;
}

struct LabeledWindow {
    std::size_t begin;  // index into the EfcStream
    ActivityLabel label;
    double coverage;
};

// Sliding windows whose samples fall inside one label span for at least
// `min_coverage` of their length.
inline std::vector<LabeledWindow> labeled_windows(const EfcStream& s, std::span<const LabelSpan> labels,
                                                  std::size_t window_samples, std::size_t step_samples,
                                                  double min_coverage = 0.8) {
    std::vector<LabeledWindow> out;
    if (s.efc.size() < window_samples) return out;
    for (std::size_t b = 0; b + window_samples <= s.efc.size(); b += step_samples) {
        const auto t0 = s.efc[b].t_ms, t1 = s.efc[b + window_samples - 1].t_ms;
        for (const auto& l : labels) {
            std::size_t inside = 0;
            for (std::size_t i = b; i < b + window_samples; ++i)
                if (s.efc[i].t_ms >= l.start_ms && s.efc[i].t_ms <= l.end_ms) ++inside;
            const double cov = static_cast<double>(inside) / static_cast<double>(window_samples);
            if (cov >= min_coverage && l.start_ms <= t1 && l.end_ms >= t0) {
                out.push_back({b, l.label, cov});
                break;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scenario builders

namespace corpus {

inline double uni(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline Scenario base_scenario(std::uint64_t seed, std::mt19937_64& rng) {
    Scenario sc;
    sc.seed = seed;
    sc.pocket = uni(rng, 0, 1) < 0.5 ? Pocket::LeftPocket : Pocket::RightPocket;
    sc.heading_deg = uni(rng, 0.0, 360.0);
    sc.standing_pitch_deg = uni(rng, 35.0, 55.0);
    sc.sitting_pitch_deg = uni(rng, 0.0, 10.0);
    return sc;
}

inline Segment seg(SegmentKind k, double d, std::mt19937_64& rng) {
    Segment s{k, d, {}};
    s.params.intensity = uni(rng, 0.85, 1.15);
    return s;
}

// One short scenario whose main segment carries `label`.
inline Scenario activity_instance(ActivityLabel label, std::uint64_t seed, int variant = 0) {
    std::mt19937_64 rng(sim::stream_seed(seed, 500 + static_cast<std::uint64_t>(label_rank(label))));
    Scenario sc = base_scenario(seed, rng);
    auto& v = sc.segments;
    v.push_back({SegmentKind::Idle, uni(rng, 1.5, 2.0), {}});
    switch (label) {
        case ActivityLabel::Walking:
            v.push_back(seg(SegmentKind::Walk, uni(rng, 7.0, 9.0), rng));
            break;
        case ActivityLabel::EnteringVehicle:
            v.push_back(seg(SegmentKind::Walk, uni(rng, 3.0, 5.0), rng));
            v.push_back(seg(uni(rng, 0, 1) < 0.5 ? SegmentKind::EnterVehicleLeft : SegmentKind::EnterVehicleRight,
                            uni(rng, 5.0, 6.0), rng));
            v.push_back({SegmentKind::Idle, 3.0, {}});
            break;
        case ActivityLabel::Stairs:
            v.push_back(seg(SegmentKind::Walk, 2.0, rng));
            v.push_back(seg(SegmentKind::Stairs, uni(rng, 7.0, 9.0), rng));
            break;
        case ActivityLabel::SittingDown:
            v.push_back(seg(SegmentKind::Walk, uni(rng, 3.0, 4.0), rng));
            v.push_back(seg(SegmentKind::SitDown, uni(rng, 3.5, 4.5), rng));
            v.push_back({SegmentKind::Idle, 3.0, {}});
            break;
        case ActivityLabel::Standing:
            v.push_back({SegmentKind::Idle, uni(rng, 6.0, 8.0), {}});
            break;
        case ActivityLabel::GettingOnBus:
            v.push_back(seg(SegmentKind::Walk, 3.0, rng));
            v.push_back(seg(SegmentKind::BusBoard, uni(rng, 8.5, 9.5), rng));
            v.push_back({SegmentKind::Idle, 2.0, {}});
            break;
        case ActivityLabel::Other: {
            const int which = variant % 3;
            if (which == 0) v.push_back(seg(SegmentKind::Run, uni(rng, 7.0, 9.0), rng));
            else if (which == 1) v.push_back(seg(SegmentKind::Jump, uni(rng, 7.0, 9.0), rng));
            else v.push_back(seg(SegmentKind::Drive, uni(rng, 10.0, 12.0), rng));
            break;
        }
    }
    return sc;
}

// Label span of the instance's main segment.
inline LabelSpan target_span(const GeneratedTrace& g, ActivityLabel label) {
    for (const auto& l : g.trace.labels)
        if (l.label == label && !(label == ActivityLabel::Standing && l.start_ms == 0)) return l;
    for (const auto& l : g.trace.labels)
        if (l.label == label) return l;
    throw Error(Errc::InvalidScenario, "instance lacks its target label");
}

// Entry scenario for the side corpus.
inline Scenario entry_instance(Side side, Pocket pocket, std::uint64_t seed) {
    std::mt19937_64 rng(sim::stream_seed(seed, 600));
    Scenario sc = base_scenario(seed, rng);
    sc.pocket = pocket;
    sc.segments.push_back({SegmentKind::Idle, uni(rng, 1.5, 2.0), {}});
    sc.segments.push_back(seg(SegmentKind::Walk, uni(rng, 3.0, 5.0), rng));
    sc.segments.push_back(seg(side == Side::Left ? SegmentKind::EnterVehicleLeft : SegmentKind::EnterVehicleRight,
                              uni(rng, 5.0, 6.0), rng));
    sc.segments.push_back({SegmentKind::Idle, 3.0, {}});
    return sc;
}

// Seated drive with bumps, for row detection from bump ratios.
inline Scenario bump_run(Seat seat, std::uint64_t seed, double bump_rate = 0.1, double drive_s = 120.0) {
    std::mt19937_64 rng(sim::stream_seed(seed, 700));
    Scenario sc = base_scenario(seed, rng);
    sc.segments.push_back({SegmentKind::Idle, 2.0, {}});
    Segment d = seg(SegmentKind::Drive, drive_s, rng);
    d.params.seat = seat;
    d.params.bump_rate = bump_rate;
    sc.segments.push_back(d);
    return sc;
}

struct DriveScenario {
    Scenario scenario;
    Side side;
    Seat seat;
    Role truth;  // for left-hand-drive
};

// Full walk, entry, engine start and drive; the spike size follows the seat.
inline DriveScenario drive_scenario(Side side, Seat seat, std::uint64_t seed, double drive_s = 60.0) {
    std::mt19937_64 rng(sim::stream_seed(seed, 800));
    DriveScenario d{base_scenario(seed, rng), side, seat,
                    side == Side::Left && seat == Seat::Front ? Role::Driver : Role::Passenger};
    auto& v = d.scenario.segments;
    v.push_back({SegmentKind::Idle, uni(rng, 1.5, 2.0), {}});
    v.push_back(seg(SegmentKind::Walk, uni(rng, 4.0, 8.0), rng));
    v.push_back(seg(side == Side::Left ? SegmentKind::EnterVehicleLeft : SegmentKind::EnterVehicleRight,
                    uni(rng, 5.0, 6.0), rng));
    v.push_back({SegmentKind::Idle, uni(rng, 2.5, 4.0), {}});
    Segment engine{SegmentKind::EngineStart, uni(rng, 2.5, 3.5), {}};
    if (seat == Seat::Front) engine.params.spike_ut = uni(rng, 0, 1) < 0.3 ? 20.0 : uni(rng, 3.0, 5.0);
    else engine.params.spike_ut = uni(rng, 0.1, 0.6);
    v.push_back(engine);
    v.push_back({SegmentKind::Idle, uni(rng, 1.0, 2.0), {}});
    Segment drive = seg(SegmentKind::Drive, drive_s, rng);
    drive.params.seat = seat;
    v.push_back(drive);
    return d;
}

// 13 drivers and 26 passengers.
inline std::vector<DriveScenario> e2e_corpus(std::uint64_t seed) {
    std::vector<DriveScenario> out;
    std::uint64_t s = seed * 1000 + 1;
    for (int i = 0; i < 13; ++i) out.push_back(drive_scenario(Side::Left, Seat::Front, s++));
    for (int i = 0; i < 9; ++i) out.push_back(drive_scenario(Side::Right, Seat::Front, s++));
    for (int i = 0; i < 9; ++i) out.push_back(drive_scenario(Side::Left, Seat::Back, s++));
    for (int i = 0; i < 8; ++i) out.push_back(drive_scenario(Side::Right, Seat::Back, s++));
    return out;
}

inline GroundTruthEvent entry_event(const GeneratedTrace& g) {
    for (const auto& e : g.events)
        if (e.kind == SegmentKind::EnterVehicleLeft || e.kind == SegmentKind::EnterVehicleRight) return e;
    throw Error(Errc::InvalidScenario, "scenario has no vehicle entry");
}

} // namespace corpus

// ---------------------------------------------------------------------------
// Training

struct TrainingConfig {
    std::int64_t window_ms = kDefaultWindowMs;
    std::int64_t step_ms = 500;
    std::size_t dct_k = kDefaultDctCoefficients;
    std::size_t per_class = 12;
    std::size_t side_per_case = 10;
};

inline std::vector<std::pair<FeatureVector, ActivityLabel>> activity_examples(const Trace& trace, std::size_t window,
                                                                              std::size_t step, std::size_t k) {
    const auto s = efc_stream(trace);
    FeatureExtractor fx(window, k);
    std::vector<std::pair<FeatureVector, ActivityLabel>> out;
    for (const auto& w : labeled_windows(s, trace.labels, window, step))
        out.emplace_back(fx.extract(std::span(s.efc).subspan(w.begin, window)), w.label);
    return out;
}

inline ActivityModel train_activity_on_corpus(std::uint64_t seed, const TrainingConfig& cfg = {}) {
    const auto window = window_sample_count(cfg.window_ms, kDefaultRateHz);
    const auto step = static_cast<std::size_t>(cfg.step_ms / sim::kPeriodMs);
    std::vector<std::pair<FeatureVector, ActivityLabel>> examples;
    std::uint64_t s = seed * 100000 + 7;
    for (auto label : kAllActivityLabels) {
        const std::size_t n = label == ActivityLabel::Other ? cfg.per_class * 3 : cfg.per_class;
        for (std::size_t i = 0; i < n; ++i) {
            const auto g = generate(corpus::activity_instance(label, s++, static_cast<int>(i)));
            for (auto& ex : activity_examples(g.trace, window, step, cfg.dct_k))
                if (ex.second == label) examples.push_back(std::move(ex));
        }
    }
    return train_activity(examples);
}

// First time after `from_ms` at which the trailing `settle_ms` of gyro
// magnitudes averages below `gyro_max`, the rule the pipeline uses to decide
// that the user has settled.
inline std::optional<std::int64_t> settle_time_ms(const Trace& trace, std::int64_t from_ms, std::int64_t settle_ms = 1000,
                                                  double gyro_max = 0.1) {
    const auto n = static_cast<std::size_t>(static_cast<double>(settle_ms) * trace.nominal_rate_hz / 1000.0);
    std::deque<double> win;
    double sum = 0;
    for (const auto& s : trace.samples) {
        win.push_back(s.gyro.norm());
        sum += win.back();
        if (win.size() > n) {
            sum -= win.front();
            win.pop_front();
        }
        if (s.t_ms >= from_ms && win.size() == n && sum / static_cast<double>(n) < gyro_max) return s.t_ms;
    }
    return std::nullopt;
}

// Side-model examples from one entry: windows ending at small offsets around
// the moment the user settles after the entry.
inline std::vector<std::vector<double>> side_examples(const GeneratedTrace& g, std::size_t window, std::size_t k,
                                                      std::span<const std::int64_t> end_offsets_ms) {
    const auto s = efc_stream(g.trace);
    const auto entry = corpus::entry_event(g);
    const auto anchor = settle_time_ms(g.trace, entry.start_ms + 2000).value_or(entry.end_ms);
    FeatureExtractor fx(window, k);
    std::vector<std::vector<double>> out;
    for (auto off : end_offsets_ms) {
        const auto t_end = anchor + off;
        std::size_t e = 0;
        while (e < s.efc.size() && s.efc[e].t_ms < t_end) ++e;
        if (e >= s.efc.size() || e + 1 < window) continue;
        const std::size_t b = e + 1 - window;
        const auto fv = fx.extract(std::span(s.efc).subspan(b, window));
        out.push_back(side_features(std::span(s.attitude).subspan(b, window), fv, fx));
    }
    return out;
}

inline constexpr std::array<std::int64_t, 4> kSideTrainOffsetsMs = {-300, 0, 300, 600};

inline SideModel train_side_on_corpus(std::uint64_t seed, const TrainingConfig& cfg = {}) {
    const auto window = window_sample_count(cfg.window_ms, kDefaultRateHz);
    std::vector<std::pair<std::vector<double>, EntryCase>> ex;
    std::uint64_t s = seed * 100000 + 50000;
    for (auto c : kAllEntryCases) {
        for (std::size_t i = 0; i < cfg.side_per_case; ++i) {
            const auto g = generate(corpus::entry_instance(case_side(c), case_pocket(c), s++));
            for (auto& x : side_examples(g, window, cfg.dct_k, kSideTrainOffsetsMs)) ex.emplace_back(std::move(x), c);
        }
    }
    return train_side_model(ex, cfg.dct_k);
}

inline Models train_models_on_corpus(std::uint64_t seed, const TrainingConfig& cfg = {}) {
    return {train_activity_on_corpus(seed, cfg), train_side_on_corpus(seed, cfg)};
}

} // namespace texive

#pragma once

// Energy scheduling: activity transition model, entry-sampling plan, and the
// duty-cycled bump detection probability / cost formulas.

#include "error.hpp"
#include "labels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace texive {

struct TransitionModel {
    std::vector<ActivityLabel> states;
    std::vector<double> initial;
    std::vector<std::vector<double>> T;  // row-stochastic

    std::size_t index_of(ActivityLabel l) const {
        for (std::size_t i = 0; i < states.size(); ++i)
            if (states[i] == l) return i;
        return states.size();
    }

    bool operator==(const TransitionModel&) const = default;
};

// The daily-routine state set and its measured initial probabilities.
inline const std::vector<ActivityLabel>& routine_states() {
    static const std::vector<ActivityLabel> s = {ActivityLabel::Walking,     ActivityLabel::EnteringVehicle,
                                                 ActivityLabel::Standing,    ActivityLabel::SittingDown,
                                                 ActivityLabel::Stairs,      ActivityLabel::Other};
    return s;
}
inline const std::vector<double>& routine_initial_probabilities() {
    static const std::vector<double> p = {0.4225, 0.1408, 0.0986, 0.1127, 0.1549, 0.0705};
    return p;
}

// Maximum-likelihood transitions with add-one smoothing; the initial vector is
// the raw first-event frequency. Labels outside `states` are ignored.
inline TransitionModel fit_transitions(std::span<const std::vector<ActivityLabel>> sequences,
                                       const std::vector<ActivityLabel>& states = routine_states()) {
    TransitionModel m;
    m.states = states;
    const std::size_t n = states.size();
    std::vector<std::vector<double>> counts(n, std::vector<double>(n, 1.0));
    std::vector<double> first(n, 0.0);
    std::size_t used = 0;
    for (const auto& seq : sequences) {
        std::vector<std::size_t> idx;
        for (auto l : seq)
            if (auto i = m.index_of(l); i < n) idx.push_back(i);
        if (idx.size() < 2) continue;
        ++used;
        first[idx.front()] += 1.0;
        for (std::size_t k = 1; k < idx.size(); ++k) counts[idx[k - 1]][idx[k]] += 1.0;
    }
    if (used == 0) throw Error(Errc::EmptyData, "no sequence with at least 2 known events");
    m.initial.resize(n);
    for (std::size_t i = 0; i < n; ++i) m.initial[i] = first[i] / static_cast<double>(used);
    m.T.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0;
        for (double c : counts[i]) row += c;
        m.T[i].resize(n);
        for (std::size_t j = 0; j < n; ++j) m.T[i][j] = counts[i][j] / row;
    }
    return m;
}

// t_i = (T - sigma) / 2^i for i = 1, 2, ... while t_i >= min_interval_s.
inline std::vector<double> plan_entry_sampling(double mean_s, double sigma_s, double min_interval_s = 0.05) {
    if (!(mean_s > sigma_s) || sigma_s < 0 || !(min_interval_s > 0))
        throw Error(Errc::InvalidParams, "need T > sigma >= 0");
    std::vector<double> out;
    double t = mean_s - sigma_s;
    for (;;) {
        t *= 0.5;
        if (t < min_interval_s) break;
        out.push_back(t);
    }
    return out;
}

struct CommuteWindow {
    double time_of_day_s = 8 * 3600.0;  // T_D
    double variance_s = 600.0;          // T_th
    double alpha = 2.0;
};

struct SamplingPlan {
    std::vector<double> intervals_s;
    std::vector<CommuteWindow> commute_windows;
    double f_commute = 1.0;          // Hz, near commute time
    double f_idle = 1.0 / 300.0;     // Hz, rest of the day
};

// Dense sampling starts at T = T_D - alpha * T_th and lasts until T_D.
inline double sampling_frequency_at(const SamplingPlan& plan, double time_of_day_s) {
    for (const auto& w : plan.commute_windows) {
        const double start = w.time_of_day_s - w.alpha * w.variance_s;
        if (time_of_day_s >= start && time_of_day_s <= w.time_of_day_s) return plan.f_commute;
    }
    return plan.f_idle;
}

// ---------------------------------------------------------------------------
// Poisson bump model

// Rate at which P(at least one bump within 50 s) = 0.8.
inline const double kDefaultBumpRate = std::log(5.0) / 50.0;

struct BumpModel {
    double lambda = kDefaultBumpRate;  // bumps per second
    double w = 10.0;                   // detection-on seconds
    double s = 50.0;                   // sleep seconds
    double C = 1.0;                    // power per unit time
};

inline double poisson_pk(double lambda, double tau, std::uint64_t k) {
    const double mu = lambda * tau;
    if (mu <= 0) return k == 0 ? 1.0 : 0.0;
    const double kd = static_cast<double>(k);
    return std::exp(-mu + kd * std::log(mu) - std::lgamma(kd + 1.0));
}

inline double detection_cycle_prob(const BumpModel& m) {
    return (1.0 - std::exp(-m.w * m.lambda)) * (m.s / (m.s + m.w));
}

inline double expected_cost(const BumpModel& m, std::uint64_t i, double t) {
    return detection_cycle_prob(m) * m.C * ((static_cast<double>(i) - 1.0) * (m.w + m.s) + t);
}

struct DutyCycleSimulation {
    double first_cycle_hit_rate = 0;   // fraction of trials whose first detection lands in cycle 1
    double mean_cycles_to_detect = 0;
    double mean_energy = 0;            // C * (on-time until detection)
    double formula_value = 0;          // detection_cycle_prob for comparison
};

// Monte-Carlo of duty-cycled detection over Poisson bump arrivals: the detector
// is on for w seconds, asleep for s, and stops at the first bump seen while on.
inline DutyCycleSimulation simulate_duty_cycle(const BumpModel& m, std::size_t trials, std::uint64_t seed,
                                               std::size_t max_cycles = 100000) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(m.lambda);
    DutyCycleSimulation out;
    std::size_t first_hits = 0;
    double cycles_sum = 0, energy_sum = 0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        double t = gap(rng);
        std::size_t cycle = 0;
        const double period = m.w + m.s;
        for (;; t += gap(rng)) {
            cycle = static_cast<std::size_t>(t / period);
            const double phase = t - static_cast<double>(cycle) * period;
            if (phase < m.w || cycle >= max_cycles) {
                const double on_time = static_cast<double>(cycle) * m.w + std::min(phase, m.w);
                energy_sum += m.C * on_time;
                break;
            }
        }
        if (cycle == 0) ++first_hits;
        cycles_sum += static_cast<double>(cycle + 1);
    }
    out.first_cycle_hit_rate = static_cast<double>(first_hits) / static_cast<double>(trials);
    out.mean_cycles_to_detect = cycles_sum / static_cast<double>(trials);
    out.mean_energy = energy_sum / static_cast<double>(trials);
    out.formula_value = detection_cycle_prob(m);
    return out;
}

} // namespace texive

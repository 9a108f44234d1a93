#include "oracles.hpp"

#include <texive/scheduler.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace texive;

TEST(PoissonPk, MatchesRecurrence) {
    for (double lambda : {0.002, 0.032, 0.2}) {
        for (double tau : {1.0, 50.0, 100.0}) {
            for (std::uint64_t k = 0; k <= 40; ++k) {
                const auto want = oracle::poisson_recurrence(static_cast<long double>(lambda) * tau, k);
                if (want < 1e-300L) continue;
                EXPECT_NEAR(poisson_pk(lambda, tau, k) / static_cast<double>(want), 1.0, 1e-12) << lambda << " " << tau << " " << k;
            }
        }
    }
}

TEST(PoissonPk, MassSumsToOne) {
    double total = 0;
    for (std::uint64_t k = 0; k < 200; ++k) total += poisson_pk(0.032, 50, k);
    EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(PoissonPk, LargeKStaysFinite) {
    const double p = poisson_pk(1.0, 1000.0, 1000);
    EXPECT_TRUE(std::isfinite(p));
    EXPECT_NEAR(p, 0.0126146, 1e-6);  // roughly 1 / sqrt(2 pi 1000)
    EXPECT_EQ(poisson_pk(0.0, 10.0, 0), 1.0);
    EXPECT_EQ(poisson_pk(0.0, 10.0, 3), 0.0);
}

TEST(PoissonPk, AtLeastOneBumpIn50s) {
    EXPECT_NEAR(1 - poisson_pk(0.02, 50, 0), 1 - std::exp(-1.0), 1e-12);
    EXPECT_NEAR(1 - poisson_pk(kDefaultBumpRate, 50, 0), 0.8, 1e-12);
    EXPECT_NEAR(1 - poisson_pk(0.032, 50, 0), 0.798, 1e-3);
}

TEST(DetectionCycle, DirectArithmetic) {
    BumpModel m;
    m.lambda = 0.032;
    const double p = detection_cycle_prob(m);
    EXPECT_NEAR(p, (1 - std::exp(-0.32)) * 50.0 / 60.0, 1e-15);
    EXPECT_NEAR(p, 0.2282, 1e-4);
    EXPECT_NEAR(expected_cost(m, 3, 4.0), p * (2 * 60.0 + 4.0), 1e-12);
    EXPECT_NEAR(expected_cost(m, 1, 0.0), 0.0, 1e-15);
}

TEST(DetectionCycle, MonteCarloFirstCycleHit) {
    // The simulated first-cycle hit rate is 1 - exp(-w lambda), without the
    // s / (s + w) factor; the formula value is reported alongside.
    BumpModel m;
    const auto sim = simulate_duty_cycle(m, 20000, 42);
    const double hit = 1 - std::exp(-m.w * m.lambda);
    EXPECT_NEAR(sim.first_cycle_hit_rate, hit, 0.015);
    EXPECT_DOUBLE_EQ(sim.formula_value, detection_cycle_prob(m));
    EXPECT_GT(sim.mean_cycles_to_detect, 1.0);
}

TEST(SamplingPlan, HalvingSequence) {
    const auto p = plan_entry_sampling(100, 20);
    ASSERT_GE(p.size(), 5u);
    EXPECT_EQ(p[0], 40);
    EXPECT_EQ(p[1], 20);
    EXPECT_EQ(p[2], 10);
    EXPECT_EQ(p[3], 5);
    EXPECT_EQ(p[4], 2.5);
    EXPECT_GE(p.back(), 0.05);
    EXPECT_LT(p.back() / 2, 0.05);
}

TEST(SamplingPlan, RandomParametersKeepRatioHalf) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double T = 1 + 5000 * u(rng), sigma = T * 0.99 * u(rng);
        const auto p = plan_entry_sampling(T, sigma);
        ASSERT_FALSE(p.empty());
        EXPECT_EQ(p[0], (T - sigma) * 0.5);
        for (std::size_t k = 1; k < p.size(); ++k) EXPECT_EQ(p[k], p[k - 1] * 0.5);
    }
}

TEST(SamplingPlan, InvalidParams) {
    EXPECT_THROW(plan_entry_sampling(10, 10), Error);
    EXPECT_THROW(plan_entry_sampling(10, -1), Error);
}

TEST(SamplingPlan, CommuteWindow) {
    SamplingPlan plan;
    plan.commute_windows.push_back({8 * 3600.0, 600.0, 2.0});
    EXPECT_EQ(sampling_frequency_at(plan, 8 * 3600.0 - 1200.0), plan.f_commute);
    EXPECT_EQ(sampling_frequency_at(plan, 8 * 3600.0), plan.f_commute);
    EXPECT_EQ(sampling_frequency_at(plan, 8 * 3600.0 - 1201.0), plan.f_idle);
    EXPECT_EQ(sampling_frequency_at(plan, 8 * 3600.0 + 1.0), plan.f_idle);
}

TEST(Transitions, RowsAreStochasticAndCountsMatch) {
    using L = ActivityLabel;
    const std::vector<std::vector<L>> seqs = {
        {L::Walking, L::EnteringVehicle, L::Other, L::Walking},
        {L::Walking, L::Standing, L::Walking, L::Stairs},
        {L::Stairs, L::Walking, L::GettingOnBus, L::Walking},  // bus is outside the state set
    };
    const auto m = fit_transitions(seqs);
    for (const auto& row : m.T) {
        double s = 0;
        for (double v : row) s += v;
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
    const auto w = m.index_of(L::Walking), e = m.index_of(L::EnteringVehicle);
    // Walking row: 6 pseudo-counts + W->E, W->S, W->Stairs, W->W (bus skipped).
    EXPECT_NEAR(m.T[w][e], 2.0 / 10.0, 1e-12);
    EXPECT_NEAR(m.initial[w], 2.0 / 3.0, 1e-12);
    EXPECT_THROW(fit_transitions(std::vector<std::vector<L>>{{L::Walking}}), Error);
}

TEST(Transitions, RoutinePriorsSumToOne) {
    double s = 0;
    for (double p : routine_initial_probabilities()) s += p;
    EXPECT_NEAR(s, 1.0, 1e-12);
    EXPECT_EQ(routine_states().size(), routine_initial_probabilities().size());
}

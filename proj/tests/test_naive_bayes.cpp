#include "oracles.hpp"

#include <texive/activity.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace texive;
using L = ActivityLabel;

namespace {

std::vector<std::pair<std::vector<double>, L>> blobs(std::uint64_t seed, int per_class, int dim) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0, 1);
    std::vector<std::pair<std::vector<double>, L>> out;
    for (auto l : {L::Walking, L::Stairs, L::Other}) {
        const double centre = 3.0 * label_rank(l);
        for (int i = 0; i < per_class; ++i) {
            std::vector<double> x(dim);
            for (auto& v : x) v = centre + nd(rng);
            out.emplace_back(std::move(x), l);
        }
    }
    return out;
}

} // namespace

TEST(NaiveBayes, PosteriorMatchesDensityProduct) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto ex = blobs(seed, 5 + static_cast<int>(seed % 4), 4);
        const auto m = ActivityModel::train(ex);
        std::mt19937_64 rng(seed + 100);
        std::uniform_real_distribution<double> u(-1, 9);
        const std::vector<double> x = {u(rng), u(rng), u(rng), u(rng)};
        const auto got = m.classify(x);
        const auto want = oracle::nb_posterior(ex, x, m.variance_floor());
        for (const auto& [l, p] : want) EXPECT_NEAR(got.posterior.of(l), static_cast<double>(p), 1e-9);
    }
}

TEST(NaiveBayes, PosteriorIsNormalizedAndCanonical) {
    const auto m = ActivityModel::train(blobs(1, 6, 3));
    const double c = 3.0 * label_rank(L::Stairs);
    const auto p = m.classify(std::vector<double>{c, c, c});
    double s = 0;
    for (const auto& [l, v] : p.posterior.probs) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
    ASSERT_EQ(p.posterior.probs.size(), 3u);
    EXPECT_EQ(p.posterior.probs[0].first, L::Walking);
    EXPECT_EQ(p.label, L::Stairs);
}

TEST(NaiveBayes, StreamingMatchesBatch) {
    const auto all = blobs(5, 10, 5);
    std::vector<std::pair<std::vector<double>, L>> head, tail;
    std::map<L, int> seen;
    for (const auto& e : all) (seen[e.second]++ < 2 ? head : tail).push_back(e);
    auto streamed = ActivityModel::train(head);
    for (const auto& [x, l] : tail) streamed = streamed.update(x, l);
    const auto batch = ActivityModel::train(all);
    ASSERT_EQ(batch.classes().size(), streamed.classes().size());
    for (std::size_t c = 0; c < batch.classes().size(); ++c) {
        EXPECT_EQ(batch.classes()[c].count, streamed.classes()[c].count);
        EXPECT_NEAR(batch.classes()[c].prior, streamed.classes()[c].prior, 1e-15);
        for (std::size_t d = 0; d < 5; ++d) {
            EXPECT_NEAR(batch.classes()[c].mean[d], streamed.classes()[c].mean[d], 1e-12);
            EXPECT_NEAR(batch.variance(c, d), streamed.variance(c, d), 1e-12);
        }
    }
}

TEST(NaiveBayes, UpdateLeavesOriginalUntouched) {
    const auto m = ActivityModel::train(blobs(2, 4, 2));
    const auto copy = m;
    const auto m2 = m.update(std::vector<double>{0, 0}, L::Walking);
    EXPECT_EQ(m, copy);
    EXPECT_NE(m2, m);
}

TEST(NaiveBayes, NewClassNeedsPermission) {
    const auto m = ActivityModel::train(blobs(3, 4, 2));
    EXPECT_THROW(m.update(std::vector<double>{1, 1}, L::Standing), Error);
    const auto m2 = m.update(std::vector<double>{1, 1}, L::Standing, true);
    ASSERT_EQ(m2.classes().size(), 4u);
    // Canonical order puts Standing between Stairs and Other.
    for (std::size_t i = 1; i < m2.classes().size(); ++i)
        EXPECT_LT(label_rank(m2.classes()[i - 1].label), label_rank(m2.classes()[i].label));
}

TEST(NaiveBayes, ZeroVarianceUsesFloor) {
    std::vector<std::pair<std::vector<double>, L>> ex = {
        {{1.0}, L::Walking}, {{1.0}, L::Walking}, {{2.0}, L::Other}, {{2.0}, L::Other}};
    const auto m = ActivityModel::train(ex, 1e-4);
    EXPECT_EQ(m.variance(0, 0), 1e-4);
    const auto p = m.classify(std::vector<double>{1.0});
    EXPECT_EQ(p.label, L::Walking);
    EXPECT_TRUE(std::isfinite(p.posterior.of(L::Other)));
}

TEST(NaiveBayes, Errors) {
    auto code = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::EmptyInput;
    };
    std::vector<std::pair<std::vector<double>, L>> one_class = {{{1.0}, L::Walking}, {{2.0}, L::Walking}};
    EXPECT_EQ(code([&] { ActivityModel::train(one_class); }), Errc::InsufficientExamples);
    std::vector<std::pair<std::vector<double>, L>> singleton = {{{1.0}, L::Walking}, {{2.0}, L::Walking}, {{3.0}, L::Other}};
    EXPECT_EQ(code([&] { ActivityModel::train(singleton); }), Errc::InsufficientExamples);
    std::vector<std::pair<std::vector<double>, L>> ragged = {{{1.0}, L::Walking}, {{2.0, 1.0}, L::Other}};
    EXPECT_EQ(code([&] { ActivityModel::train(ragged); }), Errc::DimensionMismatch);
    const auto m = ActivityModel::train(blobs(4, 3, 2));
    EXPECT_EQ(code([&] { m.classify(std::vector<double>{1.0}); }), Errc::DimensionMismatch);
    EXPECT_EQ(code([] { ActivityModel{}.classify(std::vector<double>{1.0}); }), Errc::ModelNotTrained);
}

TEST(ActivityLatch, NeedsConsecutiveWindows) {
    ActivityLatch latch(2);
    EXPECT_FALSE(latch.push(L::Walking));
    EXPECT_EQ(latch.push(L::Walking), L::Walking);
    EXPECT_FALSE(latch.push(L::Walking));
    EXPECT_FALSE(latch.push(L::EnteringVehicle));
    EXPECT_FALSE(latch.push(L::Walking));
    EXPECT_FALSE(latch.push(L::EnteringVehicle));
    EXPECT_EQ(latch.push(L::EnteringVehicle), L::EnteringVehicle);
}

TEST(Confirmation, MagneticOrDriving) {
    EXPECT_TRUE(confirm_in_vehicle(1.5, {}));
    EXPECT_FALSE(confirm_in_vehicle(0.5, {}));
    std::vector<EfcSample> drive(60);
    for (std::size_t i = 0; i < drive.size(); ++i) {
        drive[i].t_ms = static_cast<std::int64_t>(i) * 50;
        drive[i].linear_accel = Vec3(1.2, 0.5, 0);
    }
    EXPECT_EQ(sustained_horizontal_ms(drive, 1.0), 2950);
    EXPECT_TRUE(confirm_in_vehicle(0.5, drive));
    drive[30].linear_accel = Vec3::Zero();
    EXPECT_FALSE(confirm_in_vehicle(0.5, drive));
}

TEST(DriveDetector, AgreesWithBatchRule) {
    DriveDetector det;
    std::vector<EfcSample> s(100);
    bool fired_after_2s = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i].t_ms = static_cast<std::int64_t>(i) * 50;
        s[i].linear_accel = Vec3(i >= 20 ? 1.5 : 0.2, 0, 0);
        det.push(s[i].t_ms, horizontal_magnitude(s[i]));
        // The run starts at 1000 ms and must last 2000 ms.
        if (i == 59) {
            EXPECT_FALSE(det.fired());
        }
        if (i == 60) fired_after_2s = det.fired();
    }
    EXPECT_TRUE(fired_after_2s);
    EXPECT_GE(sustained_horizontal_ms(s, 1.0), 2000);
}

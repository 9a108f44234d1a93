#include "oracles.hpp"

#include <texive/features.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace texive;

namespace {

std::vector<double> random_signal(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0, 2);
    std::vector<double> x(n);
    for (auto& v : x) v = nd(rng);
    return x;
}

std::vector<EfcSample> stream_of(std::size_t n, std::int64_t period = 50) {
    std::vector<EfcSample> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i].t_ms = static_cast<std::int64_t>(i) * period;
        s[i].linear_accel = Vec3(std::sin(0.3 * i), std::cos(0.2 * i), 0.1 * std::sin(0.7 * i));
        s[i].mag = Vec3(30, 0, 40 + 0.5 * std::sin(0.05 * i));
    }
    return s;
}

} // namespace

class DctOracle : public ::testing::TestWithParam<std::size_t> {};

TEST_P(DctOracle, MatchesDirectSum) {
    const std::size_t n = GetParam();
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto x = random_signal(n, seed * 31 + n);
        const auto got = dct(x);
        const auto want = oracle::dct_direct(x);
        for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(got[k], static_cast<double>(want[k]), 1e-9) << "k=" << k;
    }
}

TEST_P(DctOracle, InverseRecoversSignal) {
    const auto x = random_signal(GetParam(), 7);
    const auto back = idct(dct(x));
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back[i], x[i], 1e-10);
}

TEST_P(DctOracle, Parseval) {
    const auto x = random_signal(GetParam(), 9);
    const auto c = dct(x);
    double ex = 0, ec = 0;
    for (double v : x) ex += v * v;
    for (double v : c) ec += v * v;
    EXPECT_NEAR(ec / ex, 1.0, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Lengths, DctOracle, ::testing::Values(1, 2, 16, 64, 90, 256));

TEST(Dct, ConstantSignalHasOnlyDc) {
    const std::vector<double> x(90, 3.0);
    const auto c = dct(x);
    EXPECT_NEAR(c[0], 3.0 * std::sqrt(90.0), 1e-12);
    for (std::size_t k = 1; k < c.size(); ++k) EXPECT_NEAR(c[k], 0.0, 1e-12);
}

TEST(Dct, EmptyThrows) {
    EXPECT_THROW(dct(std::vector<double>{}), Error);
    EXPECT_THROW(DctPlan(0), Error);
}

TEST(Variance, MatchesWelford) {
    const auto x = random_signal(500, 3);
    double mean = 0, m2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - mean;
        mean += d / static_cast<double>(i + 1);
        m2 += d * (x[i] - mean);
    }
    EXPECT_NEAR(variance(x), m2 / static_cast<double>(x.size()), 1e-12);
    EXPECT_EQ(variance(std::vector<double>{}), 0.0);
}

TEST(Windows, CountAndStartTimes) {
    const auto s = stream_of(200);
    const auto w = sliding_windows(s, 4500, 500);
    // 90-sample windows, step of 10 samples over 200 samples.
    ASSERT_EQ(w.size(), 12u);
    for (std::size_t i = 0; i < w.size(); ++i) {
        EXPECT_EQ(w[i].start_ms, static_cast<std::int64_t>(i) * 500);
        EXPECT_EQ(w[i].samples.size(), 90u);
    }
    EXPECT_THROW(sliding_windows(s, 4500, 0), Error);
    EXPECT_TRUE(sliding_windows(stream_of(50), 4500, 500).empty());
}

TEST(Features, LayoutAndValues) {
    const auto s = stream_of(90);
    FeatureExtractor fx(90, 20);
    const auto fv = fx.extract(s);
    ASSERT_EQ(fv.horiz_dct.size(), 20u);
    ASSERT_EQ(fv.flatten().size(), 43u);

    std::vector<double> h(90), v(90), m(90);
    for (std::size_t i = 0; i < 90; ++i) {
        h[i] = std::hypot(s[i].linear_accel.x(), s[i].linear_accel.y());
        v[i] = s[i].linear_accel.z();
        m[i] = s[i].mag.norm();
    }
    const auto hd = oracle::dct_direct(h);
    for (std::size_t k = 0; k < 20; ++k) EXPECT_NEAR(fv.horiz_dct[k], static_cast<double>(hd[k]), 1e-9);
    EXPECT_NEAR(fv.vert_var, variance(v), 1e-15);
    EXPECT_NEAR(fv.mag_var, variance(m), 1e-15);
    EXPECT_EQ(fv.flatten().back(), fv.mag_var);
}

TEST(Features, HeadingInvariance) {
    // Horizontal magnitude ignores which way the user faces.
    auto s = stream_of(90);
    auto r = s;
    const double c = std::cos(1.1), sn = std::sin(1.1);
    for (auto& e : r) {
        const Vec3 a = e.linear_accel;
        e.linear_accel = Vec3(c * a.x() - sn * a.y(), sn * a.x() + c * a.y(), a.z());
    }
    FeatureExtractor fx(90, 20);
    const auto a = fx.extract(s).flatten();
    const auto b = fx.extract(r).flatten();
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
}

TEST(Features, KTooLargeAndLengthMismatch) {
    EXPECT_THROW(FeatureExtractor(10, 11), Error);
    try {
        FeatureExtractor(10, 11);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::KTooLarge);
    }
    FeatureExtractor fx(90, 20);
    EXPECT_THROW(fx.extract(stream_of(89)), Error);
}

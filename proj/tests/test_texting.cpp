#include <texive/simulator.hpp>
#include <texive/texting.hpp>

#include <gtest/gtest.h>

using namespace texive;

namespace {

KeystrokeLog letters_at(std::initializer_list<std::int64_t> ts) {
    KeystrokeLog log;
    for (auto t : ts) log.events.push_back({t, KeyKind::Letter});
    return log;
}

} // namespace

TEST(TypingStats, HandComputed) {
    auto log = letters_at({0, 400, 1300, 1800});
    log.events.insert(log.events.begin() + 2, {{900, KeyKind::Backspace}, {950, KeyKind::Backspace}});
    const auto st = compute_stats(log);
    EXPECT_EQ(st.n_letters, 4u);
    EXPECT_EQ(st.n_intervals, 3u);
    EXPECT_EQ(st.n_typos, 1u);  // consecutive backspaces count once
    EXPECT_NEAR(st.mean_interval_ms, 600.0, 1e-12);
    EXPECT_NEAR(st.sd_interval_ms, std::sqrt((200.0 * 200 + 300.0 * 300 + 100.0 * 100) / 3), 1e-9);
    EXPECT_NEAR(st.frac_under_800ms, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(st.inputs_per_typo, 4.0, 1e-12);
}

TEST(TypingStats, NoTyposGivesInfinity) {
    const auto st = compute_stats(letters_at({0, 100, 200}));
    EXPECT_TRUE(std::isinf(st.inputs_per_typo));
    EXPECT_THROW(compute_stats(letters_at({5})), Error);
}

TEST(Texting, ThresholdIsMidpoint) {
    EXPECT_NEAR(kTextingThresholdMs, 639.485, 1e-9);
    TypingStats st;
    st.n_intervals = 20;
    st.mean_interval_ms = 600;
    EXPECT_EQ(classify_texting(st).verdict, TextingClass::Normal);
    st.mean_interval_ms = 700;
    EXPECT_EQ(classify_texting(st).verdict, TextingClass::Distracted);
}

TEST(Texting, TyposTipBorderlineCases) {
    TypingStats st;
    st.n_intervals = 20;
    st.mean_interval_ms = kTextingThresholdMs - 30;
    st.inputs_per_typo = 20;
    EXPECT_EQ(classify_texting(st).verdict, TextingClass::Distracted);
    st.inputs_per_typo = 60;
    EXPECT_EQ(classify_texting(st).verdict, TextingClass::Normal);
    st.mean_interval_ms = kTextingThresholdMs - 80;
    st.inputs_per_typo = 20;
    EXPECT_EQ(classify_texting(st).verdict, TextingClass::Normal);
}

TEST(Texting, TooFewIntervals) {
    TypingStats st;
    st.n_intervals = 3;
    try {
        classify_texting(st);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::TooFewEvents);
    }
}

TEST(Texting, ConfidenceGrowsWithDistance) {
    TypingStats st;
    st.n_intervals = 20;
    st.mean_interval_ms = 650;
    const double near = classify_texting(st).confidence;
    st.mean_interval_ms = 900;
    const double far = classify_texting(st).confidence;
    EXPECT_GT(far, near);
    EXPECT_LE(far, 1.0);
    EXPECT_GE(near, 0.5);
}

TEST(Mixture, MomentsAreExact) {
    for (const auto& [mix, mean, sd] : {std::tuple{normal_typing_mixture(), 536.55, 327.03},
                                        std::tuple{distracted_typing_mixture(), 742.42, 528.68}}) {
        const double m = mix.p * mix.m1 + (1 - mix.p) * mix.m2;
        const double second = mix.p * (mix.s1 * mix.s1 + mix.m1 * mix.m1) + (1 - mix.p) * (mix.s2 * mix.s2 + mix.m2 * mix.m2);
        EXPECT_NEAR(m, mean, 1e-9);
        EXPECT_NEAR(std::sqrt(second - m * m), sd, 1e-9);
    }
}

TEST(Generator, LargeSampleStatistics) {
    const auto n = compute_stats(generate_keystrokes(TextingClass::Normal, 10001, 1));
    const auto d = compute_stats(generate_keystrokes(TextingClass::Distracted, 10001, 2));
    EXPECT_NEAR(n.mean_interval_ms / 536.55, 1.0, 0.03);
    EXPECT_NEAR(d.mean_interval_ms / 742.42, 1.0, 0.03);
    EXPECT_NEAR(n.frac_under_800ms, 0.9, 0.03);
    EXPECT_LT(d.frac_under_800ms, 0.7);
    EXPECT_NEAR(n.inputs_per_typo, 50, 10);
    EXPECT_NEAR(d.inputs_per_typo, 30, 6);
}

TEST(Generator, DeterministicAndOrdered) {
    const auto a = generate_keystrokes(TextingClass::Distracted, 200, 9, 1000);
    EXPECT_EQ(a, generate_keystrokes(TextingClass::Distracted, 200, 9, 1000));
    EXPECT_NE(a, generate_keystrokes(TextingClass::Distracted, 200, 10, 1000));
    EXPECT_EQ(a.events.front().t_ms, 1000);
    for (std::size_t i = 1; i < a.events.size(); ++i) EXPECT_GE(a.events[i].t_ms, a.events[i - 1].t_ms);
}

TEST(Generator, TwentyCaseCorpus) {
    int errors = 0;
    for (int i = 0; i < 20; ++i) {
        const auto cls = i < 8 ? TextingClass::Normal : TextingClass::Distracted;
        errors += classify_texting(compute_stats(generate_keystrokes(cls, 80, 500 + i))).verdict != cls;
    }
    EXPECT_LE(errors, 2);
}

#include <texive/trace_io.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace texive;

namespace {

Trace small_trace() {
    Trace t;
    for (int i = 0; i < 5; ++i) {
        SensorSample s;
        s.t_ms = i * 50;
        s.accel = Vec3(0.1 * i, -0.2, 9.80665);
        s.mag = Vec3(30, 1.0 / 3.0, 40);
        s.gyro = Vec3(1e-17, 0, -0.5 * i);
        t.samples.push_back(s);
    }
    t.labels.push_back({0, 100, ActivityLabel::Walking});
    t.labels.push_back({100, 200, ActivityLabel::EnteringVehicle});
    return t;
}

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return Errc::EmptyInput;
}

} // namespace

TEST(TraceIo, CsvRoundTripIsExact) {
    const auto t = small_trace();
    const auto text = serialize_trace(t, TraceFormat::Csv);
    EXPECT_EQ(parse_trace(text, TraceFormat::Csv), t);
    EXPECT_EQ(serialize_trace(parse_trace(text, TraceFormat::Csv), TraceFormat::Csv), text);
}

TEST(TraceIo, JsonlRoundTripIsExact) {
    const auto t = small_trace();
    const auto text = serialize_trace(t, TraceFormat::Jsonl);
    EXPECT_EQ(parse_trace(text, TraceFormat::Jsonl), t);
}

TEST(TraceIo, CsvAndJsonlAgree) {
    const auto t = small_trace();
    EXPECT_EQ(parse_trace_csv(serialize_trace_csv(t)), parse_trace_jsonl(serialize_trace_jsonl(t)));
}

TEST(TraceIo, RejectsMissingHeader) {
    EXPECT_EQ(code_of([] { parse_trace_csv("0,1,2,3,4,5,6,7,8,9\n"); }), Errc::MalformedRecord);
}

TEST(TraceIo, RejectsShortRowWithLineNumber) {
    const std::string text = std::string(kTraceCsvHeader) + "\n0,1,2,3,4,5,6,7,8,9\n50,1,2,3\n";
    try {
        parse_trace_csv(text);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::MalformedRecord);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(TraceIo, RejectsNonMonotonicTime) {
    const std::string text = std::string(kTraceCsvHeader) + "\n50,0,0,9.8,30,0,40,0,0,0\n50,0,0,9.8,30,0,40,0,0,0\n";
    EXPECT_EQ(code_of([&] { parse_trace_csv(text); }), Errc::NonMonotonicTimestamp);
}

TEST(TraceIo, RejectsNonFinite) {
    const std::string text = std::string(kTraceCsvHeader) + "\n0,nan,0,9.8,30,0,40,0,0,0\n";
    EXPECT_EQ(code_of([&] { parse_trace_csv(text); }), Errc::NonFiniteValue);
    EXPECT_EQ(code_of([] { parse_trace_jsonl(R"({"t_ms":0,"accel":[null,0,9.8],"mag":[30,0,40],"gyro":[0,0,0]})"); }),
              Errc::NonFiniteValue);
}

TEST(TraceIo, RejectsBadJson) {
    EXPECT_EQ(code_of([] { parse_trace_jsonl("{\"t_ms\": 0, \"accel\": [1,2]"); }), Errc::MalformedRecord);
    EXPECT_EQ(code_of([] { parse_trace_jsonl(R"({"t_ms":0,"accel":[0,0],"mag":[30,0,40],"gyro":[0,0,0]})"); }),
              Errc::MalformedRecord);
}

TEST(TraceIo, RejectsLabelOutsideTrace) {
    auto t = small_trace();
    t.labels.push_back({150, 900, ActivityLabel::Other});
    EXPECT_EQ(code_of([&] { validate_trace(t); }), Errc::MalformedRecord);
}

TEST(TraceIo, ResampleIsIdentityOnItsOwnGrid) {
    const auto t = small_trace();
    const auto r = resample(t, 20.0);
    ASSERT_EQ(r.samples.size(), t.samples.size());
    EXPECT_EQ(r.samples, t.samples);
}

TEST(TraceIo, ResampleInterpolatesLinearly) {
    Trace t;
    SensorSample a, b;
    a.t_ms = 0;
    b.t_ms = 100;
    a.accel = Vec3(0, 0, 0);
    b.accel = Vec3(10, -10, 4);
    t.samples = {a, b};
    const auto r = resample(t, 40.0);  // 25 ms grid
    ASSERT_EQ(r.samples.size(), 5u);
    EXPECT_DOUBLE_EQ(r.samples[1].accel.x(), 2.5);
    EXPECT_DOUBLE_EQ(r.samples[3].accel.y(), -7.5);
    EXPECT_DOUBLE_EQ(r.samples[2].accel.z(), 2.0);
    EXPECT_EQ(r.nominal_rate_hz, 40.0);
}

TEST(TraceIo, ResampleNeedsTwoSamples) {
    Trace t;
    t.samples.push_back({});
    EXPECT_EQ(code_of([&] { resample(t, 10); }), Errc::EmptyTrace);
    EXPECT_EQ(code_of([] { grid_period_ms(0); }), Errc::InvalidParams);
}

TEST(Keystrokes, RoundTrip) {
    KeystrokeLog log;
    log.events = {{0, KeyKind::Letter}, {300, KeyKind::Letter}, {450, KeyKind::Backspace}, {700, KeyKind::Letter}};
    EXPECT_EQ(parse_keystrokes(serialize_keystrokes(log)), log);
}

TEST(Keystrokes, RejectsUnknownKindAndBackwardsTime) {
    const std::string h(kKeystrokeCsvHeader);
    EXPECT_EQ(code_of([&] { parse_keystrokes(h + "\n0,enter\n"); }), Errc::MalformedRecord);
    EXPECT_EQ(code_of([&] { parse_keystrokes(h + "\n10,letter\n5,letter\n"); }), Errc::NonMonotonicTimestamp);
}

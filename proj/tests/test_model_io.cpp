#include <texive/corpus.hpp>
#include <texive/model_io.hpp>

#include <gtest/gtest.h>

using namespace texive;

namespace {

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::EmptyInput;
}

} // namespace

TEST(ModelIo, BundleRoundTripIsExact) {
    ModelBundle b;
    const auto m = train_models_on_corpus(2);
    b.activity = m.activity;
    b.side = m.side;
    using L = ActivityLabel;
    const std::vector<std::vector<L>> seqs = {{L::Walking, L::EnteringVehicle, L::Other}, {L::Stairs, L::Walking}};
    b.transitions = fit_transitions(seqs);
    b.scenario = corpus::drive_scenario(Side::Right, Seat::Back, 3).scenario;
    b.window_ms = 4000;
    b.dct_k = 12;
    const auto text = serialize_bundle(b);
    const auto back = parse_bundle(text);
    EXPECT_EQ(back, b);
    EXPECT_EQ(serialize_bundle(back), text);
}

TEST(ModelIo, ActivityOnlyWrapper) {
    const auto m = train_activity_on_corpus(3);
    EXPECT_EQ(parse_model(serialize_model(m)), m);
    EXPECT_EQ(code_of([] { parse_model(serialize_scenario(corpus::bump_run(Seat::Front, 1))); }), Errc::ModelNotTrained);
}

TEST(ModelIo, ScenarioRoundTrip) {
    const auto sc = corpus::activity_instance(ActivityLabel::GettingOnBus, 77);
    EXPECT_EQ(parse_scenario(serialize_scenario(sc)), sc);
}

TEST(ModelIo, VersionTag) {
    const auto text = serialize_model(train_activity_on_corpus(4));
    EXPECT_EQ(text.rfind(std::string(kModelVersionTag), 0), 0u);
    std::string wrong = text;
    wrong.replace(0, kModelVersionTag.size(), "texive-model/2");
    EXPECT_EQ(code_of([&] { parse_model(wrong); }), Errc::SchemaVersionMismatch);
    EXPECT_EQ(code_of([] { parse_model("activity {\n}\n"); }), Errc::MalformedRecord);
}

TEST(ModelIo, ScenarioTextIsValidated) {
    const std::string bad = std::string(kModelVersionTag) +
                            "\nscenario {\n  seed 1\n  segment EnterVehicleLeft {\n    duration_s 1\n  }\n}\n";
    EXPECT_EQ(code_of([&] { parse_scenario(bad); }), Errc::InvalidScenario);
    const std::string unknown = std::string(kModelVersionTag) + "\nscenario {\n  segment Swim {\n    duration_s 5\n  }\n}\n";
    EXPECT_EQ(code_of([&] { parse_scenario(unknown); }), Errc::InvalidScenario);
}

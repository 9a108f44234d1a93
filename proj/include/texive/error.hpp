#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace texive {

enum class Errc {
    MalformedRecord,
    NonMonotonicTimestamp,
    NonFiniteValue,
    EmptyTrace,
    SchemaVersionMismatch,
    NotStatic,
    NonIncreasingTime,
    EmptySignal,
    KTooLarge,
    InsufficientExamples,
    DimensionMismatch,
    ModelNotTrained,
    EmptyEvidence,
    TooFewEvents,
    EmptyData,
    InvalidParams,
    InvalidScenario,
    NoEntryEvidence,
    EmptyInput,
};

constexpr std::string_view errc_name(Errc e) {
    switch (e) {
        case Errc::MalformedRecord: return "MalformedRecord";
        case Errc::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
        case Errc::NonFiniteValue: return "NonFiniteValue";
        case Errc::EmptyTrace: return "EmptyTrace";
        case Errc::SchemaVersionMismatch: return "SchemaVersionMismatch";
        case Errc::NotStatic: return "NotStatic";
        case Errc::NonIncreasingTime: return "NonIncreasingTime";
        case Errc::EmptySignal: return "EmptySignal";
        case Errc::KTooLarge: return "KTooLarge";
        case Errc::InsufficientExamples: return "InsufficientExamples";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::ModelNotTrained: return "ModelNotTrained";
        case Errc::EmptyEvidence: return "EmptyEvidence";
        case Errc::TooFewEvents: return "TooFewEvents";
        case Errc::EmptyData: return "EmptyData";
        case Errc::InvalidParams: return "InvalidParams";
        case Errc::InvalidScenario: return "InvalidScenario";
        case Errc::NoEntryEvidence: return "NoEntryEvidence";
        case Errc::EmptyInput: return "EmptyInput";
    }
    return "Unknown";
}

// Errors that stem from a model file or a model/input mismatch, as opposed
// to malformed input data. The CLI maps these to a distinct exit code.
constexpr bool is_model_error(Errc e) {
    return e == Errc::SchemaVersionMismatch || e == Errc::InsufficientExamples ||
           e == Errc::DimensionMismatch || e == Errc::ModelNotTrained;
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace texive

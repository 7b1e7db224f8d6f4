#pragma once

#include <stdexcept>
#include <string>

namespace rfeye {

enum class ErrorCode {
    InvalidSpec,
    OutOfBounds,
    FarFieldViolation,
    NoEnergyFound,
    NoPatternFound,
    NoSignatureFound,
    AlignmentFailed,
    InsufficientRepetitions,
    DegenerateBaseline,
    EmptyArray,
    InvalidM,
    SubsetsExhausted,
    EmptyCandidates,
    ParallelBearings,
    NegativeRange,
    DimensionMismatch,
    InvalidConfig,
    Io,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::FarFieldViolation: return "FarFieldViolation";
    case ErrorCode::NoEnergyFound: return "NoEnergyFound";
    case ErrorCode::NoPatternFound: return "NoPatternFound";
    case ErrorCode::NoSignatureFound: return "NoSignatureFound";
    case ErrorCode::AlignmentFailed: return "AlignmentFailed";
    case ErrorCode::InsufficientRepetitions: return "InsufficientRepetitions";
    case ErrorCode::DegenerateBaseline: return "DegenerateBaseline";
    case ErrorCode::EmptyArray: return "EmptyArray";
    case ErrorCode::InvalidM: return "InvalidM";
    case ErrorCode::SubsetsExhausted: return "SubsetsExhausted";
    case ErrorCode::EmptyCandidates: return "EmptyCandidates";
    case ErrorCode::ParallelBearings: return "ParallelBearings";
    case ErrorCode::NegativeRange: return "NegativeRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace rfeye

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vodsim {

enum class ErrorCode {
    DisconnectedGraph,
    SelfLoop,
    DuplicateEdge,
    UnknownNode,
    EmptyTrace,
    NotANeighbor,
    MalformedClusterInfo,
    NoPath,
    BadProbeConfig,
    ZeroInverse,
    SizeMismatch,
    InvalidGop,
    NothingToEncode,
    StreamNotHeld,
    WidthMismatch,
    UnknownGop,
    MalformedPacket,
    NothingToRepair,
    InvalidConfig,
    ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::NotANeighbor: return "NotANeighbor";
    case ErrorCode::MalformedClusterInfo: return "MalformedClusterInfo";
    case ErrorCode::NoPath: return "NoPath";
    case ErrorCode::BadProbeConfig: return "BadProbeConfig";
    case ErrorCode::ZeroInverse: return "ZeroInverse";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::InvalidGop: return "InvalidGop";
    case ErrorCode::NothingToEncode: return "NothingToEncode";
    case ErrorCode::StreamNotHeld: return "StreamNotHeld";
    case ErrorCode::WidthMismatch: return "WidthMismatch";
    case ErrorCode::UnknownGop: return "UnknownGop";
    case ErrorCode::MalformedPacket: return "MalformedPacket";
    case ErrorCode::NothingToRepair: return "NothingToRepair";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

/// Every failure in the library is reported as an Error carrying a code;
/// what() is "<CodeName>: <detail>".
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace vodsim

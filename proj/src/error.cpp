#include "ecdl/error.hpp"

namespace ecdl {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DimensionError: return "DimensionError";
        case ErrorCode::ConstantColumn: return "ConstantColumn";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::DegenerateResidual: return "DegenerateResidual";
        case ErrorCode::DegenerateDf: return "DegenerateDf";
        case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
        case ErrorCode::InvalidClusterCount: return "InvalidC";
        case ErrorCode::SubsampleTooSmall: return "SubsampleTooSmall";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::SpecError: return "SpecError";
        case ErrorCode::DegenerateNoise: return "DegenerateNoise";
        case ErrorCode::ZeroSignal: return "ZeroSignal";
        case ErrorCode::NoPositives: return "NoPositives";
        case ErrorCode::ConstantMap: return "ConstantMap";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::FormatError: return "FormatError";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace ecdl

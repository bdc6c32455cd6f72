#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace ecdl {

enum class ErrorCode {
    DimensionError,
    ConstantColumn,
    InvalidArgument,
    NotConverged,
    DegenerateResidual,
    DegenerateDf,
    DisconnectedGraph,
    InvalidClusterCount,
    SubsampleTooSmall,
    EmptyInput,
    SpecError,
    DegenerateNoise,
    ZeroSignal,
    NoPositives,
    ConstantMap,
    IoError,
    FormatError,
    ConfigError,
};

const char* to_string(ErrorCode code) noexcept;

// Single exception type for the library; `code()` discriminates the failure.
// `index()` names the offending feature/column when there is one.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::optional<std::size_t> index = std::nullopt)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), index_(index) {}

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> index_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) throw Error(code, message);
}

}  // namespace ecdl

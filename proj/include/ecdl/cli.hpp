#pragma once

namespace ecdl::cli {

// Process exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kIoError = 3;
inline constexpr int kNotConverged = 4;

// Entry point behind the `ecdl` binary: simulate | infer | evaluate.
int run(int argc, const char* const* argv);

}  // namespace ecdl::cli

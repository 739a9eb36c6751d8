#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sensorprep {

enum class ErrorCode {
    Io,
    Parse,
    InvalidArgument,
    DimensionMismatch,
    ZeroVariance,
    Degenerate,
    NoConvergence,
    SchemaMismatch,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for every recoverable failure in the library. The
/// code is stable and machine-readable; the message names the offending
/// row, column or node where one exists.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace sensorprep

#include "sensorprep/error.hpp"

namespace sensorprep {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::Io: return "io";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::ZeroVariance: return "zero_variance";
    case ErrorCode::Degenerate: return "degenerate";
    case ErrorCode::NoConvergence: return "no_convergence";
    case ErrorCode::SchemaMismatch: return "schema_mismatch";
    }
    return "unknown";
}

} // namespace sensorprep

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sensorprep::cli {

/// Parses arguments (without the program name) and runs one subcommand.
/// Returns the process exit code; errors are reported on `err` as JSON.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace sensorprep::cli

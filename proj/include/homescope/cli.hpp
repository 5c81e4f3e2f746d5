#pragma once

#include <string>
#include <vector>

namespace homescope {

/// Entry point behind the homescope binary. Exit codes: 0 success, 1 input or
/// validation error (diagnostic on stderr), 2 internal failure. All outputs
/// are written atomically.
int run_subcommand(const std::vector<std::string>& argv);

/// Bundled data directory: $HOMESCOPE_DATA when set, else the build-time
/// default.
std::string default_data_dir();

} // namespace homescope

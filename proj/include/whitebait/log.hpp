#pragma once

#include <spdlog/spdlog.h>

namespace whitebait {

// Shared stderr logger. Level comes from the WHITEBAIT_LOG environment
// variable (trace, debug, info, warn, err, off); default is warn.
spdlog::logger& log();

}  // namespace whitebait

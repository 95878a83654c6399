#pragma once

#include <spdlog/spdlog.h>

namespace ccbf {

/// Library logger. Level comes from the CCBF_LOG environment variable
/// (trace, debug, info, warn, error, off); default warn.
spdlog::logger& log();

}  // namespace ccbf

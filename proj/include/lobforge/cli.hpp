#pragma once

#include <iosfwd>

namespace lobforge {

inline constexpr const char* kVersion = "0.1.0";

/// Command-line entry point. Returns 0 on success, 1 on a domain error and 2
/// on a usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lobforge

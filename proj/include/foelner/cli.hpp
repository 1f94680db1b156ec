#pragma once

namespace foelner::cli {

inline constexpr const char* kToolName = "foelner-lab";
inline constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 2 validation failure, 3 certified bound or suite
// violation, 1 unexpected error.
int run(int argc, const char* const* argv);

}  // namespace foelner::cli

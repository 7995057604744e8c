#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ctsev::cli {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

/// Runs one `ctsev` invocation. `args` excludes the program name. Normal
/// output goes to `out`, warnings and per-sample failures to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ctsev::cli

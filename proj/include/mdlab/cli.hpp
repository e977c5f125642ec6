#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mdlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Seed used when --seed is omitted.
inline constexpr unsigned long long kDefaultSeed = 20240601ull;

/// Runs one `mdlab` invocation. `args` excludes the program name. JSON goes
/// to `out`, diagnostics and usage text to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mdlab

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace solid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

// Runs one `solid` invocation. `args` excludes the program name, e.g.
// {"stats", "--in", "dialogs.jsonl"}. Data goes to `out`, diagnostics to
// `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(const std::vector<std::string>& args);

}  // namespace solid::cli

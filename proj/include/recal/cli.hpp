#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace recal::cli {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNumericError = 3;

/// Entry point behind the `recal` executable. `args` excludes the program
/// name. Commands: fit, predict, evaluate, synth, sweep. Output files are
/// written under --out via write-then-rename; nothing is left behind when a
/// command fails.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace recal::cli

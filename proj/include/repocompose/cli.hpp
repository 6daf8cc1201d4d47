#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace repocompose::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitConfigError = 2;

/// Entry point for the `repocompose` tool. `args[0]` is the program name.
int run(const std::vector<std::string>& args);

int run(int argc, char** argv);

} // namespace repocompose::cli

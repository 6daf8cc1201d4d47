#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace repocompose {

/// A `/bin/sh -c` child with piped stdin/stdout for line-oriented exchanges.
class ChildProcess {
public:
    explicit ChildProcess(const std::string& command);
    ~ChildProcess();

    ChildProcess(const ChildProcess&) = delete;
    ChildProcess& operator=(const ChildProcess&) = delete;

    /// Writes `line` plus '\n'. Returns false when the pipe is closed.
    bool write_line(std::string_view line);

    /// Blocks for one line (without the '\n'); nullopt at end of stream.
    std::optional<std::string> read_line();

    /// Closes stdin and reaps the child; returns its exit status.
    int finish();

private:
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    bool finished_ = false;
    int status_ = -1;
};

struct CommandResult {
    int exit_code = -1;
    std::string output;
};

/// Runs `command` through `/bin/sh -c`, feeding `input` on stdin and
/// capturing stdout.
CommandResult run_command(const std::string& command, std::string_view input);

} // namespace repocompose

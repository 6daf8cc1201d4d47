#include "repocompose/subprocess.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <stdexcept>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace repocompose {

namespace {

struct Pipes {
    int pid = -1;
    int to_child = -1;
    int from_child = -1;
};

Pipes spawn(const std::string& command) {
    // a closed reader must surface as EPIPE, not kill the parent
    std::signal(SIGPIPE, SIG_IGN);
    int in_pipe[2];
    int out_pipe[2];
    if (pipe(in_pipe) != 0) throw std::runtime_error("pipe() failed");
    if (pipe(out_pipe) != 0) {
        close(in_pipe[0]);
        close(in_pipe[1]);
        throw std::runtime_error("pipe() failed");
    }
    const int pid = fork();
    if (pid < 0) throw std::runtime_error("fork() failed");
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
    fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
    return {pid, in_pipe[1], out_pipe[0]};
}

int reap(int pid) {
    int status = 0;
    while (waitpid(pid, &status, 0) < 0) {
        if (errno != EINTR) return -1;
    }
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
}

} // namespace

ChildProcess::ChildProcess(const std::string& command) {
    auto p = spawn(command);
    pid_ = p.pid;
    to_child_ = p.to_child;
    from_child_ = p.from_child;
}

ChildProcess::~ChildProcess() {
    finish();
}

bool ChildProcess::write_line(std::string_view line) {
    std::string data(line);
    data += '\n';
    std::size_t written = 0;
    while (written < data.size()) {
        const ssize_t n = write(to_child_, data.data() + written, data.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        written += static_cast<std::size_t>(n);
    }
    return true;
}

std::optional<std::string> ChildProcess::read_line() {
    while (true) {
        auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        char chunk[65536];
        const ssize_t n = read(from_child_, chunk, sizeof chunk);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return std::nullopt;
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

int ChildProcess::finish() {
    if (finished_) return status_;
    finished_ = true;
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    status_ = pid_ > 0 ? reap(pid_) : -1;
    return status_;
}

CommandResult run_command(const std::string& command, std::string_view input) {
    auto p = spawn(command);
    fcntl(p.to_child, F_SETFL, fcntl(p.to_child, F_GETFL) | O_NONBLOCK);

    CommandResult result;
    std::size_t written = 0;
    if (input.empty()) {
        close(p.to_child);
        p.to_child = -1;
    }
    while (p.from_child >= 0) {
        pollfd fds[2];
        nfds_t count = 0;
        fds[count++] = {p.from_child, POLLIN, 0};
        if (p.to_child >= 0) fds[count++] = {p.to_child, POLLOUT, 0};
        if (poll(fds, count, -1) < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (count == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
            const ssize_t n = write(p.to_child, input.data() + written, input.size() - written);
            if (n > 0) written += static_cast<std::size_t>(n);
            if ((n < 0 && errno != EAGAIN && errno != EINTR) || written == input.size()) {
                close(p.to_child);
                p.to_child = -1;
            }
        }
        if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
            char chunk[65536];
            const ssize_t n = read(p.from_child, chunk, sizeof chunk);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) {
                close(p.from_child);
                p.from_child = -1;
            } else {
                result.output.append(chunk, static_cast<std::size_t>(n));
            }
        }
    }
    if (p.to_child >= 0) close(p.to_child);
    result.exit_code = reap(p.pid);
    return result;
}

} // namespace repocompose

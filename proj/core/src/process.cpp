#include "process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>

namespace esdiv::detail {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += "'";
  return out;
}

namespace {

struct Pipe {
  int fds[2] = {-1, -1};
  bool open() { return ::pipe2(fds, O_CLOEXEC) == 0; }
  void close_read() { if (fds[0] >= 0) { ::close(fds[0]); fds[0] = -1; } }
  void close_write() { if (fds[1] >= 0) { ::close(fds[1]); fds[1] = -1; } }
  ~Pipe() { close_read(); close_write(); }
};

void append_bounded(std::string& dst, const char* data, std::size_t n, std::size_t cap,
                    bool& truncated) {
  if (dst.size() >= cap) {
    truncated = truncated || n > 0;
    return;
  }
  const std::size_t take = std::min(n, cap - dst.size());
  dst.append(data, take);
  if (take < n) truncated = true;
}

}  // namespace

ProcessResult run_shell(const std::string& command, const ProcessOptions& options) {
  ProcessResult result;
  Pipe out, err;
  if (!out.open() || !err.open()) return result;

  const pid_t pid = ::fork();
  if (pid < 0) return result;
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(out.fds[1], STDOUT_FILENO);
    ::dup2(err.fds[1], STDERR_FILENO);
    const int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    if (!options.working_dir.empty() && ::chdir(options.working_dir.c_str()) != 0) _exit(127);
    if (options.memory_limit_bytes > 0) {
      rlimit lim{options.memory_limit_bytes, options.memory_limit_bytes};
      ::setrlimit(RLIMIT_AS, &lim);
    }
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  ::setpgid(pid, pid);
  result.started = true;
  out.close_write();
  err.close_write();

  const auto deadline = std::chrono::steady_clock::now() + options.timeout;
  std::array<char, 8192> buf{};
  bool stderr_truncated = false;
  bool out_open = true, err_open = true;
  while (out_open || err_open) {
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      result.timed_out = true;
      break;
    }
    pollfd fds[2];
    nfds_t n = 0;
    if (out_open) fds[n++] = {out.fds[0], POLLIN, 0};
    if (err_open) fds[n++] = {err.fds[0], POLLIN, 0};
    const int rc = ::poll(fds, n, static_cast<int>(std::min<long long>(remaining.count(), 1000)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (nfds_t i = 0; i < n; ++i) {
      if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      const ssize_t got = ::read(fds[i].fd, buf.data(), buf.size());
      const bool is_out = fds[i].fd == out.fds[0];
      if (got <= 0) {
        (is_out ? out_open : err_open) = false;
        continue;
      }
      if (is_out) {
        append_bounded(result.stdout_text, buf.data(), static_cast<std::size_t>(got),
                       options.max_output_bytes, result.stdout_truncated);
      } else {
        append_bounded(result.stderr_text, buf.data(), static_cast<std::size_t>(got),
                       options.max_output_bytes, stderr_truncated);
      }
    }
  }

  int status = 0;
  if (result.timed_out) {
    ::kill(-pid, SIGKILL);
    ::waitpid(pid, &status, 0);
    return result;
  }
  // Output closed; the child may still be running (e.g. closed its stdout).
  for (;;) {
    const pid_t w = ::waitpid(pid, &status, WNOHANG);
    if (w == pid) break;
    if (w < 0 && errno != EINTR) break;
    if (std::chrono::steady_clock::now() >= deadline) {
      result.timed_out = true;
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      return result;
    }
    ::usleep(1000);
  }
  ::kill(-pid, SIGKILL);  // reap stray grandchildren in the group
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.term_signal = WTERMSIG(status);
  }
  return result;
}

}  // namespace esdiv::detail

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>

namespace esdiv::detail {

struct ProcessResult {
  bool started = false;
  bool timed_out = false;
  int exit_code = -1;   // valid when exited normally
  int term_signal = 0;  // nonzero when killed by a signal
  std::string stdout_text;
  std::string stderr_text;
  bool stdout_truncated = false;
};

struct ProcessOptions {
  std::filesystem::path working_dir;
  std::chrono::milliseconds timeout{30000};
  std::uint64_t memory_limit_bytes = 0;  // 0 = unlimited
  std::size_t max_output_bytes = 1 << 20;
};

/// Runs `/bin/sh -c command` in its own process group, killing the group on timeout.
ProcessResult run_shell(const std::string& command, const ProcessOptions& options);

/// Single-quotes a string for /bin/sh.
std::string shell_quote(const std::string& s);

}  // namespace esdiv::detail

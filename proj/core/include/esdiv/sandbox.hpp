#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "esdiv/corpus.hpp"
#include "esdiv/extract.hpp"

namespace esdiv {

struct RunnerConfig {
  /// Shell command with `{program}` and `{input}` placeholders (paths are
  /// shell-quoted on substitution).
  std::string runner_command_template = "python3 {program} {input}";
  std::chrono::milliseconds per_test_timeout{30000};
  std::uint64_t memory_limit_bytes = 2ull << 30;
  std::size_t max_output_bytes = 1 << 20;
  /// Wrapper program text; empty selects the built-in Python wrapper.
  std::string wrapper_source;

  void validate() const;
  /// Stable digest of everything that influences execution results.
  std::string fingerprint() const;
};

enum class TestStatus { Ok, RuntimeError, Timeout, NonzeroExit };

std::string_view to_string(TestStatus s) noexcept;
std::optional<TestStatus> parse_test_status(std::string_view s) noexcept;

struct TestOutcome {
  TestStatus status = TestStatus::RuntimeError;
  std::optional<std::string> value_trace;  // present iff status == Ok
  std::string stdout_text;                 // normalized

  bool operator==(const TestOutcome&) const = default;
};

struct ExecutionTrace {
  std::string generation_id;
  std::vector<TestOutcome> outcomes;
  bool valid = false;

  bool operator==(const ExecutionTrace&) const = default;
};

enum class OracleKind { DefaultCode, ConstrainedIntList, JudgeThreshold };

struct ValidityOracle {
  OracleKind kind = OracleKind::DefaultCode;
  /// Exclusive upper bound on list length for ConstrainedIntList.
  std::size_t max_list_length = 1000;
  /// Quality threshold for JudgeThreshold (applied to normalized scores).
  double quality_threshold = 0.5;

  static ValidityOracle default_code() { return {}; }
  static ValidityOracle constrained_int_list() { return {OracleKind::ConstrainedIntList}; }
};

/// Strips trailing whitespace on every line and trailing newlines.
std::string normalize_stdout(std::string_view raw);

/// The built-in Python wrapper: loads the candidate and input parser, calls the
/// target, and frames the result as `TRACE:<serialized value>` followed by the
/// captured stdout.
std::string_view builtin_python_wrapper();

/// Interprets one runner invocation. Exposed for testing the framing contract.
TestOutcome decode_runner_output(bool timed_out, int exit_code, bool signaled,
                                 std::string_view stdout_text);

/// Executes `program` once per test input of `problem`. Throws RunnerUnavailable
/// when the runner itself cannot start; program failures are recorded in the trace.
ExecutionTrace run_program(const ExtractedProgram& program, const ProblemSpec& problem,
                           const RunnerConfig& config, std::string generation_id = {});

/// Trace for a generation whose extraction failed: every test is a runtime error.
ExecutionTrace failed_extraction_trace(const ProblemSpec& problem, std::string generation_id);

/// Total function over completed traces.
bool check_validity(const ExecutionTrace& trace, const ValidityOracle& oracle);
bool check_validity(const std::vector<TestOutcome>& outcomes, const ValidityOracle& oracle);

}  // namespace esdiv

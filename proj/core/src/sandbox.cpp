#include "esdiv/sandbox.hpp"

#include <stdlib.h>

#include <filesystem>
#include <fstream>
#include <regex>

#include "esdiv/error.hpp"
#include "esdiv/hash.hpp"
#include "esdiv/value.hpp"
#include "process.hpp"

namespace esdiv {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kPythonWrapper = R"PY(import ast
import contextlib
import io
import os
import random
import sys

TARGET = @TARGET@
MAX_DEPTH = 64

if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)


def _esc(s):
    out = []
    for ch in s:
        if ch in "\\,:[](){}":
            out.append("\\" + ch)
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        else:
            out.append(ch)
    return "".join(out)


def _ser(v, depth=0):
    if depth > MAX_DEPTH:
        raise RecursionError("value nesting exceeds %d" % MAX_DEPTH)
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "bool:true" if v else "bool:false"
    if isinstance(v, int):
        return "int:" + str(int(v))
    if isinstance(v, float):
        return "float:" + repr(float(v))
    if isinstance(v, str):
        return "str:" + _esc(v)
    if isinstance(v, list):
        return "list:[" + ",".join(_ser(x, depth + 1) for x in v) + "]"
    if isinstance(v, tuple):
        return "tuple:(" + ",".join(_ser(x, depth + 1) for x in v) + ")"
    if isinstance(v, (set, frozenset)):
        return "set:{" + ",".join(sorted(_ser(x, depth + 1) for x in v)) + "}"
    if isinstance(v, dict):
        items = sorted((_ser(k, depth + 1), _ser(x, depth + 1)) for k, x in v.items())
        return "dict:{" + ",".join(k + ":" + x for k, x in items) + "}"
    return "obj:" + _esc(type(v).__name__) + ":" + _esc(repr(v))


def _default_parse(raw):
    text = raw.strip()
    try:
        return ast.literal_eval(text)
    except Exception:
        return text


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    with open(os.path.join(here, "candidate.py"), encoding="utf-8") as fh:
        candidate = fh.read()
    with open(os.path.join(here, "parser.py"), encoding="utf-8") as fh:
        parser_src = fh.read()
    with open(sys.argv[1], encoding="utf-8") as fh:
        raw = fh.read()
    random.seed(0)
    captured = io.StringIO()
    try:
        parser_ns = {"__name__": "__input_parser__"}
        exec(compile(parser_src, "parser.py", "exec"), parser_ns)
        parse = parser_ns.get("parse_input", _default_parse)
        args = parse(raw)
        if not isinstance(args, tuple):
            args = (args,)
        ns = {"__name__": "__candidate__"}
        with contextlib.redirect_stdout(captured):
            exec(compile(candidate, "candidate.py", "exec"), ns)
            result = ns[TARGET](*args)
        trace = _ser(result)
    except SystemExit:
        sys.stderr.write("ERROR:SystemExit\n")
        sys.exit(2)
    except BaseException as exc:
        sys.stderr.write("ERROR:%s\n" % type(exc).__name__)
        sys.exit(1)
    sys.stdout.write("TRACE:" + trace + "\n")
    sys.stdout.write(captured.getvalue())
    sys.stdout.flush()


main()
)PY";

class ScratchDir {
 public:
  ScratchDir() {
    std::string tmpl = (fs::temp_directory_path() / "esdiv-run-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) {
      throw Error(ErrorCode::RunnerUnavailable, "cannot create scratch directory");
    }
    path_ = tmpl;
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::RunnerUnavailable, "cannot write " + path.string());
}

std::string substitute(std::string text, std::string_view key, const std::string& value) {
  for (std::size_t pos = text.find(key); pos != std::string::npos;
       pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

bool is_identifier(std::string_view s) {
  static const std::regex re(R"(^[A-Za-z_]\w*$)");
  return std::regex_match(s.begin(), s.end(), re);
}

}  // namespace

std::string_view to_string(TestStatus s) noexcept {
  switch (s) {
    case TestStatus::Ok: return "ok";
    case TestStatus::RuntimeError: return "runtime_error";
    case TestStatus::Timeout: return "timeout";
    case TestStatus::NonzeroExit: return "nonzero_exit";
  }
  return "runtime_error";
}

std::optional<TestStatus> parse_test_status(std::string_view s) noexcept {
  for (TestStatus t : {TestStatus::Ok, TestStatus::RuntimeError, TestStatus::Timeout,
                       TestStatus::NonzeroExit}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

void RunnerConfig::validate() const {
  if (per_test_timeout.count() <= 0) {
    throw Error(ErrorCode::InvalidArgument, "per_test_timeout must be positive");
  }
  if (max_output_bytes == 0) {
    throw Error(ErrorCode::InvalidArgument, "max_output_bytes must be positive");
  }
  if (runner_command_template.find("{program}") == std::string::npos ||
      runner_command_template.find("{input}") == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument,
                "runner command template needs {program} and {input} placeholders");
  }
}

std::string RunnerConfig::fingerprint() const {
  std::string material = runner_command_template;
  material += '\0' + std::to_string(per_test_timeout.count());
  material += '\0' + std::to_string(memory_limit_bytes);
  material += '\0' + std::to_string(max_output_bytes);
  material += '\0';
  material += wrapper_source.empty() ? kPythonWrapper : std::string_view(wrapper_source);
  return sha256_hex(material).substr(0, 16);
}

std::string_view builtin_python_wrapper() { return kPythonWrapper; }

std::string normalize_stdout(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t end = raw.find('\n', pos);
    const bool last = end == std::string_view::npos;
    if (last) end = raw.size();
    std::string_view line = raw.substr(pos, end - pos);
    const auto keep = line.find_last_not_of(" \t\r\f\v");
    out.append(keep == std::string_view::npos ? std::string_view() : line.substr(0, keep + 1));
    if (last) break;
    out += '\n';
    pos = end + 1;
  }
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

TestOutcome decode_runner_output(bool timed_out, int exit_code, bool signaled,
                                 std::string_view stdout_text) {
  TestOutcome o;
  if (timed_out) {
    o.status = TestStatus::Timeout;
    return o;
  }
  if (signaled) {
    o.status = TestStatus::NonzeroExit;
    o.stdout_text = normalize_stdout(stdout_text);
    return o;
  }
  if (exit_code == 0) {
    constexpr std::string_view kFrame = "TRACE:";
    const std::size_t nl = stdout_text.find('\n');
    std::string_view first = stdout_text.substr(0, nl);
    if (first.substr(0, kFrame.size()) == kFrame) {
      std::string value(first.substr(kFrame.size()));
      try {
        (void)parse_value(value);
      } catch (const Error&) {
        o.status = TestStatus::RuntimeError;
        o.stdout_text = normalize_stdout(stdout_text);
        return o;
      }
      o.status = TestStatus::Ok;
      o.value_trace = std::move(value);
      o.stdout_text = normalize_stdout(
          nl == std::string_view::npos ? std::string_view() : stdout_text.substr(nl + 1));
      return o;
    }
    o.status = TestStatus::RuntimeError;
    o.stdout_text = normalize_stdout(stdout_text);
    return o;
  }
  o.status = exit_code == 1 ? TestStatus::RuntimeError : TestStatus::NonzeroExit;
  o.stdout_text = normalize_stdout(stdout_text);
  return o;
}

ExecutionTrace failed_extraction_trace(const ProblemSpec& problem, std::string generation_id) {
  ExecutionTrace trace;
  trace.generation_id = std::move(generation_id);
  trace.outcomes.assign(problem.test_inputs.size(), TestOutcome{});
  trace.valid = false;
  return trace;
}

ExecutionTrace run_program(const ExtractedProgram& program, const ProblemSpec& problem,
                           const RunnerConfig& config, std::string generation_id) {
  config.validate();
  if (!program.includes_target) {
    throw Error(ErrorCode::InvalidArgument, "program does not define the target function");
  }
  if (!is_identifier(problem.target_function_name)) {
    throw Error(ErrorCode::InvalidArgument,
                "target function name is not an identifier: " + problem.target_function_name);
  }

  ScratchDir scratch;
  const std::string wrapper =
      config.wrapper_source.empty() ? std::string(kPythonWrapper) : config.wrapper_source;
  const fs::path wrapper_path = scratch.path() / "wrapper.py";
  write_text(wrapper_path,
             substitute(wrapper, "@TARGET@", "\"" + problem.target_function_name + "\""));
  write_text(scratch.path() / "candidate.py", program.source);
  write_text(scratch.path() / "parser.py", problem.input_parser_source);

  detail::ProcessOptions opts;
  opts.working_dir = scratch.path();
  opts.timeout = config.per_test_timeout;
  opts.memory_limit_bytes = config.memory_limit_bytes;
  opts.max_output_bytes = config.max_output_bytes;

  ExecutionTrace trace;
  trace.generation_id = std::move(generation_id);
  trace.outcomes.reserve(problem.test_inputs.size());
  for (std::size_t i = 0; i < problem.test_inputs.size(); ++i) {
    const fs::path input_path = scratch.path() / ("input_" + std::to_string(i) + ".txt");
    write_text(input_path, problem.test_inputs[i]);
    std::string command =
        substitute(config.runner_command_template, "{program}",
                   detail::shell_quote(wrapper_path.string()));
    command = substitute(command, "{input}", detail::shell_quote(input_path.string()));

    const detail::ProcessResult res = detail::run_shell(command, opts);
    if (!res.started || (!res.timed_out && res.term_signal == 0 &&
                         (res.exit_code == 126 || res.exit_code == 127))) {
      throw Error(ErrorCode::RunnerUnavailable,
                  "runner failed to start: " + command +
                      (res.stderr_text.empty() ? std::string() : " (" + res.stderr_text + ")"));
    }
    trace.outcomes.push_back(
        decode_runner_output(res.timed_out, res.exit_code, res.term_signal != 0, res.stdout_text));
  }
  trace.valid = check_validity(trace, ValidityOracle::default_code());
  return trace;
}

bool check_validity(const std::vector<TestOutcome>& outcomes, const ValidityOracle& oracle) {
  if (outcomes.empty()) return false;
  for (const auto& o : outcomes) {
    if (o.status != TestStatus::Ok || !o.value_trace) return false;
    if (*o.value_trace == "null" && o.stdout_text.empty()) return false;
    if (oracle.kind != OracleKind::ConstrainedIntList) continue;
    Value v;
    try {
      v = parse_value(*o.value_trace);
    } catch (const Error&) {
      return false;
    }
    if (!v.is<List>()) return false;
    const auto& items = v.as<List>().items;
    if (items.size() >= oracle.max_list_length) return false;
    for (const auto& item : items) {
      // bool counts as an integer, as with isinstance(x, int).
      if (!item.is<Integer>() && !item.is<bool>()) return false;
    }
  }
  return true;
}

bool check_validity(const ExecutionTrace& trace, const ValidityOracle& oracle) {
  return check_validity(trace.outcomes, oracle);
}

}  // namespace esdiv

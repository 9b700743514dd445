#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "esdiv/error.hpp"
#include "esdiv/sandbox.hpp"
#include "esdiv/value.hpp"

using namespace esdiv;
using namespace std::chrono_literals;

namespace {

ProblemSpec problem(std::vector<std::string> inputs, std::string parser = {}) {
  ProblemSpec p;
  p.problem_id = "p";
  p.test_inputs = std::move(inputs);
  p.input_parser_source = std::move(parser);
  return p;
}

ExtractedProgram program(std::string src) {
  ExtractedProgram p;
  p.source = std::move(src);
  p.includes_target = true;
  return p;
}

RunnerConfig fast_config() {
  RunnerConfig c;
  c.per_test_timeout = 10s;
  return c;
}

TestOutcome ok(std::string value, std::string out = {}) {
  return TestOutcome{TestStatus::Ok, std::move(value), std::move(out)};
}

}  // namespace

TEST(Sandbox, PrintsSquares) {
  const auto trace = run_program(program("def f(N): print(N**2)\n"), problem({"2", "3"}),
                                 fast_config(), "g1");
  ASSERT_EQ(trace.outcomes.size(), 2u);
  EXPECT_EQ(trace.generation_id, "g1");
  EXPECT_EQ(trace.outcomes[0], ok("null", "4"));
  EXPECT_EQ(trace.outcomes[1], ok("null", "9"));
  EXPECT_TRUE(trace.valid);
}

TEST(Sandbox, RaisingProgramIsInvalid) {
  const auto trace = run_program(program("def f(N):\n    raise ValueError(N)\n"),
                                 problem({"1", "2", "3"}), fast_config());
  for (const auto& o : trace.outcomes) {
    EXPECT_EQ(o.status, TestStatus::RuntimeError);
    EXPECT_FALSE(o.value_trace.has_value());
  }
  EXPECT_FALSE(trace.valid);
}

TEST(Sandbox, InfiniteLoopTimesOut) {
  RunnerConfig c = fast_config();
  c.per_test_timeout = 400ms;
  const auto trace =
      run_program(program("def f(N):\n    while True:\n        pass\n"), problem({"1", "2"}), c);
  for (const auto& o : trace.outcomes) EXPECT_EQ(o.status, TestStatus::Timeout);
  EXPECT_FALSE(trace.valid);
}

TEST(Sandbox, ExitIsNonzeroExit) {
  const auto trace = run_program(program("import sys\ndef f(N):\n    sys.exit(3)\n"),
                                 problem({"1"}), fast_config());
  EXPECT_EQ(trace.outcomes[0].status, TestStatus::NonzeroExit);
}

TEST(Sandbox, ReturnValueSerializationMatchesLibrary) {
  const auto trace = run_program(
      program("def f(N):\n    return [N, 'a,b', (2.5, None), {3, 1}, {'k': True}, 0.1 + 0.2]\n"),
      problem({"7"}), fast_config());
  ASSERT_EQ(trace.outcomes[0].status, TestStatus::Ok);
  Dict d;
  d.entries.push_back({Value("k"), Value(true)});
  const Value expected(List{{Value(7), Value("a,b"), Value(Tuple{{Value(2.5), Value()}}),
                             Value(Set{{Value(3), Value(1)}}), Value(d),
                             Value(0.30000000000000004)}});
  EXPECT_EQ(*trace.outcomes[0].value_trace, serialize_value(expected));
  EXPECT_TRUE(trace.valid);
}

TEST(Sandbox, BigIntegersAndUnsupportedObjects) {
  const auto trace = run_program(
      program("from fractions import Fraction\ndef f(N):\n    return (2**100, Fraction(1, 3))\n"),
      problem({"0"}), fast_config());
  EXPECT_EQ(*trace.outcomes[0].value_trace,
            "tuple:(int:1267650600228229401496703205376,obj:Fraction:Fraction\\(1\\, 3\\))");
}

TEST(Sandbox, InputParserContract) {
  const std::string parser = "def parse_input(raw):\n    a, b = raw.split()\n    return int(a), int(b)\n";
  const auto trace = run_program(program("def f(a, b):\n    return a - b\n"),
                                 problem({"5 3", "1 10"}, parser), fast_config());
  EXPECT_EQ(trace.outcomes[0], ok("int:2"));
  EXPECT_EQ(trace.outcomes[1], ok("int:-9"));
}

TEST(Sandbox, DefaultParserLiteralThenText) {
  const auto trace = run_program(program("def f(x):\n    return x\n"),
                                 problem({"[1, 2]", "hello world\n", "3.5"}), fast_config());
  EXPECT_EQ(trace.outcomes[0], ok("list:[int:1,int:2]"));
  EXPECT_EQ(trace.outcomes[1], ok("str:hello world"));
  EXPECT_EQ(trace.outcomes[2], ok("float:3.5"));
}

TEST(Sandbox, SeededRandomnessIsDeterministic) {
  const auto p = program("import random\ndef f(N):\n    print(random.random())\n");
  const auto a = run_program(p, problem({"1", "2"}), fast_config());
  const auto b = run_program(p, problem({"1", "2"}), fast_config());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.outcomes[0], a.outcomes[1]);
}

TEST(Sandbox, FailedWritesStillYieldTrace) {
  const auto trace = run_program(
      program("def f(N):\n    open('/nonexistent-dir/x.txt', 'w').write('x')\n"),
      problem({"1"}), fast_config());
  EXPECT_EQ(trace.outcomes[0].status, TestStatus::RuntimeError);
}

TEST(Sandbox, OutputIsCapped) {
  RunnerConfig c = fast_config();
  c.max_output_bytes = 1024;
  const auto trace =
      run_program(program("def f(N):\n    print('x' * 100000)\n"), problem({"1"}), c);
  EXPECT_LE(trace.outcomes[0].stdout_text.size(), 1024u);
}

TEST(Sandbox, RunnerUnavailable) {
  RunnerConfig c = fast_config();
  c.runner_command_template = "esdiv-no-such-interpreter {program} {input}";
  try {
    run_program(program("def f(N): pass\n"), problem({"1"}), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RunnerUnavailable);
  }
}

TEST(Sandbox, ConfigValidation) {
  RunnerConfig c;
  c.runner_command_template = "python3 {program}";
  EXPECT_THROW(c.validate(), Error);
  c = RunnerConfig{};
  c.per_test_timeout = 0ms;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_NE(RunnerConfig{}.fingerprint(), c.fingerprint());
  EXPECT_EQ(RunnerConfig{}.fingerprint(), RunnerConfig{}.fingerprint());
}

TEST(Sandbox, NormalizeStdout) {
  EXPECT_EQ(normalize_stdout("a  \r\nb\t\n\n\n"), "a\nb");
  EXPECT_EQ(normalize_stdout("\n\n"), "");
  EXPECT_EQ(normalize_stdout("  x"), "  x");
}

TEST(Sandbox, DecodeFraming) {
  EXPECT_EQ(decode_runner_output(false, 0, false, "TRACE:int:4\nhello \n"), ok("int:4", "hello"));
  EXPECT_EQ(decode_runner_output(false, 0, false, "no frame").status, TestStatus::RuntimeError);
  EXPECT_EQ(decode_runner_output(false, 0, false, "TRACE:int:\n").status,
            TestStatus::RuntimeError);
  EXPECT_EQ(decode_runner_output(false, 1, false, "").status, TestStatus::RuntimeError);
  EXPECT_EQ(decode_runner_output(false, 2, false, "").status, TestStatus::NonzeroExit);
  EXPECT_EQ(decode_runner_output(false, 0, true, "").status, TestStatus::NonzeroExit);
  EXPECT_EQ(decode_runner_output(true, 0, false, "TRACE:null\n").status, TestStatus::Timeout);
}

TEST(Validity, DefaultOracle) {
  const auto oracle = ValidityOracle::default_code();
  EXPECT_TRUE(check_validity({ok("null", "x"), ok("int:0")}, oracle));
  EXPECT_FALSE(check_validity({ok("null", "x"), ok("null", "")}, oracle));
  EXPECT_FALSE(check_validity({ok("int:1"), TestOutcome{TestStatus::Timeout, {}, ""}}, oracle));
  EXPECT_FALSE(check_validity(std::vector<TestOutcome>{}, oracle));
}

TEST(Validity, ConstrainedIntList) {
  const auto oracle = ValidityOracle::constrained_int_list();
  EXPECT_TRUE(check_validity({ok("list:[int:1,int:2,int:3]")}, oracle));
  EXPECT_TRUE(check_validity({ok("list:[]")}, oracle));
  EXPECT_TRUE(check_validity({ok("list:[bool:true,int:2]")}, oracle));
  EXPECT_FALSE(check_validity({ok("list:[int:1,str:a]")}, oracle));
  EXPECT_FALSE(check_validity({ok("tuple:(int:1)")}, oracle));
  EXPECT_FALSE(check_validity({ok("null", "1 2 3")}, oracle));
  auto list_of = [](std::size_t n) {
    std::string s = "list:[";
    for (std::size_t i = 0; i < n; ++i) s += (i ? ",int:" : "int:") + std::to_string(i);
    return s + "]";
  };
  EXPECT_TRUE(check_validity({ok(list_of(999))}, oracle));
  EXPECT_FALSE(check_validity({ok(list_of(1000))}, oracle));
  EXPECT_FALSE(check_validity({ok("list:[int:1]"), ok(list_of(1000))}, oracle));
}

TEST(Validity, RemovingAFailingTestNeverInvalidates) {
  std::mt19937 rng(3);
  const std::vector<TestOutcome> pool = {ok("int:1"), ok("null", "x"), ok("null"),
                                         TestOutcome{TestStatus::Timeout, {}, ""},
                                         TestOutcome{TestStatus::RuntimeError, {}, ""}};
  for (int iter = 0; iter < 2000; ++iter) {
    std::vector<TestOutcome> outcomes;
    const int n = 2 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) outcomes.push_back(pool[rng() % pool.size()]);
    const bool before = check_validity(outcomes, {});
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      if (check_validity(std::vector<TestOutcome>{outcomes[i]}, {})) continue;
      auto reduced = outcomes;
      reduced.erase(reduced.begin() + static_cast<long>(i));
      EXPECT_GE(check_validity(reduced, {}), before);
    }
  }
}

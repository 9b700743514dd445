#include "esdiv/corpus.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "esdiv/error.hpp"
#include "json.hpp"
#include "jsonl.hpp"

namespace esdiv {

using nlohmann::json;

std::string_view to_string(Domain d) noexcept {
  switch (d) {
    case Domain::Code: return "code";
    case Domain::CreativeWriting: return "creative_writing";
    case Domain::ArgumentativeWriting: return "argumentative_writing";
    case Domain::Brainstorming: return "brainstorming";
  }
  return "code";
}

std::optional<Domain> parse_domain(std::string_view s) noexcept {
  for (Domain d : {Domain::Code, Domain::CreativeWriting, Domain::ArgumentativeWriting,
                   Domain::Brainstorming}) {
    if (to_string(d) == s) return d;
  }
  return std::nullopt;
}

std::string_view to_string(TemplateKind k) noexcept {
  switch (k) {
    case TemplateKind::ZeroShot: return "zero_shot";
    case TemplateKind::TwoShot: return "two_shot";
    case TemplateKind::TwoShotCot: return "two_shot_cot";
  }
  return "zero_shot";
}

std::optional<TemplateKind> parse_template_kind(std::string_view s) noexcept {
  for (TemplateKind k : {TemplateKind::ZeroShot, TemplateKind::TwoShot, TemplateKind::TwoShotCot}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

namespace {

constexpr std::string_view kInstruction =
    "Now please implement the function f; do not return anything, the function f should print "
    "the result of the operation.\nIt should terminate within 30 seconds.";
constexpr std::string_view kCotSuffix =
    " First describe the function you would write, then implement it.";

std::string exemplar_int_header() {
  return "### Input Description:\n"
         "1. An integer \\( N \\) (1 \xE2\x89\xA4 \\( N \\) \xE2\x89\xA4 10000), representing "
         "some quantity or size.\n"
         "### Example Input:\n"
         "```\n"
         "1000\n"
         "```\n"
         "### Function Signature:\n"
         "Write a function `f(N)` that takes in the input.\n"
         "```python\n"
         "def f(N: int):\n"
         "    '''\n"
         "    N: an integer\n"
         "    '''\n";
}

std::string exemplar_float_header() {
  return "### Input Description:\n"
         "1. A floating point number \\( N \\) (1 \xE2\x89\xA4 \\( N \\) \xE2\x89\xA4 10000), "
         "representing some quantity or size.\n"
         "### Example Input:\n"
         "```\n"
         "143.23\n"
         "```\n"
         "### Function Signature:\n"
         "Write a function `f(N)` that takes in the input.\n"
         "```python\n"
         "def f(N: float):\n"
         "    '''\n"
         "    N: a float\n"
         "    '''\n";
}

constexpr std::string_view kIntSolution = "def f(N: int):\n    print(n**2)\n";
constexpr std::string_view kFloatSolution =
    "def f(N: float):\n"
    "    i = 0\n"
    "    while N > 1:\n"
    "        N = N / 2\n"
    "        i += 1\n"
    "    print(i)\n";
constexpr std::string_view kIntRationale =
    "The following function will print out the square of the input number. We will take the "
    "square using the ** operator in Python within the print statement.\n";
constexpr std::string_view kFloatRationale =
    "The following function will calculate the number of times the input number can be divided "
    "by 2 before it becomes less than 1. We will increment a counter variable i each time we "
    "divide the number by 2 inside a while loop.\n";

std::string two_shot_body(bool cot) {
  std::string instruction(kInstruction);
  if (cot) instruction += kCotSuffix;
  std::string body;
  body += exemplar_int_header();
  body += instruction + "\n";
  if (cot) body += kIntRationale;
  body += kIntSolution;
  body += exemplar_float_header();
  body += instruction + "\n";
  if (cot) body += kFloatRationale;
  body += kFloatSolution;
  body += kDescriptionPlaceholder;
  body += "\n";
  body += instruction;
  return body;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& reason) {
  throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": " + reason);
}

const json& require(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) malformed(line_no, std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line_no) {
  const json& v = require(obj, key, line_no);
  if (!v.is_string()) malformed(line_no, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

double require_number(const json& obj, const char* key, std::size_t line_no) {
  const json& v = require(obj, key, line_no);
  if (!v.is_number()) malformed(line_no, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

ProblemSpec problem_from_json(const json& j, std::size_t line_no) {
  if (!j.is_object()) malformed(line_no, "record is not a JSON object");
  ProblemSpec p;
  p.problem_id = require_string(j, "problem_id", line_no);
  if (p.problem_id.empty()) malformed(line_no, "empty problem_id");
  auto domain = parse_domain(require_string(j, "domain", line_no));
  if (!domain) malformed(line_no, "unknown domain");
  p.domain = *domain;
  p.description = require_string(j, "description", line_no);
  if (j.contains("target_function_name")) {
    p.target_function_name = require_string(j, "target_function_name", line_no);
    if (p.target_function_name.empty()) malformed(line_no, "empty target_function_name");
  }
  const json& tests = require(j, "test_inputs", line_no);
  if (!tests.is_array()) malformed(line_no, "test_inputs must be an array");
  for (const auto& t : tests) {
    if (!t.is_string()) malformed(line_no, "test_inputs entries must be strings");
    p.test_inputs.push_back(t.get<std::string>());
  }
  if (j.contains("input_parser_source")) {
    p.input_parser_source = require_string(j, "input_parser_source", line_no);
  }
  if (p.domain == Domain::Code && p.test_inputs.size() < kMinCodeTests) {
    throw Error(ErrorCode::InsufficientTests,
                "problem '" + p.problem_id + "' has " + std::to_string(p.test_inputs.size()) +
                    " test inputs, at least " + std::to_string(kMinCodeTests) + " required");
  }
  return p;
}

}  // namespace

PromptTemplate builtin_template(TemplateKind kind) {
  PromptTemplate t;
  t.kind = kind;
  switch (kind) {
    case TemplateKind::ZeroShot:
      t.body = std::string(kDescriptionPlaceholder) + "\n\n" + std::string(kInstruction);
      break;
    case TemplateKind::TwoShot:
      t.body = two_shot_body(false);
      break;
    case TemplateKind::TwoShotCot:
      t.body = two_shot_body(true);
      break;
  }
  return t;
}

std::string render_prompt(const ProblemSpec& problem, const PromptTemplate& tmpl) {
  const std::size_t count = count_occurrences(tmpl.body, kDescriptionPlaceholder);
  if (count != 1) {
    throw Error(ErrorCode::MissingPlaceholder,
                "template must contain exactly one " + std::string(kDescriptionPlaceholder) +
                    " placeholder, found " + std::to_string(count));
  }
  const std::size_t pos = tmpl.body.find(kDescriptionPlaceholder);
  std::string out;
  out.reserve(tmpl.body.size() - kDescriptionPlaceholder.size() + problem.description.size());
  out.append(tmpl.body, 0, pos);
  out.append(problem.description);
  out.append(tmpl.body, pos + kDescriptionPlaceholder.size());
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<ProblemSpec> parse_problems(std::string_view jsonl) {
  std::vector<ProblemSpec> out;
  std::set<std::string> seen;
  detail::for_each_json_line(jsonl, [&](const json& j, std::size_t line_no) {
    ProblemSpec p = problem_from_json(j, line_no);
    if (!seen.insert(p.problem_id).second) {
      throw Error(ErrorCode::DuplicateProblemId, "'" + p.problem_id + "' at line " +
                                                     std::to_string(line_no));
    }
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<ProblemSpec> load_problems(const std::filesystem::path& path) {
  return parse_problems(read_file(path));
}

std::string serialize_problem(const ProblemSpec& p) {
  nlohmann::ordered_json j;
  j["problem_id"] = p.problem_id;
  j["domain"] = std::string(to_string(p.domain));
  j["description"] = p.description;
  j["target_function_name"] = p.target_function_name;
  j["test_inputs"] = p.test_inputs;
  j["input_parser_source"] = p.input_parser_source;
  return j.dump();
}

std::string serialize_problems(const std::vector<ProblemSpec>& problems) {
  std::string out;
  for (const auto& p : problems) {
    out += serialize_problem(p);
    out += '\n';
  }
  return out;
}

double round_params_b(double params_b) { return std::round(params_b * 1000.0) / 1000.0; }

std::vector<GenerationSet> parse_generation_sets(std::string_view jsonl,
                                                 const std::vector<ProblemSpec>& corpus) {
  std::set<std::string> known;
  for (const auto& p : corpus) known.insert(p.problem_id);

  using Key = std::tuple<std::string, std::string, int, double, std::int64_t>;
  std::map<Key, std::size_t> index;
  std::vector<GenerationSet> sets;
  std::vector<std::set<std::string>> ids;

  detail::for_each_json_line(jsonl, [&](const json& j, std::size_t line_no) {
    if (!j.is_object()) malformed(line_no, "record is not a JSON object");
    std::string problem_id = require_string(j, "problem_id", line_no);
    if (!known.count(problem_id)) {
      throw Error(ErrorCode::UnknownProblemId,
                  "'" + problem_id + "' at line " + std::to_string(line_no));
    }
    std::string model_id = require_string(j, "model_id", line_no);
    const double params = require_number(j, "model_params_b", line_no);
    if (!(params > 0.0)) malformed(line_no, "model_params_b must be positive");
    auto kind = parse_template_kind(require_string(j, "template_kind", line_no));
    if (!kind) malformed(line_no, "unknown template_kind");
    const double temperature = require_number(j, "temperature", line_no);
    if (!(temperature >= 0.0)) malformed(line_no, "temperature must be non-negative");
    const json& seed = require(j, "seed", line_no);
    if (!seed.is_number_integer()) malformed(line_no, "seed must be an integer");

    GenerationRecord rec;
    rec.generation_id = require_string(j, "generation_id", line_no);
    rec.raw_text = require_string(j, "raw_text", line_no);

    Key key{problem_id, model_id, static_cast<int>(*kind), temperature, seed.get<std::int64_t>()};
    auto [it, inserted] = index.try_emplace(key, sets.size());
    if (inserted) {
      GenerationSet s;
      s.problem_id = problem_id;
      s.model_id = model_id;
      s.model_params_b = round_params_b(params);
      s.config = {*kind, temperature, seed.get<std::int64_t>()};
      sets.push_back(std::move(s));
      ids.emplace_back();
    } else if (sets[it->second].model_params_b != round_params_b(params)) {
      malformed(line_no, "model_params_b differs within one generation set");
    }
    if (!ids[it->second].insert(rec.generation_id).second) {
      malformed(line_no, "duplicate generation_id '" + rec.generation_id + "' within set");
    }
    sets[it->second].generations.push_back(std::move(rec));
  });

  for (const auto& s : sets) {
    if (s.size() < 2) {
      throw Error(ErrorCode::SetTooSmall, "set (" + s.problem_id + ", " + s.model_id +
                                              ") has K=" + std::to_string(s.size()) +
                                              ", at least 2 required");
    }
  }
  return sets;
}

std::vector<GenerationSet> load_generation_sets(const std::filesystem::path& path,
                                                const std::vector<ProblemSpec>& corpus) {
  return parse_generation_sets(read_file(path), corpus);
}

}  // namespace esdiv

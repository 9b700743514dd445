#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace esdiv {

enum class Domain { Code, CreativeWriting, ArgumentativeWriting, Brainstorming };

std::string_view to_string(Domain d) noexcept;
std::optional<Domain> parse_domain(std::string_view s) noexcept;

inline constexpr std::size_t kMinCodeTests = 10;

struct ProblemSpec {
  std::string problem_id;
  Domain domain = Domain::Code;
  std::string description;
  std::string target_function_name = "f";
  std::vector<std::string> test_inputs;
  std::string input_parser_source;

  bool operator==(const ProblemSpec&) const = default;
};

enum class TemplateKind { ZeroShot, TwoShot, TwoShotCot };

std::string_view to_string(TemplateKind k) noexcept;
std::optional<TemplateKind> parse_template_kind(std::string_view s) noexcept;

inline constexpr std::string_view kDescriptionPlaceholder = "{problem_description}";

struct PromptTemplate {
  TemplateKind kind = TemplateKind::ZeroShot;
  std::string body;
};

/// The three code prompt templates, exemplars included verbatim.
PromptTemplate builtin_template(TemplateKind kind);

/// Replaces the single description placeholder. Throws MissingPlaceholder when
/// the body does not contain exactly one placeholder.
std::string render_prompt(const ProblemSpec& problem, const PromptTemplate& tmpl);

struct GenerationConfig {
  TemplateKind template_kind = TemplateKind::ZeroShot;
  double temperature = 0.0;
  std::int64_t seed = 0;

  bool operator==(const GenerationConfig&) const = default;
};

struct GenerationRecord {
  std::string generation_id;
  std::string raw_text;
  std::optional<std::string> extracted_program;
  std::optional<std::vector<double>> embedding;
};

struct GenerationSet {
  std::string problem_id;
  std::string model_id;
  double model_params_b = 0.0;
  GenerationConfig config;
  std::vector<GenerationRecord> generations;

  std::size_t size() const noexcept { return generations.size(); }
};

/// Reads `problems.jsonl`. Records are validated and returned in file order.
std::vector<ProblemSpec> load_problems(const std::filesystem::path& path);
std::vector<ProblemSpec> parse_problems(std::string_view jsonl);

std::string serialize_problem(const ProblemSpec& p);
std::string serialize_problems(const std::vector<ProblemSpec>& problems);

/// Reads `generations.jsonl` and groups rows by (problem, model, config) in
/// order of first appearance. Generation order within a set is file order.
std::vector<GenerationSet> load_generation_sets(const std::filesystem::path& path,
                                                const std::vector<ProblemSpec>& corpus);
std::vector<GenerationSet> parse_generation_sets(std::string_view jsonl,
                                                 const std::vector<ProblemSpec>& corpus);

/// Three-decimal rounding used for stored parameter counts.
double round_params_b(double params_b);

std::string read_file(const std::filesystem::path& path);

}  // namespace esdiv

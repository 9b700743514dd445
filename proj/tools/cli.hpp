#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "esdiv/corpus.hpp"
#include "esdiv/error.hpp"
#include "esdiv/judge.hpp"
#include "esdiv/metrics.hpp"
#include "esdiv/sandbox.hpp"
#include "esdiv/stats.hpp"

namespace esdiv::cli {

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitInfrastructure = 3 };

/// Exit status for an error code: infrastructure failures (runner, judge, I/O)
/// map to 3, everything else to 2.
int exit_code_for(ErrorCode code) noexcept;

/// {"error": "<code>", "message": "..."} on one line.
std::string error_json(const Error& e);

inline constexpr std::size_t kExhaustivePairLimit = 32;
inline constexpr std::size_t kSampledKernelPairs = 300;
inline constexpr std::size_t kJudgePairs = 32;

struct RunManifest {
  std::filesystem::path corpus;
  std::filesystem::path generations;
  std::optional<std::filesystem::path> embeddings;
  ValidityOracle oracle;
  std::vector<MetricKind> metrics;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::filesystem::path out;
  RunnerConfig runner;
  std::filesystem::path rubrics = "rubrics";
  /// Use the deterministic stub judge, optionally seeded with a script file.
  bool judge_stub = false;
  std::optional<std::filesystem::path> judge_script;
  std::optional<RemoteJudgeConfig> remote_judge;

  /// Checks metric prerequisites and worker budget; throws InvalidArgument.
  void validate() const;
};

std::vector<MetricKind> parse_metric_list(std::string_view list);
std::vector<MetricKind> default_metrics();

/// Identity of a generation set, used for seeding and cache keys.
std::string set_identity(const GenerationSet& set);

struct EvaluateSummary {
  std::size_t executed = 0;
  std::size_t cached = 0;
  std::size_t judge_calls = 0;
  std::vector<DiversityScore> scores;
};

/// Runs the full pipeline and writes `traces.jsonl` and `scores.jsonl` under
/// `manifest.out`. Throws Error on validation or infrastructure failure.
EvaluateSummary evaluate(const RunManifest& manifest);

std::string render_scores(const std::vector<DiversityScore>& scores);

struct CompareOptions {
  std::filesystem::path scores_a;
  std::filesystem::path scores_b;
  std::string pairing = "problem_id";
  std::string label_a;
  std::string label_b;
  std::filesystem::path out;
};

/// Writes `comparison.csv` and returns the rows.
std::vector<ComparisonRow> compare(const CompareOptions& opts);

struct SimulateOptions {
  std::vector<double> distribution;
  std::vector<std::size_t> n_grid;
  std::uint64_t seed = 0;
};

/// CSV text with columns n, div_fixed, div_pair, limit.
std::string simulate_csv(const SimulateOptions& opts);

struct ReportOptions {
  std::filesystem::path scores;
  std::filesystem::path models;
  std::filesystem::path out;
};

struct ReportTables {
  std::string avgdiv_csv;
  std::string efficiency_csv;
  std::string raw_results_csv;
};

/// `models` is a JSON object mapping model_id to parameter count in billions.
ReportTables build_report(const std::vector<DiversityScore>& scores,
                          const std::map<std::string, double>& params_b);
std::map<std::string, double> load_model_metadata(const std::filesystem::path& path);

/// Writes avgdiv.csv, efficiency.csv and raw_results.csv.
ReportTables report(const ReportOptions& opts);

/// Parses arguments and dispatches a subcommand. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace esdiv::cli

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "esdiv/corpus.hpp"

namespace esdiv {

enum class JudgeTask { CreativeWriting, ArgumentativeWriting, Brainstorming, Similarity };

std::string_view to_string(JudgeTask t) noexcept;
std::optional<JudgeTask> parse_judge_task(std::string_view s) noexcept;
/// Quality rubric task for an NL problem domain; nullopt for code.
std::optional<JudgeTask> quality_task_for(Domain d) noexcept;

inline constexpr int kPerCriterionMax = 10;

struct Rubric {
  JudgeTask task_kind = JudgeTask::CreativeWriting;
  std::vector<std::string> criteria;

  int max_total() const noexcept { return static_cast<int>(criteria.size()) * kPerCriterionMax; }
};

/// Rubric file: {"task_kind": "...", "criteria": ["...", ...]}.
Rubric parse_rubric(std::string_view json_text);
Rubric load_rubric(const std::filesystem::path& path);
/// Looks up `<dir>/<task_kind>.json`.
Rubric load_rubric(const std::filesystem::path& dir, JudgeTask task);

struct JudgeScore {
  int raw = 0;
  int max_total = 0;
  double normalized = 0.0;
  std::string rationale;
};

struct JudgeRequest {
  JudgeTask task_kind = JudgeTask::CreativeWriting;
  std::vector<std::string> rubric_criteria;
  std::string content_a;
  std::optional<std::string> content_b;

  std::string to_json() const;
};

struct JudgeReply {
  std::vector<int> scores;
  std::string rationale;
};

/// Parses {"scores": [int], "rationale": "..."}; throws MalformedJudgeReply.
JudgeReply parse_judge_reply(std::string_view json_text);

class JudgeClient {
 public:
  virtual ~JudgeClient() = default;
  /// Must be safe to call concurrently and idempotent under retries.
  virtual JudgeReply score(const JudgeRequest& request) = 0;
};

struct RemoteJudgeConfig {
  std::string endpoint;  // http(s)://host[:port]/path
  std::string api_key;
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::seconds timeout{120};

  /// Reads JUDGE_ENDPOINT and JUDGE_API_KEY; nullopt when no endpoint is set.
  static std::optional<RemoteJudgeConfig> from_env();
};

/// POSTs the request JSON with a bearer credential. Transport failures, 429 and
/// 5xx responses are retried with exponential backoff, then JudgeUnavailable.
class RemoteJudgeClient final : public JudgeClient {
 public:
  explicit RemoteJudgeClient(RemoteJudgeConfig config);
  JudgeReply score(const JudgeRequest& request) override;

 private:
  RemoteJudgeConfig config_;
  std::string base_;
  std::string path_;
};

/// Deterministic judge keyed by a hash of the request content. Unscripted
/// requests get scores derived from that hash.
class StubJudgeClient final : public JudgeClient {
 public:
  void script_quality(JudgeTask task, std::string_view content, std::vector<int> scores);
  /// Registers both argument orders.
  void script_similarity(std::string_view a, std::string_view b, std::vector<int> scores);

  JudgeReply score(const JudgeRequest& request) override;
  std::size_t calls() const noexcept { return calls_.load(); }

  /// Adds entries from a JSONL script of {task_kind, content_a, content_b?, scores}.
  void load_script(const std::filesystem::path& path);

 private:
  static std::string key(JudgeTask task, std::string_view a, std::optional<std::string_view> b);

  std::map<std::string, std::vector<int>> scripted_;
  std::atomic<std::size_t> calls_{0};
};

/// Scores one generation; throws MalformedJudgeReply unless the reply holds one
/// integer in [1, 10] per criterion.
JudgeScore judge_quality(const GenerationRecord& gen, const Rubric& rubric, JudgeClient& client);

JudgeScore judge_similarity(const GenerationRecord& a, const GenerationRecord& b,
                            const Rubric& rubric, JudgeClient& client);

/// qa * qb * (1 - sim).
double soft_semantic_distance(double qa, double qb, double sim);

inline constexpr double kDefaultQualityThreshold = 0.5;

/// 1 iff (1 - sim) > tau and both qualities exceed tau.
int hard_nl_distance(double qa, double qb, double sim, double tau = kDefaultQualityThreshold);

}  // namespace esdiv

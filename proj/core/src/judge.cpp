#include "esdiv/judge.hpp"

#include <cstdlib>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "esdiv/error.hpp"
#include "esdiv/hash.hpp"
#include "httplib.h"
#include "json.hpp"
#include "jsonl.hpp"

namespace esdiv {

using nlohmann::json;

std::string_view to_string(JudgeTask t) noexcept {
  switch (t) {
    case JudgeTask::CreativeWriting: return "creative_writing";
    case JudgeTask::ArgumentativeWriting: return "argumentative_writing";
    case JudgeTask::Brainstorming: return "brainstorming";
    case JudgeTask::Similarity: return "similarity";
  }
  return "creative_writing";
}

std::optional<JudgeTask> parse_judge_task(std::string_view s) noexcept {
  for (JudgeTask t : {JudgeTask::CreativeWriting, JudgeTask::ArgumentativeWriting,
                      JudgeTask::Brainstorming, JudgeTask::Similarity}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::optional<JudgeTask> quality_task_for(Domain d) noexcept {
  switch (d) {
    case Domain::CreativeWriting: return JudgeTask::CreativeWriting;
    case Domain::ArgumentativeWriting: return JudgeTask::ArgumentativeWriting;
    case Domain::Brainstorming: return JudgeTask::Brainstorming;
    case Domain::Code: return std::nullopt;
  }
  return std::nullopt;
}

Rubric parse_rubric(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("rubric: ") + e.what());
  }
  if (!j.is_object() || !j.contains("task_kind") || !j["task_kind"].is_string() ||
      !j.contains("criteria") || !j["criteria"].is_array() || j["criteria"].empty()) {
    throw Error(ErrorCode::MalformedRecord, "rubric needs task_kind and nonempty criteria");
  }
  auto task = parse_judge_task(j["task_kind"].get<std::string>());
  if (!task) throw Error(ErrorCode::MalformedRecord, "rubric: unknown task_kind");
  Rubric r;
  r.task_kind = *task;
  for (const auto& c : j["criteria"]) {
    if (!c.is_string()) throw Error(ErrorCode::MalformedRecord, "rubric: criterion is not text");
    r.criteria.push_back(c.get<std::string>());
  }
  return r;
}

Rubric load_rubric(const std::filesystem::path& path) { return parse_rubric(read_file(path)); }

Rubric load_rubric(const std::filesystem::path& dir, JudgeTask task) {
  auto r = load_rubric(dir / (std::string(to_string(task)) + ".json"));
  if (r.task_kind != task) {
    throw Error(ErrorCode::MalformedRecord, "rubric file declares a different task_kind");
  }
  return r;
}

std::string JudgeRequest::to_json() const {
  nlohmann::ordered_json j;
  j["task_kind"] = to_string(task_kind);
  j["rubric_criteria"] = rubric_criteria;
  j["content_a"] = content_a;
  if (content_b) j["content_b"] = *content_b;
  return j.dump();
}

JudgeReply parse_judge_reply(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedJudgeReply, e.what());
  }
  if (!j.is_object() || !j.contains("scores") || !j["scores"].is_array()) {
    throw Error(ErrorCode::MalformedJudgeReply, "reply has no scores array");
  }
  JudgeReply reply;
  for (const auto& s : j["scores"]) {
    if (!s.is_number_integer()) throw Error(ErrorCode::MalformedJudgeReply, "non-integer score");
    reply.scores.push_back(s.get<int>());
  }
  if (j.contains("rationale") && j["rationale"].is_string()) {
    reply.rationale = j["rationale"].get<std::string>();
  }
  return reply;
}

// ---------------------------------------------------------------------------

std::optional<RemoteJudgeConfig> RemoteJudgeConfig::from_env() {
  const char* endpoint = std::getenv("JUDGE_ENDPOINT");
  if (!endpoint || !*endpoint) return std::nullopt;
  RemoteJudgeConfig c;
  c.endpoint = endpoint;
  if (const char* key = std::getenv("JUDGE_API_KEY")) c.api_key = key;
  return c;
}

RemoteJudgeClient::RemoteJudgeClient(RemoteJudgeConfig config) : config_(std::move(config)) {
  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "judge endpoint needs a scheme: " + config_.endpoint);
  }
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  base_ = config_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
  if (config_.max_attempts < 1) config_.max_attempts = 1;
}

JudgeReply RemoteJudgeClient::score(const JudgeRequest& request) {
  httplib::Client client(base_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  const std::string body = request.to_json();

  std::string last_error;
  auto backoff = config_.initial_backoff;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "transport: " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      return parse_judge_reply(res->body);
    } else if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
    } else {
      throw Error(ErrorCode::JudgeUnavailable, "HTTP " + std::to_string(res->status) + ": " +
                                                   res->body.substr(0, 200));
    }
    if (attempt < config_.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw Error(ErrorCode::JudgeUnavailable,
              "gave up after " + std::to_string(config_.max_attempts) + " attempts: " + last_error);
}

// ---------------------------------------------------------------------------

std::string StubJudgeClient::key(JudgeTask task, std::string_view a,
                                 std::optional<std::string_view> b) {
  std::string material(to_string(task));
  material += '\0';
  material += a;
  if (b) {
    material += '\0';
    material += *b;
  }
  return sha256_hex(material);
}

void StubJudgeClient::script_quality(JudgeTask task, std::string_view content,
                                     std::vector<int> scores) {
  scripted_[key(task, content, std::nullopt)] = std::move(scores);
}

void StubJudgeClient::script_similarity(std::string_view a, std::string_view b,
                                        std::vector<int> scores) {
  scripted_[key(JudgeTask::Similarity, a, b)] = scores;
  scripted_[key(JudgeTask::Similarity, b, a)] = std::move(scores);
}

JudgeReply StubJudgeClient::score(const JudgeRequest& request) {
  ++calls_;
  std::optional<std::string_view> b;
  if (request.content_b) b = *request.content_b;
  const std::string k = key(request.task_kind, request.content_a, b);
  JudgeReply reply;
  if (auto it = scripted_.find(k); it != scripted_.end()) {
    reply.scores = it->second;
    reply.rationale = "scripted";
    return reply;
  }
  for (std::size_t i = 0; i < request.rubric_criteria.size(); ++i) {
    const std::string hex = k.substr((2 * i) % (k.size() - 1), 2);
    reply.scores.push_back(1 + std::stoi(hex, nullptr, 16) % kPerCriterionMax);
  }
  reply.rationale = "derived";
  return reply;
}

void StubJudgeClient::load_script(const std::filesystem::path& path) {
  detail::for_each_json_line(read_file(path), [&](const json& j, std::size_t line_no) {
    const auto where = path.string() + " line " + std::to_string(line_no);
    try {
      auto task = parse_judge_task(j.at("task_kind").get<std::string>());
      if (!task) throw Error(ErrorCode::MalformedRecord, where + ": unknown task_kind");
      auto scores = j.at("scores").get<std::vector<int>>();
      const auto a = j.at("content_a").get<std::string>();
      if (*task == JudgeTask::Similarity) {
        script_similarity(a, j.at("content_b").get<std::string>(), std::move(scores));
      } else {
        script_quality(*task, a, std::move(scores));
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedRecord, where + ": " + e.what());
    }
  });
}

// ---------------------------------------------------------------------------

namespace {

JudgeScore to_score(const JudgeReply& reply, const Rubric& rubric) {
  if (reply.scores.size() != rubric.criteria.size()) {
    throw Error(ErrorCode::MalformedJudgeReply,
                "expected " + std::to_string(rubric.criteria.size()) + " scores, got " +
                    std::to_string(reply.scores.size()));
  }
  JudgeScore s;
  for (int v : reply.scores) {
    if (v < 1 || v > kPerCriterionMax) {
      throw Error(ErrorCode::MalformedJudgeReply, "score " + std::to_string(v) + " out of range");
    }
    s.raw += v;
  }
  s.max_total = rubric.max_total();
  s.normalized = static_cast<double>(s.raw) / static_cast<double>(s.max_total);
  s.rationale = reply.rationale;
  return s;
}

}  // namespace

JudgeScore judge_quality(const GenerationRecord& gen, const Rubric& rubric, JudgeClient& client) {
  if (rubric.task_kind == JudgeTask::Similarity) {
    throw Error(ErrorCode::InvalidArgument, "quality judged with the similarity rubric");
  }
  JudgeRequest req{rubric.task_kind, rubric.criteria, gen.raw_text, std::nullopt};
  return to_score(client.score(req), rubric);
}

JudgeScore judge_similarity(const GenerationRecord& a, const GenerationRecord& b,
                            const Rubric& rubric, JudgeClient& client) {
  if (rubric.task_kind != JudgeTask::Similarity) {
    throw Error(ErrorCode::InvalidArgument, "similarity needs the similarity rubric");
  }
  JudgeRequest req{JudgeTask::Similarity, rubric.criteria, a.raw_text, b.raw_text};
  return to_score(client.score(req), rubric);
}

double soft_semantic_distance(double qa, double qb, double sim) { return qa * qb * (1.0 - sim); }

int hard_nl_distance(double qa, double qb, double sim, double tau) {
  return (1.0 - sim) > tau && qa > tau && qb > tau ? 1 : 0;
}

}  // namespace esdiv

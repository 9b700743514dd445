#include "esdiv/metrics.hpp"

#include <cmath>
#include <set>

#include "esdiv/error.hpp"
#include "esdiv/rng.hpp"
#include "json.hpp"
#include "jsonl.hpp"

namespace esdiv {

std::string_view to_string(MetricKind m) noexcept {
  switch (m) {
    case MetricKind::SemanticFixed: return "semantic_fixed";
    case MetricKind::SemanticPair: return "semantic_pair";
    case MetricKind::Lexical: return "lexical";
    case MetricKind::Syntactic: return "syntactic";
    case MetricKind::Neural: return "neural";
    case MetricKind::NlSoft: return "nl_soft";
    case MetricKind::NlHard: return "nl_hard";
    case MetricKind::ValidityRate: return "validity_rate";
  }
  return "semantic_fixed";
}

std::optional<MetricKind> parse_metric_kind(std::string_view s) noexcept {
  for (MetricKind m : {MetricKind::SemanticFixed, MetricKind::SemanticPair, MetricKind::Lexical,
                       MetricKind::Syntactic, MetricKind::Neural, MetricKind::NlSoft,
                       MetricKind::NlHard, MetricKind::ValidityRate}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

std::string serialize_score(const DiversityScore& s) {
  nlohmann::ordered_json j;
  j["problem_id"] = s.problem_id;
  j["model_id"] = s.model_id;
  j["template_kind"] = to_string(s.config.template_kind);
  j["temperature"] = s.config.temperature;
  j["gen_seed"] = s.config.seed;
  j["metric"] = to_string(s.metric);
  j["value"] = s.value;
  j["pairs_evaluated"] = s.pairs_evaluated;
  j["seed"] = s.seed;
  return j.dump();
}

std::vector<DiversityScore> parse_scores(std::string_view jsonl) {
  std::vector<DiversityScore> out;
  detail::for_each_json_line(jsonl, [&](const nlohmann::json& j, std::size_t line_no) {
    const auto fail = [&](const std::string& what) {
      throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": " + what);
    };
    try {
      DiversityScore s;
      s.problem_id = j.at("problem_id").get<std::string>();
      s.model_id = j.at("model_id").get<std::string>();
      auto kind = parse_template_kind(j.at("template_kind").get<std::string>());
      if (!kind) fail("unknown template_kind");
      s.config.template_kind = *kind;
      s.config.temperature = j.at("temperature").get<double>();
      s.config.seed = j.at("gen_seed").get<std::int64_t>();
      auto metric = parse_metric_kind(j.at("metric").get<std::string>());
      if (!metric) fail("unknown metric");
      s.metric = *metric;
      s.value = j.at("value").get<double>();
      s.pairs_evaluated = j.at("pairs_evaluated").get<std::size_t>();
      s.seed = j.at("seed").get<std::uint64_t>();
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      fail(e.what());
    }
  });
  return out;
}

std::vector<DiversityScore> load_scores(const std::filesystem::path& path) {
  return parse_scores(read_file(path));
}

SetEntry to_entry(const SemanticFingerprint& fp) { return {fp.source_valid, fp.digest}; }

double div_fixed(std::span<const SetEntry> set) {
  if (set.empty()) return 0.0;
  std::set<std::string_view> unique;
  for (const auto& e : set) {
    if (e.valid) unique.insert(e.fingerprint);
  }
  return static_cast<double>(unique.size()) / static_cast<double>(set.size());
}

std::vector<IndexPair> all_pairs(std::size_t K) {
  std::vector<IndexPair> out;
  if (K < 2) return out;
  out.reserve(K * (K - 1) / 2);
  for (std::size_t j = 0; j + 1 < K; ++j) {
    for (std::size_t k = j + 1; k < K; ++k) out.push_back({j, k});
  }
  return out;
}

std::vector<IndexPair> sample_pairs(std::size_t K, std::size_t count, std::uint64_t seed) {
  if (K < 2) throw Error(ErrorCode::SetTooSmall, "pair sampling needs K >= 2");
  const std::uint64_t total = static_cast<std::uint64_t>(K) * (K - 1) / 2;
  Rng rng(seed);
  std::vector<IndexPair> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t r = rng.below(total);
    std::size_t j = 0;
    while (r >= K - 1 - j) {
      r -= K - 1 - j;
      ++j;
    }
    out.push_back({j, j + 1 + static_cast<std::size_t>(r)});
  }
  return out;
}

std::vector<IndexPair> PairSampler::pairs(std::size_t K) const {
  return exhaustive ? all_pairs(K) : sample_pairs(K, count, seed);
}

PairAverage div_pair(std::span<const SetEntry> set, const PairSampler& sampler) {
  return div_pair(
      set.size(), [&](std::size_t j, std::size_t k) { return hard_distance(set[j], set[k]); },
      sampler);
}

double avg_div(std::span<const DiversityScore> scores) {
  if (scores.empty()) throw Error(ErrorCode::InvalidArgument, "no scores to average");
  double sum = 0.0;
  for (const auto& s : scores) {
    if (s.metric != scores.front().metric) {
      throw Error(ErrorCode::HeterogeneousScores,
                  std::string(to_string(s.metric)) + " mixed with " +
                      std::string(to_string(scores.front().metric)));
    }
    sum += s.value;
  }
  return sum / static_cast<double>(scores.size());
}

double parameter_efficiency(double avg, double params_b) {
  if (!(params_b > 0.0)) {
    throw Error(ErrorCode::NonpositiveParams, "parameter count must be positive");
  }
  return avg / params_b;
}

ClusterDistribution::ClusterDistribution(std::vector<double> probabilities)
    : p_(std::move(probabilities)) {
  if (p_.empty()) throw Error(ErrorCode::InvalidDistribution, "empty distribution");
  double sum = 0.0;
  for (double p : p_) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::InvalidDistribution, "probabilities must be positive");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidDistribution, "probabilities sum to " + std::to_string(sum));
  }
}

double ClusterDistribution::pair_limit() const {
  double sq = 0.0;
  for (double p : p_) sq += p * p;
  return 1.0 - sq;
}

ConvergencePoint simulate_convergence(const ClusterDistribution& dist, std::size_t n,
                                      std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::SetTooSmall, "simulation needs n >= 2");
  const auto& p = dist.probabilities();
  Rng rng(seed);
  std::vector<std::uint32_t> cls(n);
  for (auto& c : cls) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::uint32_t k = 0;
    for (; k + 1 < p.size(); ++k) {
      acc += p[k];
      if (u < acc) break;
    }
    c = k;
  }

  std::vector<SetEntry> entries;
  entries.reserve(n);
  for (auto c : cls) entries.push_back({true, std::to_string(c)});

  ConvergencePoint out;
  out.div_fixed = div_fixed(entries);
  out.div_pair =
      div_pair(n, [&](std::size_t j, std::size_t k) { return cls[j] != cls[k] ? 1 : 0; },
               PairSampler::all())
          .value;
  return out;
}

}  // namespace esdiv

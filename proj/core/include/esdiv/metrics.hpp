#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "esdiv/corpus.hpp"
#include "esdiv/semantics.hpp"

namespace esdiv {

enum class MetricKind {
  SemanticFixed,
  SemanticPair,
  Lexical,
  Syntactic,
  Neural,
  NlSoft,
  NlHard,
  ValidityRate,
};

std::string_view to_string(MetricKind m) noexcept;
std::optional<MetricKind> parse_metric_kind(std::string_view s) noexcept;

struct DiversityScore {
  std::string problem_id;
  std::string model_id;
  GenerationConfig config;
  MetricKind metric = MetricKind::SemanticFixed;
  double value = 0.0;
  std::size_t pairs_evaluated = 0;
  std::uint64_t seed = 0;

  bool operator==(const DiversityScore&) const = default;
};

/// One JSON object, no trailing newline. Key order is fixed.
std::string serialize_score(const DiversityScore& s);
std::vector<DiversityScore> parse_scores(std::string_view jsonl);
std::vector<DiversityScore> load_scores(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

/// Validity and fingerprint of one generation; all that the semantic metrics see.
struct SetEntry {
  bool valid = false;
  std::string fingerprint;
};

SetEntry to_entry(const SemanticFingerprint& fp);

/// Hard semantic distance on entries of one set.
inline int hard_distance(const SetEntry& a, const SetEntry& b) {
  if (!a.valid && !b.valid) return 0;
  if (a.valid && b.valid && a.fingerprint == b.fingerprint) return 0;
  return 1;
}

/// Unique fingerprints among valid entries, over K.
double div_fixed(std::span<const SetEntry> set);

struct IndexPair {
  std::size_t j = 0;
  std::size_t k = 0;

  bool operator==(const IndexPair&) const = default;
};

/// All j < k pairs in lexicographic order.
std::vector<IndexPair> all_pairs(std::size_t K);

/// `count` pairs drawn uniformly with replacement from the C(K,2) unordered pairs.
std::vector<IndexPair> sample_pairs(std::size_t K, std::size_t count, std::uint64_t seed);

struct PairSampler {
  bool exhaustive = true;
  std::size_t count = 0;
  std::uint64_t seed = 0;

  static PairSampler all() { return {}; }
  static PairSampler sampled(std::size_t count, std::uint64_t seed) { return {false, count, seed}; }

  std::vector<IndexPair> pairs(std::size_t K) const;
};

struct PairAverage {
  double value = 0.0;
  std::size_t pairs_evaluated = 0;
};

/// Mean of `kernel(j, k)` over the sampler's pairs for a set of size K.
template <typename Kernel>
PairAverage div_pair(std::size_t K, Kernel&& kernel, const PairSampler& sampler) {
  if (sampler.exhaustive) {
    if (K < 2) return {};
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < K; ++j) {
      for (std::size_t k = j + 1; k < K; ++k) sum += kernel(j, k);
    }
    const std::size_t n = K * (K - 1) / 2;
    return {sum / static_cast<double>(n), n};
  }
  const auto pairs = sampler.pairs(K);
  if (pairs.empty()) return {};
  double sum = 0.0;
  for (const auto& p : pairs) sum += kernel(p.j, p.k);
  return {sum / static_cast<double>(pairs.size()), pairs.size()};
}

/// Div_pair with the hard semantic kernel.
PairAverage div_pair(std::span<const SetEntry> set, const PairSampler& sampler = PairSampler::all());

/// Mean over per-problem scores of one (model, config, metric). Throws
/// HeterogeneousScores on mixed metric kinds, InvalidArgument when empty.
double avg_div(std::span<const DiversityScore> scores);

/// Throws NonpositiveParams when params_b <= 0.
double parameter_efficiency(double avg, double params_b);

struct EfficiencyPoint {
  std::string model_id;
  double params_b = 0.0;
  double avg_semantic_fixed = 0.0;
  double efficiency = 0.0;
};

// ---------------------------------------------------------------------------

class ClusterDistribution {
 public:
  /// Throws InvalidDistribution unless every entry is > 0 and the sum is 1 within 1e-12.
  explicit ClusterDistribution(std::vector<double> probabilities);

  const std::vector<double>& probabilities() const noexcept { return p_; }
  std::size_t support() const noexcept { return p_.size(); }
  /// Large-sample limit of the pairwise metric: 1 - sum of squared proportions.
  double pair_limit() const;

 private:
  std::vector<double> p_;
};

struct ConvergencePoint {
  double div_fixed = 0.0;
  double div_pair = 0.0;
};

/// Draws n valid generations whose class follows `dist` and scores them with
/// exhaustive pairs.
ConvergencePoint simulate_convergence(const ClusterDistribution& dist, std::size_t n,
                                      std::uint64_t seed);

}  // namespace esdiv

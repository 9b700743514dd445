#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "esdiv/metrics.hpp"

namespace esdiv {

struct PairedSample {
  std::vector<std::string> labels;
  std::vector<double> a;
  std::vector<double> b;
};

inline constexpr std::size_t kMinPairs = 5;
inline constexpr std::size_t kExactMaxN = 25;

struct WilcoxonResult {
  double w = 0.0;  // min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p = 1.0;  // two-tailed
  std::size_t n_used = 0;
  std::size_t dropped_zero = 0;
  bool exact = true;
};

/// Ranks of |x| (1-based) with ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> abs_values);

/// Two-tailed exact p for statistic `w` given the rank set: the probability over
/// all 2^n equally likely sign assignments that min(W+, W-) <= w. Ranks must be
/// multiples of 1/2.
double wilcoxon_exact_p(std::span<const double> ranks, double w);

/// Normal approximation with tie and continuity corrections.
double wilcoxon_normal_p(std::span<const double> ranks, double w);

/// Differences are b - a. Zero differences are dropped. Throws AllZeroDifferences
/// or TooFewPairs (fewer than 5 nonzero differences).
WilcoxonResult wilcoxon_signed_rank(const PairedSample& s);

/// Paired d_z = mean(b - a) / sd(b - a). Throws ZeroVariance.
double cohens_d(const PairedSample& s);

struct ComparisonRow {
  std::string comparison;
  MetricKind metric = MetricKind::SemanticFixed;
  std::optional<double> w;
  std::optional<double> p;
  std::optional<double> d;
  std::size_t n_pairs = 0;
  std::size_t dropped_zero = 0;
  std::string winner;
  bool significant = false;
  bool large_effect = false;
  std::string note;
};

/// Fields of DiversityScore usable as pairing keys.
enum class PairingField { ProblemId, ModelId, TemplateKind, Temperature, GenSeed };

/// Parses a comma-separated field list such as "problem_id,template_kind".
std::vector<PairingField> parse_pairing(std::string_view spec);

/// Pairs cells of `a` and `b` by the pairing key (scores sharing a key are
/// averaged) and tests every metric kind present in both. Throws PairingFailure
/// listing cells present on only one side.
std::vector<ComparisonRow> compare_models(std::span<const DiversityScore> a,
                                          std::span<const DiversityScore> b,
                                          std::span<const PairingField> pairing,
                                          const std::string& label_a, const std::string& label_b);

std::string comparison_csv_header();
std::string comparison_csv_row(const ComparisonRow& r);

}  // namespace esdiv

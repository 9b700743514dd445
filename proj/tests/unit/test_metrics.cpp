#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "esdiv/error.hpp"
#include "esdiv/metrics.hpp"
#include "esdiv/rng.hpp"

using namespace esdiv;

namespace {

SetEntry valid(std::string fp) { return SetEntry{true, std::move(fp)}; }
SetEntry invalid() { return SetEntry{false, "junk"}; }

// Independent oracles: count classes with a std::set, enumerate ordered pairs.
double oracle_fixed(const std::vector<SetEntry>& s) {
  std::set<std::string> classes;
  for (const auto& e : s) {
    if (e.valid) classes.insert(e.fingerprint);
  }
  return static_cast<double>(classes.size()) / static_cast<double>(s.size());
}

double oracle_pair(const std::vector<SetEntry>& s) {
  long ones = 0, total = 0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (j == k) continue;
      const bool same = (!s[j].valid && !s[k].valid) ||
                        (s[j].valid && s[k].valid && s[j].fingerprint == s[k].fingerprint);
      ones += same ? 0 : 1;
      ++total;
    }
  }
  return total ? static_cast<double>(ones) / static_cast<double>(total) : 0.0;
}

DiversityScore score(std::string problem, double value, MetricKind m = MetricKind::SemanticFixed) {
  DiversityScore s;
  s.problem_id = std::move(problem);
  s.model_id = "m";
  s.metric = m;
  s.value = value;
  return s;
}

}  // namespace

TEST(DivFixed, Examples) {
  std::vector<SetEntry> distinct;
  for (int i = 0; i < 32; ++i) distinct.push_back(valid("fp" + std::to_string(i)));
  EXPECT_EQ(div_fixed(distinct), 1.0);
  const std::vector<SetEntry> s = {valid("A"), valid("A"), valid("B"), invalid()};
  EXPECT_EQ(div_fixed(s), 0.5);
  const std::vector<SetEntry> none = {invalid(), invalid()};
  EXPECT_EQ(div_fixed(none), 0.0);
  EXPECT_EQ(div_fixed(std::span<const SetEntry>{}), 0.0);
}

TEST(DivPair, CaseTable) {
  EXPECT_EQ(hard_distance(invalid(), SetEntry{false, "other"}), 0);
  EXPECT_EQ(hard_distance(valid("A"), valid("A")), 0);
  EXPECT_EQ(hard_distance(valid("A"), invalid()), 1);
  EXPECT_EQ(hard_distance(valid("A"), valid("B")), 1);
  const std::vector<SetEntry> two_valid = {valid("A"), valid("B"), invalid()};
  const auto r1 = div_pair(two_valid);
  EXPECT_EQ(r1.value, 1.0);
  EXPECT_EQ(r1.pairs_evaluated, 3u);
  const std::vector<SetEntry> two_invalid = {invalid(), invalid(), valid("A")};
  EXPECT_EQ(div_pair(two_invalid).value, 2.0 / 3.0);
  EXPECT_EQ(div_pair(std::vector<SetEntry>{valid("A")}).pairs_evaluated, 0u);
}

TEST(DivPair, MatchesBruteForceOracle) {
  Rng rng(42);
  for (int iter = 0; iter < 500; ++iter) {
    const std::size_t K = 2 + rng.below(7);
    std::vector<SetEntry> s;
    for (std::size_t i = 0; i < K; ++i) {
      const auto c = rng.below(4);
      s.push_back(c == 3 ? invalid() : valid(std::string(1, static_cast<char>('A' + c))));
    }
    EXPECT_EQ(div_fixed(s), oracle_fixed(s));
    EXPECT_EQ(div_pair(s).value, oracle_pair(s));
  }
}

TEST(DivPair, GenericKernelAndSampling) {
  const std::vector<double> x = {0.0, 1.0};
  auto kernel = [&](std::size_t j, std::size_t k) { return std::abs(x[j] - x[k]); };
  EXPECT_EQ(div_pair(2, kernel, PairSampler::all()).value, 1.0);
  const auto sampled = div_pair(2, kernel, PairSampler::sampled(32, 9));
  EXPECT_EQ(sampled.value, 1.0);
  EXPECT_EQ(sampled.pairs_evaluated, 32u);
}

TEST(Sampler, SizeTwoAlwaysYieldsTheOnlyPair) {
  for (const auto& p : sample_pairs(2, 100, 123)) EXPECT_EQ(p, (IndexPair{0, 1}));
  EXPECT_THROW(sample_pairs(1, 3, 0), Error);
  EXPECT_EQ(all_pairs(4).size(), 6u);
  EXPECT_EQ(all_pairs(4)[3], (IndexPair{1, 2}));
}

TEST(Sampler, SeedDeterministic) {
  EXPECT_EQ(sample_pairs(32, 32, 77), sample_pairs(32, 32, 77));
  EXPECT_NE(sample_pairs(32, 32, 77), sample_pairs(32, 32, 78));
  for (const auto& p : sample_pairs(32, 1000, 5)) {
    EXPECT_LT(p.j, p.k);
    EXPECT_LT(p.k, 32u);
  }
}

TEST(Sampler, UniformOverUnorderedPairs) {
  constexpr std::size_t K = 6, draws = 1'000'000;
  std::map<std::pair<std::size_t, std::size_t>, long> counts;
  for (const auto& p : sample_pairs(K, draws, 2024)) ++counts[{p.j, p.k}];
  ASSERT_EQ(counts.size(), 15u);
  double chi2 = 0.0;
  const double expected = static_cast<double>(draws) / 15.0;
  for (const auto& [pair, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 14 degrees of freedom; 36.12 is the 0.001 upper quantile
  EXPECT_LT(chi2, 36.12);
}

TEST(Rng, BelowAndUniformRanges) {
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    EXPECT_LT(r.below(7), 7u);
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
  EXPECT_NE(derive_seed(1, "a"), derive_seed(2, "a"));
  EXPECT_EQ(derive_seed(1, "a"), derive_seed(1, "a"));
}

TEST(DivFixed, DuplicateStrictlyLowers) {
  Rng rng(8);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<SetEntry> s;
    const std::size_t K = 1 + rng.below(10);
    for (std::size_t i = 0; i < K; ++i) s.push_back(valid("c" + std::to_string(rng.below(5))));
    auto replaced = s;
    // turn a singleton class into a duplicate of another class
    const std::size_t victim = rng.below(K);
    std::set<std::string> others;
    for (std::size_t i = 0; i < K; ++i) {
      if (i != victim) others.insert(s[i].fingerprint);
    }
    if (others.empty() || others.count(s[victim].fingerprint)) continue;
    replaced[victim] = valid(*others.begin());
    EXPECT_LT(div_fixed(replaced), div_fixed(s));
  }
}

TEST(DivPair, PermutationInvariant) {
  std::vector<SetEntry> s = {valid("A"), invalid(), valid("B"), valid("A"), invalid(), valid("C")};
  const double f = div_fixed(s), p = div_pair(s).value;
  std::sort(s.begin(), s.end(), [](const SetEntry& a, const SetEntry& b) {
    return std::tie(a.valid, a.fingerprint) < std::tie(b.valid, b.fingerprint);
  });
  do {
    EXPECT_EQ(div_fixed(s), f);
    EXPECT_EQ(div_pair(s).value, p);
  } while (std::next_permutation(s.begin(), s.end(), [](const SetEntry& a, const SetEntry& b) {
    return std::tie(a.valid, a.fingerprint) < std::tie(b.valid, b.fingerprint);
  }));
}

TEST(Aggregation, AvgDivAndEfficiency) {
  const std::vector<DiversityScore> s = {score("p1", 0.0), score("p2", 1.0)};
  EXPECT_EQ(avg_div(s), 0.5);
  const std::vector<DiversityScore> mixed = {score("p1", 0.0),
                                             score("p2", 1.0, MetricKind::Lexical)};
  try {
    avg_div(mixed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HeterogeneousScores);
  }
  EXPECT_THROW(avg_div(std::span<const DiversityScore>{}), Error);
  EXPECT_DOUBLE_EQ(parameter_efficiency(0.32, 8.0), 0.04);
  EXPECT_THROW(parameter_efficiency(0.3, 0.0), Error);
  EXPECT_THROW(parameter_efficiency(0.3, -1.0), Error);
}

TEST(Scores, SerializeRoundTrip) {
  DiversityScore s = score("p1", 0.1 + 0.2, MetricKind::NlSoft);
  s.config.template_kind = TemplateKind::TwoShot;
  s.config.temperature = 0.7;
  s.config.seed = 3;
  s.pairs_evaluated = 32;
  s.seed = 0xfedcba9876543210ull;
  const auto line = serialize_score(s);
  EXPECT_EQ(line.rfind("{\"problem_id\":\"p1\",\"model_id\":\"m\",\"template_kind\":", 0), 0u);
  const auto back = parse_scores(line + "\n");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], s);
  for (auto m : {MetricKind::SemanticFixed, MetricKind::SemanticPair, MetricKind::Lexical,
                 MetricKind::Syntactic, MetricKind::Neural, MetricKind::NlSoft, MetricKind::NlHard,
                 MetricKind::ValidityRate}) {
    EXPECT_EQ(parse_metric_kind(to_string(m)), m);
  }
}

TEST(Convergence, SingleClass) {
  const ClusterDistribution one({1.0});
  for (std::size_t n : {2u, 10u, 100u}) {
    const auto r = simulate_convergence(one, n, 1);
    EXPECT_EQ(r.div_pair, 0.0);
    EXPECT_EQ(r.div_fixed, 1.0 / static_cast<double>(n));
  }
}

TEST(Convergence, TwoEqualClasses) {
  const ClusterDistribution d({0.5, 0.5});
  EXPECT_DOUBLE_EQ(d.pair_limit(), 0.5);
  const auto r = simulate_convergence(d, 2000, 17);
  EXPECT_NEAR(r.div_pair, 0.5, 0.02);
  EXPECT_LE(r.div_fixed, 2.0 / 2000.0);
  EXPECT_EQ(simulate_convergence(d, 2000, 17).div_pair, r.div_pair);
}

TEST(Convergence, InvalidDistributions) {
  for (auto bad : std::vector<std::vector<double>>{{}, {0.5, 0.4}, {1.2, -0.2}, {0.5, 0.5, 0.0}}) {
    try {
      ClusterDistribution d(bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidDistribution);
    }
  }
}

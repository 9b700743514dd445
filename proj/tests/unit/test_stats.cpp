#include <gtest/gtest.h>

#include <cmath>

#include "esdiv/error.hpp"
#include "esdiv/rng.hpp"
#include "esdiv/stats.hpp"

using namespace esdiv;

namespace {

PairedSample from_diffs(const std::vector<double>& d, double base = 0.0) {
  PairedSample s;
  for (std::size_t i = 0; i < d.size(); ++i) {
    s.labels.push_back("c" + std::to_string(i));
    s.a.push_back(base);
    s.b.push_back(base + d[i]);
  }
  return s;
}

// Enumerates every sign assignment of the ranks.
double enumeration_p(const std::vector<double>& ranks, double w) {
  const std::size_t n = ranks.size();
  double total = 0.0;
  for (double r : ranks) total += r;
  long hits = 0;
  for (unsigned long mask = 0; mask < (1ul << n); ++mask) {
    double plus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) plus += ranks[i];
    }
    if (std::min(plus, total - plus) <= w + 1e-9) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(1ul << n);
}

DiversityScore cell(std::string problem, TemplateKind t, double v,
                    MetricKind m = MetricKind::SemanticFixed) {
  DiversityScore s;
  s.problem_id = std::move(problem);
  s.model_id = "m";
  s.config.template_kind = t;
  s.metric = m;
  s.value = v;
  return s;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

}  // namespace

TEST(Wilcoxon, FiveAllPositive) {
  const auto r = wilcoxon_signed_rank(from_diffs({0.1, 0.2, 0.3, 0.4, 0.5}));
  EXPECT_EQ(r.w, 0.0);
  EXPECT_EQ(r.w_plus, 15.0);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.p, 0.0625);
}

TEST(Wilcoxon, AverageRanksWithTies) {
  const std::vector<double> v = {3.0, 1.0, 3.0, 2.0, 3.0};
  EXPECT_EQ(average_ranks(v), (std::vector<double>{4.0, 1.0, 4.0, 2.0, 4.0}));
  const std::vector<double> near = {0.1 + 0.2, 0.3};
  EXPECT_EQ(average_ranks(near), (std::vector<double>{1.5, 1.5}));
}

TEST(Wilcoxon, ExactMatchesEnumeration) {
  Rng rng(99);
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t n = 5 + rng.below(8);
    std::vector<double> d;
    while (d.size() < n) {
      const double v = static_cast<double>(static_cast<int>(rng.below(9)) - 4) / 4.0;
      if (v != 0.0) d.push_back(v);
    }
    const auto r = wilcoxon_signed_rank(from_diffs(d));
    std::vector<double> abs_d;
    for (double x : d) abs_d.push_back(std::abs(x));
    EXPECT_DOUBLE_EQ(r.p, enumeration_p(average_ranks(abs_d), r.w));
  }
}

TEST(Wilcoxon, NormalApproximationNearExact) {
  for (std::size_t n : {20u, 25u}) {
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n; ++i) ranks[i] = static_cast<double>(i + 1);
    const double total = static_cast<double>(n * (n + 1) / 2);
    for (double w = 0; w <= total / 2; w += 1.0) {
      EXPECT_NEAR(wilcoxon_normal_p(ranks, w), wilcoxon_exact_p(ranks, w), 0.01) << n << " " << w;
    }
  }
}

TEST(Wilcoxon, LargeSamplesUseApproximation) {
  std::vector<double> d;
  for (int i = 0; i < 30; ++i) d.push_back((i % 3 == 0 ? -1.0 : 1.0) * (i + 1));
  const auto r = wilcoxon_signed_rank(from_diffs(d));
  EXPECT_FALSE(r.exact);
  EXPECT_GT(r.p, 0.0);
  EXPECT_LE(r.p, 1.0);
}

TEST(Wilcoxon, ZeroHandling) {
  EXPECT_EQ(code_of([] { wilcoxon_signed_rank(from_diffs({0, 0, 0, 0, 0, 0})); }),
            ErrorCode::AllZeroDifferences);
  EXPECT_EQ(code_of([] { wilcoxon_signed_rank(from_diffs({1, 2, 0, 0, 3, 4})); }),
            ErrorCode::TooFewPairs);
  const auto r = wilcoxon_signed_rank(from_diffs({1, 2, 0, 3, 4, 5}));
  EXPECT_EQ(r.dropped_zero, 1u);
  EXPECT_EQ(r.n_used, 5u);
}

TEST(Wilcoxon, SwappingSidesSwapsSums) {
  Rng rng(12);
  for (int iter = 0; iter < 50; ++iter) {
    PairedSample s;
    for (int i = 0; i < 9; ++i) {
      s.a.push_back(rng.uniform());
      s.b.push_back(rng.uniform());
    }
    PairedSample swapped{s.labels, s.b, s.a};
    const auto x = wilcoxon_signed_rank(s), y = wilcoxon_signed_rank(swapped);
    EXPECT_EQ(x.w_plus, y.w_minus);
    EXPECT_EQ(x.w, y.w);
    EXPECT_EQ(x.p, y.p);
  }
}

TEST(CohensD, HandExample) {
  EXPECT_DOUBLE_EQ(cohens_d(from_diffs({1, 1, 1, -1})), 0.5);
}

TEST(CohensD, TranslationAndScaleInvariance) {
  Rng rng(21);
  for (int iter = 0; iter < 200; ++iter) {
    PairedSample s;
    for (int i = 0; i < 10; ++i) {
      s.a.push_back(rng.uniform());
      s.b.push_back(rng.uniform());
    }
    const double d = cohens_d(s);
    const double shift = rng.uniform() * 10 - 5, scale = 0.1 + rng.uniform() * 10;
    PairedSample shifted = s, scaled = s;
    for (int i = 0; i < 10; ++i) {
      shifted.a[i] += shift;
      shifted.b[i] += shift;
      scaled.a[i] *= scale;
      scaled.b[i] *= scale;
    }
    EXPECT_NEAR(cohens_d(shifted), d, 1e-9 * std::max(1.0, std::abs(d)));
    EXPECT_NEAR(cohens_d(scaled), d, 1e-9 * std::max(1.0, std::abs(d)));
    EXPECT_NEAR(cohens_d(PairedSample{s.labels, s.b, s.a}), -d, 1e-12);
  }
}

TEST(CohensD, Degenerate) {
  EXPECT_EQ(code_of([] { cohens_d(from_diffs({0.5, 0.5, 0.5})); }), ErrorCode::ZeroVariance);
  EXPECT_EQ(code_of([] { cohens_d(from_diffs({0.5})); }), ErrorCode::TooFewPairs);
}

TEST(Compare, UniformUpliftAcrossSixCells) {
  std::vector<DiversityScore> a, b;
  for (int i = 0; i < 3; ++i) {
    for (auto t : {TemplateKind::ZeroShot, TemplateKind::TwoShot}) {
      const double base = 0.1 * i + (t == TemplateKind::TwoShot ? 0.05 : 0.0);
      a.push_back(cell("p" + std::to_string(i), t, base));
      b.push_back(cell("p" + std::to_string(i), t, base + 0.1));
    }
  }
  const auto pairing = parse_pairing("problem_id,template_kind");
  const auto rows = compare_models(a, b, pairing, "A", "B");
  ASSERT_EQ(rows.size(), 1u);
  const auto& r = rows[0];
  EXPECT_EQ(r.comparison, "A vs B");
  EXPECT_EQ(r.n_pairs, 6u);
  EXPECT_EQ(r.winner, "B");
  EXPECT_EQ(*r.p, 2.0 / 64.0);
  EXPECT_TRUE(r.significant);
  EXPECT_FALSE(r.d.has_value());
  EXPECT_EQ(r.note, "zero variance");
  EXPECT_EQ(comparison_csv_row(r), "A vs B,semantic_fixed,0.03125,,B,6,true,false,0,0,zero variance");
}

TEST(Compare, CellsAreAveragedAndMetricsSeparated) {
  std::vector<DiversityScore> a, b;
  for (int i = 0; i < 6; ++i) {
    const auto p = "p" + std::to_string(i);
    a.push_back(cell(p, TemplateKind::ZeroShot, 0.2));
    a.push_back(cell(p, TemplateKind::TwoShot, 0.4));  // averaged with the row above
    b.push_back(cell(p, TemplateKind::ZeroShot, 0.1 * i));
    a.push_back(cell(p, TemplateKind::ZeroShot, 0.5, MetricKind::Lexical));
    b.push_back(cell(p, TemplateKind::ZeroShot, 0.5, MetricKind::Lexical));
  }
  const auto pairing = parse_pairing("problem_id");
  const auto rows = compare_models(a, b, pairing, "A", "B");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].metric, MetricKind::SemanticFixed);
  EXPECT_EQ(rows[0].dropped_zero, 1u);  // p3 averages to 0.3 on both sides
  EXPECT_EQ(rows[0].note, "");
  EXPECT_EQ(rows[1].metric, MetricKind::Lexical);
  EXPECT_EQ(rows[1].note, "no difference");
  EXPECT_EQ(rows[1].winner, "none");
  EXPECT_FALSE(rows[1].p.has_value());
}

TEST(Compare, PairingFailureNamesCells) {
  std::vector<DiversityScore> a = {cell("p1", TemplateKind::ZeroShot, 0.1),
                                   cell("p2", TemplateKind::ZeroShot, 0.1)};
  std::vector<DiversityScore> b = {cell("p1", TemplateKind::ZeroShot, 0.1)};
  const auto pairing = parse_pairing("problem_id, template_kind");
  try {
    compare_models(a, b, pairing, "A", "B");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PairingFailure);
    EXPECT_NE(std::string(e.what()).find("problem_id=p2,template_kind=zero_shot"),
              std::string::npos);
  }
  EXPECT_THROW(parse_pairing("problem_id,colour"), Error);
}

TEST(Compare, CsvQuoting) {
  ComparisonRow r;
  r.comparison = "a,b vs c";
  r.metric = MetricKind::Lexical;
  r.winner = "none";
  r.note = "too few pairs";
  EXPECT_EQ(comparison_csv_row(r), "\"a,b vs c\",lexical,,,none,0,false,false,,0,too few pairs");
  EXPECT_EQ(comparison_csv_header(),
            "comparison,metric,W_p,ES_d,winner,n_pairs,significant,large_effect,W,dropped_zero,note");
}

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "esdiv/error.hpp"
#include "esdiv/kernels.hpp"

using namespace esdiv;

namespace {

TokenStream stream(std::initializer_list<const char*> toks) {
  TokenStream s;
  for (auto t : toks) s.tokens.emplace_back(t);
  return s;
}

// Independent n-gram counter over token vectors.
double brute_lexical(const TokenStream& a, const TokenStream& b, int n) {
  std::set<std::vector<std::string>> unique;
  std::size_t total = 0;
  for (const auto* s : {&a, &b}) {
    for (std::size_t i = 0; i + n <= s->tokens.size(); ++i) {
      unique.insert(std::vector<std::string>(s->tokens.begin() + i, s->tokens.begin() + i + n));
      ++total;
    }
  }
  return total ? static_cast<double>(unique.size()) / static_cast<double>(total) : 0.0;
}

FragmentMultiset fragments_of(const std::string& src) {
  auto r = canonicalize_ast(src);
  EXPECT_TRUE(std::holds_alternative<CanonicalAst>(r)) << src;
  return extract_fragments(std::get<CanonicalAst>(r));
}

python::AstNode node(std::string kind, std::vector<python::AstNode> children = {}) {
  return python::AstNode{std::move(kind), "", std::move(children)};
}

}  // namespace

TEST(Lexical, IdenticalAllUniqueStreamsGiveHalf) {
  const auto x = stream({"a", "b", "c", "d", "e", "f"});  // 3 distinct 4-grams
  EXPECT_DOUBLE_EQ(pair_lexical_distance(x, x), 0.5);
}

TEST(Lexical, DisjointStreamsGiveOne) {
  EXPECT_DOUBLE_EQ(pair_lexical_distance(stream({"a", "b", "c", "d", "e"}),
                                         stream({"v", "w", "x", "y", "z"})),
                   1.0);
}

TEST(Lexical, ShortStreamsGiveZero) {
  EXPECT_EQ(pair_lexical_distance(stream({"a", "b", "c"}), stream({"x"})), 0.0);
  EXPECT_EQ(pair_lexical_distance(TokenStream{}, TokenStream{}), 0.0);
  // one long stream still counts on its own
  EXPECT_DOUBLE_EQ(pair_lexical_distance(stream({"a", "b", "c", "d", "a", "b", "c", "d"}),
                                         stream({"x"})),
                   4.0 / 5.0);
}

TEST(Lexical, SelfPairIsHalfTheDistinctRatio) {
  std::mt19937 rng(11);
  for (int iter = 0; iter < 200; ++iter) {
    TokenStream s;
    const int len = static_cast<int>(rng() % 40);
    for (int i = 0; i < len; ++i) s.tokens.push_back(std::string(1, static_cast<char>('a' + rng() % 3)));
    EXPECT_EQ(pair_lexical_distance(s, s), distinct_ratio(s) / 2.0);
  }
}

TEST(Lexical, AgreesWithBruteForceAndIsSymmetric) {
  std::mt19937 rng(5);
  for (int iter = 0; iter < 500; ++iter) {
    TokenStream a, b;
    for (int i = 0, n = static_cast<int>(rng() % 30); i < n; ++i) a.tokens.push_back(std::to_string(rng() % 4));
    for (int i = 0, n = static_cast<int>(rng() % 30); i < n; ++i) b.tokens.push_back(std::to_string(rng() % 4));
    for (int n : {1, 2, 4}) {
      const double d = pair_lexical_distance(a, b, n);
      EXPECT_DOUBLE_EQ(d, brute_lexical(a, b, n));
      EXPECT_EQ(d, pair_lexical_distance(b, a, n));
      EXPECT_GE(d, 0.0);
      EXPECT_LE(d, 1.0);
    }
  }
}

TEST(Lexical, ExpectationAdjustment) {
  const auto a = stream({"a", "b", "c", "d", "e"});
  const auto b = stream({"a", "b", "c", "d", "x"});
  // C = 4 n-grams, 3 unique; V = 10: expected = 10 * (1 - 0.9^4) = 3.439
  EXPECT_NEAR(pair_lexical_distance(a, b, 4, 10), 3.0 / 3.439, 1e-12);
  // a vocabulary no larger than the observed types saturates at 1
  EXPECT_EQ(pair_lexical_distance(a, b, 4, 3), 1.0);
  EXPECT_EQ(pair_lexical_distance(a, b, 4, 1), 1.0);
  const std::vector<TokenStream> set = {a, b, stream({"q", "r"})};
  EXPECT_EQ(distinct_ngram_count(set, 4), 3u);
  EXPECT_THROW(pair_lexical_distance(a, b, 0), Error);
}

TEST(Syntactic, AlphaEquivalentLambdas) {
  EXPECT_EQ(canonicalize_ast("lambda X: -X\n"), canonicalize_ast("lambda Y: -Y\n"));
  EXPECT_NE(canonicalize_ast("lambda X: -X\n"), canonicalize_ast("lambda X: +X\n"));
}

TEST(Syntactic, LiteralsCanonicalize) {
  EXPECT_EQ(canonicalize_ast("x = 3\n"), canonicalize_ast("y = 99\n"));
  EXPECT_EQ(canonicalize_ast("x = 'a'\n"), canonicalize_ast("z = \"bcd\"\n"));
  EXPECT_NE(canonicalize_ast("x = 3\n"), canonicalize_ast("x = 'a'\n"));
  const auto c = std::get<CanonicalAst>(canonicalize_ast("x = 3\n"));
  EXPECT_EQ(python::dump(c.root), "Module(Assign(Name(VAR_0) Constant(NUM)))");
}

TEST(Syntactic, FirstOccurrenceOrder) {
  const auto a = std::get<CanonicalAst>(canonicalize_ast("b = a\na = b\n"));
  EXPECT_EQ(python::dump(a.root), "Module(Assign(Name(VAR_0) Name(VAR_1)) Assign(Name(VAR_1) Name(VAR_0)))");
  // swapping roles of names is a renaming; a different binding pattern is not
  EXPECT_EQ(canonicalize_ast("b = a\na = b\n"), canonicalize_ast("q = p\np = q\n"));
  EXPECT_NE(canonicalize_ast("b = a\na = b\n"), canonicalize_ast("b = a\nb = a\n"));
}

TEST(Syntactic, UnparseableIsSyntaxInvalid) {
  EXPECT_TRUE(std::holds_alternative<SyntaxInvalid>(canonicalize_ast("def f(")));
}

TEST(Fragments, SingleNode) {
  const auto m = extract_fragments(CanonicalAst{node("Pass")});
  EXPECT_EQ(m.total(), 1u);
  EXPECT_EQ(m.counts.at("Pass"), 1u);
}

TEST(Fragments, PerfectBinaryTreeOfDepthTwo) {
  const auto leaf = node("L");
  const auto tree = node("R", {node("M", {leaf, leaf}), node("M", {leaf, leaf})});
  const auto m = extract_fragments(CanonicalAst{tree});
  EXPECT_EQ(m.total(), 7u);
  EXPECT_EQ(m.counts.at("R(M(L,L),M(L,L))"), 1u);
  EXPECT_EQ(m.counts.at("M(L,L)"), 2u);
  EXPECT_EQ(m.counts.at("L"), 4u);
  EXPECT_EQ(m.counts.size(), 3u);
}

TEST(Fragments, TruncationMarkerDiffersFromLeaf) {
  const auto deep = node("A", {node("B", {node("C", {node("D", {node("E")})})})});
  EXPECT_EQ(fragment_at(deep, 4), "A(B(C(D(~))))");
  EXPECT_EQ(fragment_at(deep, 2), "A(B(~))");
  const auto shallow = node("A", {node("B")});
  EXPECT_EQ(fragment_at(shallow, 2), "A(B)");
  EXPECT_NE(fragment_at(deep, 2), fragment_at(shallow, 2));
  EXPECT_EQ(extract_fragments(CanonicalAst{deep}, 4).total(), 5u);
  EXPECT_THROW(extract_fragments(CanonicalAst{deep}, 0), Error);
}

TEST(Fragments, IdenticalTreesIdenticalMultisets) {
  EXPECT_EQ(fragments_of("def f(N):\n    print(N)\n"), fragments_of("def f(N):\n    print(N)\n"));
}

// Hand enumeration for `a = 1; b = 2; c = 3` (one statement per line):
// 16 nodes; distinct fragments: Module(...), 3 Assign(...), 3 Name(VAR_i), 3 VAR_i,
// Constant(NUM), NUM = 12.
TEST(SyntacticDistance, ThreeStatementSelfPair) {
  const auto m = fragments_of("a = 1\nb = 2\nc = 3\n");
  EXPECT_EQ(m.total(), 16u);
  EXPECT_EQ(m.counts.size(), 12u);
  EXPECT_DOUBLE_EQ(pair_syntactic_distance(m, m), 12.0 / 32.0);
}

TEST(SyntacticDistance, DisjointAndDegenerate) {
  FragmentMultiset a, b;
  a.counts = {{"x", 1}, {"y", 1}};
  b.counts = {{"z", 1}};
  EXPECT_EQ(pair_syntactic_distance(a, b), 1.0);
  EXPECT_EQ(pair_syntactic_distance(FragmentMultiset{}, FragmentMultiset{}), 0.0);
}

TEST(SyntacticDistance, RenamedCopyMatchesSelf) {
  const auto g = fragments_of("def f(N):\n    total = 0\n    for i in range(N):\n        total += i\n    print(total)\n");
  const auto r = fragments_of("def f(M):\n    acc = 0\n    for k in range(M):\n        acc += k\n    print(acc)\n");
  EXPECT_EQ(pair_syntactic_distance(g, r), pair_syntactic_distance(g, g));
  EXPECT_EQ(g, r);
}

TEST(Neural, Examples) {
  const std::vector<double> a{1.0, 2.0, -3.0};
  const std::vector<double> neg{-1.0, -2.0, 3.0};
  EXPECT_NEAR(pair_neural_distance(a, a), 0.0, 1e-15);
  EXPECT_NEAR(pair_neural_distance(a, neg), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(pair_neural_distance(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.5);
}

TEST(Neural, ScaleInvariantAndSymmetric) {
  std::mt19937 rng(9);
  std::normal_distribution<double> nd;
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<double> a(8), b(8), a_scaled(8);
    const double c = 0.01 + (rng() % 1000) / 10.0;
    for (int i = 0; i < 8; ++i) {
      a[i] = nd(rng);
      b[i] = nd(rng);
      a_scaled[i] = a[i] * c;
    }
    const double d = pair_neural_distance(a, b);
    EXPECT_NEAR(pair_neural_distance(a_scaled, b), d, 1e-12);
    EXPECT_EQ(pair_neural_distance(b, a), d);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
  }
}

TEST(Neural, Errors) {
  try {
    pair_neural_distance(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  try {
    pair_neural_distance(std::vector<double>{0, 0}, std::vector<double>{1, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVector);
  }
}

TEST(Embeddings, ParseAndValidate) {
  const auto t = parse_embeddings(
      "{\"generation_id\":\"g1\",\"vector\":[1,0]}\n{\"generation_id\":\"g2\",\"vector\":[0.5,0.5]}\n");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.at("g2"), (std::vector<double>{0.5, 0.5}));
  EXPECT_THROW(parse_embeddings("{\"generation_id\":\"g1\",\"vector\":[1]}\n"
                                "{\"generation_id\":\"g2\",\"vector\":[1,2]}\n"),
               Error);
  EXPECT_THROW(parse_embeddings("{\"generation_id\":\"g1\",\"vector\":[1]}\n"
                                "{\"generation_id\":\"g1\",\"vector\":[2]}\n"),
               Error);
  EXPECT_THROW(parse_embeddings("{\"generation_id\":\"g1\",\"vector\":[\"x\"]}\n"), Error);
}

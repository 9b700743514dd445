#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "esdiv/python_ast.hpp"

namespace esdiv {

// ---------------------------------------------------------------------------
// Lexical kernel: expectation-adjusted distinct n-grams over a pair.

struct TokenStream {
  std::vector<std::string> tokens;

  bool operator==(const TokenStream&) const = default;
};

/// Error-tolerant tokenization; comments are dropped and literals kept whole.
TokenStream tokenize(std::string_view source);

inline constexpr int kDefaultNgram = 4;

/// Number of distinct n-grams across all streams; the vocabulary estimate used
/// by the expectation adjustment.
std::size_t distinct_ngram_count(std::span<const TokenStream> streams, int n = kDefaultNgram);

/// Unique-to-total n-gram ratio of a single stream (0 when it has no n-gram).
double distinct_ratio(const TokenStream& s, int n = kDefaultNgram);

/// Distinct n-grams of the pair divided by total n-grams (n-grams never span the
/// boundary between the two streams). With `vocabulary` > 0 the count of unique
/// n-grams is instead divided by its expectation under uniform draws from that
/// many types, V * (1 - ((V-1)/V)^C), and clamped to [0, 1]. Returns 0 when
/// neither stream has n tokens.
double pair_lexical_distance(const TokenStream& a, const TokenStream& b, int n = kDefaultNgram,
                             std::size_t vocabulary = 0);

// ---------------------------------------------------------------------------
// Syntactic kernel: distinct canonical AST fragments over a pair.

/// Parse tree with identifiers renamed VAR_0, VAR_1, ... by first occurrence and
/// numeric/string literals replaced by NUM/STR. Nodes carry a kind only.
struct CanonicalAst {
  python::AstNode root;

  bool operator==(const CanonicalAst&) const = default;
};

struct SyntaxInvalid {
  bool operator==(const SyntaxInvalid&) const = default;
};

using CanonicalizeResult = std::variant<CanonicalAst, SyntaxInvalid>;

CanonicalizeResult canonicalize_ast(std::string_view source);
CanonicalAst canonicalize(python::AstNode tree);

inline constexpr int kDefaultFragmentHeight = 4;

struct FragmentMultiset {
  std::map<std::string, std::size_t> counts;
  int height = kDefaultFragmentHeight;

  std::size_t total() const;
  bool operator==(const FragmentMultiset&) const = default;
};

/// Serialization of the subtree rooted at `node`, truncated to `height` levels.
/// Truncated nodes render as `Kind(~)`, leaves as `Kind`.
std::string fragment_at(const python::AstNode& node, int height);

/// One fragment per node of the tree.
FragmentMultiset extract_fragments(const CanonicalAst& ast, int height = kDefaultFragmentHeight);

double pair_syntactic_distance(const FragmentMultiset& a, const FragmentMultiset& b);

// ---------------------------------------------------------------------------
// Neural kernel: cosine distance between externally produced embeddings.

double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// (1 - cos) / 2. Throws DimensionMismatch or ZeroVector.
double pair_neural_distance(std::span<const double> a, std::span<const double> b);

using EmbeddingTable = std::unordered_map<std::string, std::vector<double>>;

/// Reads `embeddings.jsonl` ({generation_id, vector}); all vectors share one dimension.
EmbeddingTable load_embeddings(const std::filesystem::path& path);
EmbeddingTable parse_embeddings(std::string_view jsonl);

}  // namespace esdiv

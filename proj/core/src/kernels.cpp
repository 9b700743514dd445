#include "esdiv/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "esdiv/corpus.hpp"
#include "esdiv/error.hpp"
#include "esdiv/python_lexer.hpp"
#include "jsonl.hpp"

namespace esdiv {

TokenStream tokenize(std::string_view source) {
  TokenStream out;
  for (auto& t : python::lex(source).tokens) {
    switch (t.kind) {
      case python::TokenKind::Name:
      case python::TokenKind::Number:
      case python::TokenKind::String:
      case python::TokenKind::Op:
      case python::TokenKind::Unknown:
        out.tokens.push_back(std::move(t.text));
        break;
      default:
        break;
    }
  }
  return out;
}

namespace {

void collect_ngrams(const TokenStream& s, int n, std::vector<std::string>& out) {
  const auto& t = s.tokens;
  const auto width = static_cast<std::size_t>(n);
  if (t.size() < width) return;
  for (std::size_t i = 0; i + width <= t.size(); ++i) {
    std::string gram = t[i];
    for (std::size_t k = 1; k < width; ++k) {
      gram += '\x1f';
      gram += t[i + k];
    }
    out.push_back(std::move(gram));
  }
}

void require_positive_n(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n-gram length must be >= 1");
}

}  // namespace

std::size_t distinct_ngram_count(std::span<const TokenStream> streams, int n) {
  require_positive_n(n);
  std::vector<std::string> grams;
  for (const auto& s : streams) collect_ngrams(s, n, grams);
  return std::unordered_set<std::string>(grams.begin(), grams.end()).size();
}

double distinct_ratio(const TokenStream& s, int n) {
  require_positive_n(n);
  std::vector<std::string> grams;
  collect_ngrams(s, n, grams);
  if (grams.empty()) return 0.0;
  const std::size_t unique = std::unordered_set<std::string>(grams.begin(), grams.end()).size();
  return static_cast<double>(unique) / static_cast<double>(grams.size());
}

double pair_lexical_distance(const TokenStream& a, const TokenStream& b, int n,
                             std::size_t vocabulary) {
  require_positive_n(n);
  std::vector<std::string> grams;
  collect_ngrams(a, n, grams);
  collect_ngrams(b, n, grams);
  if (grams.empty()) return 0.0;
  const double unique =
      static_cast<double>(std::unordered_set<std::string>(grams.begin(), grams.end()).size());
  const double total = static_cast<double>(grams.size());
  if (vocabulary == 0) return unique / total;
  const double v = static_cast<double>(vocabulary);
  const double expected = v * (1.0 - std::pow((v - 1.0) / v, total));
  return std::clamp(unique / expected, 0.0, 1.0);
}

// ---------------------------------------------------------------------------

namespace {

class Canonicalizer {
 public:
  python::AstNode rewrite(python::AstNode node) {
    if (node.kind == "id") {
      auto [it, inserted] = names_.try_emplace(node.value, names_.size());
      node.kind = "VAR_" + std::to_string(it->second);
      node.value.clear();
    } else if (node.kind == "num") {
      node.kind = "NUM";
      node.value.clear();
    } else if (node.kind == "str") {
      node.kind = "STR";
      node.value.clear();
    } else if (!node.value.empty()) {
      node.kind += "_" + node.value;
      node.value.clear();
    }
    for (auto& c : node.children) c = rewrite(std::move(c));
    return node;
  }

 private:
  std::unordered_map<std::string, std::size_t> names_;
};

void fragment_into(const python::AstNode& node, int height, std::string& out) {
  out += node.kind;
  if (node.children.empty()) return;
  if (height <= 1) {
    out += "(~)";
    return;
  }
  out += '(';
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    if (i) out += ',';
    fragment_into(node.children[i], height - 1, out);
  }
  out += ')';
}

void collect_fragments(const python::AstNode& node, int height, FragmentMultiset& into) {
  ++into.counts[fragment_at(node, height)];
  for (const auto& c : node.children) collect_fragments(c, height, into);
}

}  // namespace

CanonicalAst canonicalize(python::AstNode tree) {
  return CanonicalAst{Canonicalizer().rewrite(std::move(tree))};
}

CanonicalizeResult canonicalize_ast(std::string_view source) {
  auto tree = python::parse_module(source);
  if (!tree) return SyntaxInvalid{};
  return canonicalize(std::move(*tree));
}

std::size_t FragmentMultiset::total() const {
  std::size_t t = 0;
  for (const auto& [_, c] : counts) t += c;
  return t;
}

std::string fragment_at(const python::AstNode& node, int height) {
  std::string out;
  fragment_into(node, height, out);
  return out;
}

FragmentMultiset extract_fragments(const CanonicalAst& ast, int height) {
  if (height < 1) throw Error(ErrorCode::InvalidArgument, "fragment height must be >= 1");
  FragmentMultiset m;
  m.height = height;
  collect_fragments(ast.root, height, m);
  return m;
}

double pair_syntactic_distance(const FragmentMultiset& a, const FragmentMultiset& b) {
  const std::size_t total = a.total() + b.total();
  if (total == 0) return 0.0;
  std::size_t distinct = a.counts.size();
  for (const auto& [key, _] : b.counts) {
    if (!a.counts.count(key)) ++distinct;
  }
  return static_cast<double>(distinct) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(a.size()) + " vs " +
                                                  std::to_string(b.size()));
  }
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "embedding has zero norm");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double pair_neural_distance(std::span<const double> a, std::span<const double> b) {
  return std::clamp((1.0 - cosine_similarity(a, b)) / 2.0, 0.0, 1.0);
}

EmbeddingTable parse_embeddings(std::string_view jsonl) {
  EmbeddingTable table;
  std::size_t dim = 0;
  detail::for_each_json_line(jsonl, [&](const nlohmann::json& j, std::size_t line_no) {
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (!j.is_object() || !j.contains("generation_id") || !j["generation_id"].is_string() ||
        !j.contains("vector") || !j["vector"].is_array()) {
      throw Error(ErrorCode::MalformedRecord, where + "expected {generation_id, vector}");
    }
    std::vector<double> v;
    for (const auto& x : j["vector"]) {
      if (!x.is_number()) throw Error(ErrorCode::MalformedRecord, where + "non-numeric vector entry");
      v.push_back(x.get<double>());
    }
    if (table.empty()) {
      dim = v.size();
    } else if (v.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, where + "vector dimension " +
                                                    std::to_string(v.size()) + ", file uses " +
                                                    std::to_string(dim));
    }
    auto id = j["generation_id"].get<std::string>();
    if (!table.emplace(id, std::move(v)).second) {
      throw Error(ErrorCode::MalformedRecord, where + "duplicate generation_id '" + id + "'");
    }
  });
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  return parse_embeddings(read_file(path));
}

}  // namespace esdiv

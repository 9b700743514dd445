#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace esdiv::python {

/// Generic syntax tree node. Node kinds follow the names of CPython's `ast`
/// classes (Module, FunctionDef, BinOp, Name, ...). Identifier leaves have kind
/// "id", literal leaves "num" or "str"; their source text is kept in `value`.
/// Expression contexts (Load/Store) are not represented.
struct AstNode {
  std::string kind;
  std::string value;
  std::vector<AstNode> children;

  bool operator==(const AstNode&) const = default;

  std::size_t size() const;
};

/// Parses a module. Returns nullopt on any lexical or syntax error.
std::optional<AstNode> parse_module(std::string_view source);

/// Readable s-expression rendering, for diagnostics and tests.
std::string dump(const AstNode& node);

}  // namespace esdiv::python

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace esdiv::python {

enum class TokenKind { Name, Number, String, Op, Newline, Indent, Dedent, EndMarker, Unknown };

struct Token {
  TokenKind kind;
  std::string text;
  int line = 0;
};

struct LexResult {
  std::vector<Token> tokens;
  // Set on unterminated strings, stray characters, or inconsistent dedents.
  // Lexing still completes so the token stream is usable for lexical metrics.
  bool had_error = false;
};

/// Error-tolerant lexer producing layout tokens (NEWLINE/INDENT/DEDENT) as the
/// grammar expects. Comments are dropped.
LexResult lex(std::string_view source);

}  // namespace esdiv::python

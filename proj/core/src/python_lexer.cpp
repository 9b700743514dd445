#include "esdiv/python_lexer.hpp"

#include <array>
#include <cctype>

namespace esdiv::python {
namespace {

bool is_name_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_name_char(unsigned char c) { return is_name_start(c) || std::isdigit(c); }

constexpr std::array<std::string_view, 24> kMultiCharOps = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=",
    ">=",  "==",  "!=",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "@="};
constexpr std::string_view kSingleCharOps = "+-*/%@&|^~<>()[]{},:.;=";

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  LexResult run() {
    indents_.push_back(0);
    bool at_line_start = true;
    while (pos_ < src_.size()) {
      if (at_line_start && depth_ == 0) {
        if (!handle_indentation()) continue;
        at_line_start = false;
      }
      const char c = src_[pos_];
      if (c == '\n') {
        ++pos_;
        if (depth_ == 0 && !result_.tokens.empty() &&
            result_.tokens.back().kind != TokenKind::Newline &&
            result_.tokens.back().kind != TokenKind::Indent &&
            result_.tokens.back().kind != TokenKind::Dedent) {
          emit(TokenKind::Newline, "");
        }
        ++line_;
        at_line_start = depth_ == 0;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
        ++pos_;
        continue;
      }
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      if (c == '\\' && pos_ + 1 < src_.size() &&
          (src_[pos_ + 1] == '\n' || (src_[pos_ + 1] == '\r' && pos_ + 2 < src_.size() &&
                                      src_[pos_ + 2] == '\n'))) {
        pos_ += src_[pos_ + 1] == '\n' ? 2 : 3;
        ++line_;
        continue;
      }
      if (try_string()) continue;
      if (is_name_start(static_cast<unsigned char>(c))) {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && is_name_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        emit(TokenKind::Name, std::string(src_.substr(start, pos_ - start)));
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && pos_ + 1 < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        lex_number();
        continue;
      }
      if (lex_operator()) continue;
      result_.had_error = true;
      emit(TokenKind::Unknown, std::string(1, c));
      ++pos_;
    }
    if (!result_.tokens.empty() && result_.tokens.back().kind != TokenKind::Newline &&
        result_.tokens.back().kind != TokenKind::Dedent &&
        result_.tokens.back().kind != TokenKind::Indent) {
      emit(TokenKind::Newline, "");
    }
    if (depth_ != 0) result_.had_error = true;
    while (indents_.size() > 1) {
      indents_.pop_back();
      emit(TokenKind::Dedent, "");
    }
    emit(TokenKind::EndMarker, "");
    return std::move(result_);
  }

 private:
  void emit(TokenKind kind, std::string text) {
    result_.tokens.push_back(Token{kind, std::move(text), line_});
  }

  // Returns false when the line is blank or comment-only (consumed up to, not
  // including, the newline).
  bool handle_indentation() {
    int col = 0;
    std::size_t p = pos_;
    while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t' || src_[p] == '\f')) {
      if (src_[p] == '\t') {
        col = (col / 8 + 1) * 8;
      } else if (src_[p] == ' ') {
        ++col;
      } else {
        col = 0;
      }
      ++p;
    }
    if (p >= src_.size()) {
      pos_ = p;
      return false;
    }
    if (src_[p] == '\n' || src_[p] == '#' || src_[p] == '\r') {
      pos_ = p;
      if (src_[p] == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (src_[p] == '\r') {
        ++pos_;
      }
      if (pos_ < src_.size() && src_[pos_] == '\n') {
        ++pos_;
        ++line_;
      }
      return false;
    }
    pos_ = p;
    if (col > indents_.back()) {
      indents_.push_back(col);
      emit(TokenKind::Indent, "");
    } else {
      while (col < indents_.back()) {
        indents_.pop_back();
        emit(TokenKind::Dedent, "");
      }
      if (col != indents_.back()) result_.had_error = true;
    }
    return true;
  }

  bool try_string() {
    std::size_t p = pos_;
    std::size_t prefix_len = 0;
    while (p < src_.size() && prefix_len < 2) {
      const char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(src_[p])));
      if (lc == 'r' || lc == 'b' || lc == 'u' || lc == 'f') {
        ++p;
        ++prefix_len;
      } else {
        break;
      }
    }
    if (p >= src_.size() || (src_[p] != '\'' && src_[p] != '"')) return false;
    const char quote = src_[p];
    const bool triple = p + 2 < src_.size() && src_[p + 1] == quote && src_[p + 2] == quote;
    const std::size_t start = pos_;
    p += triple ? 3 : 1;
    int newlines = 0;
    bool closed = false;
    while (p < src_.size()) {
      const char c = src_[p];
      if (c == '\\') {
        if (p + 1 < src_.size() && src_[p + 1] == '\n') ++newlines;
        p += 2;
        continue;
      }
      if (c == '\n') {
        if (!triple) break;
        ++newlines;
      }
      if (c == quote) {
        if (!triple) {
          ++p;
          closed = true;
          break;
        }
        if (p + 2 < src_.size() && src_[p + 1] == quote && src_[p + 2] == quote) {
          p += 3;
          closed = true;
          break;
        }
      }
      ++p;
    }
    if (p > src_.size()) p = src_.size();
    if (!closed) result_.had_error = true;
    emit(TokenKind::String, std::string(src_.substr(start, p - start)));
    line_ += newlines;
    pos_ = p;
    return true;
  }

  void lex_number() {
    const std::size_t start = pos_;
    auto digits = [&](auto pred) {
      while (pos_ < src_.size() &&
             (pred(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
    };
    auto is_dec = [](unsigned char ch) { return std::isdigit(ch) != 0; };
    if (src_[pos_] == '0' && pos_ + 1 < src_.size() &&
        std::string_view("xXoObB").find(src_[pos_ + 1]) != std::string_view::npos) {
      pos_ += 2;
      digits([](unsigned char ch) { return std::isxdigit(ch) != 0; });
    } else {
      digits(is_dec);
      if (pos_ < src_.size() && src_[pos_] == '.') {
        ++pos_;
        digits(is_dec);
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t p = pos_ + 1;
        if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
        if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
          pos_ = p;
          digits(is_dec);
        }
      }
      if (pos_ < src_.size() && (src_[pos_] == 'j' || src_[pos_] == 'J')) ++pos_;
    }
    emit(TokenKind::Number, std::string(src_.substr(start, pos_ - start)));
  }

  bool lex_operator() {
    for (std::string_view op : kMultiCharOps) {
      if (src_.substr(pos_, op.size()) == op) {
        emit(TokenKind::Op, std::string(op));
        pos_ += op.size();
        return true;
      }
    }
    const char c = src_[pos_];
    if (kSingleCharOps.find(c) == std::string_view::npos) return false;
    if (c == '(' || c == '[' || c == '{') ++depth_;
    if ((c == ')' || c == ']' || c == '}') && depth_ > 0) --depth_;
    emit(TokenKind::Op, std::string(1, c));
    ++pos_;
    return true;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int depth_ = 0;
  std::vector<int> indents_;
  LexResult result_;
};

}  // namespace

LexResult lex(std::string_view source) { return Lexer(source).run(); }

}  // namespace esdiv::python

#include "esdiv/python_ast.hpp"

#include <set>
#include <stdexcept>
#include <utility>

#include "esdiv/python_lexer.hpp"

namespace esdiv::python {

std::size_t AstNode::size() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.size();
  return n;
}

std::string dump(const AstNode& node) {
  std::string out = node.kind;
  if (!node.value.empty()) out += "<" + node.value + ">";
  if (!node.children.empty()) {
    out += "(";
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      if (i) out += " ";
      out += dump(node.children[i]);
    }
    out += ")";
  }
  return out;
}

namespace {

struct SyntaxError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::set<std::string, std::less<>> kKeywords = {
    "False", "None",   "True",    "and",      "as",     "assert", "async", "await",
    "break", "class",  "continue", "def",     "del",    "elif",   "else",  "except",
    "finally", "for",  "from",    "global",   "if",     "import", "in",    "is",
    "lambda", "nonlocal", "not",  "or",       "pass",   "raise",  "return", "try",
    "while", "with",   "yield"};

AstNode node(std::string kind, std::vector<AstNode> children = {}) {
  return AstNode{std::move(kind), {}, std::move(children)};
}

AstNode leaf(std::string kind, std::string value) {
  return AstNode{std::move(kind), std::move(value), {}};
}

AstNode ident(const std::string& name) { return leaf("id", name); }

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  AstNode parse_file() {
    AstNode module = node("Module");
    while (!at(TokenKind::EndMarker)) {
      if (accept_kind(TokenKind::Newline)) continue;
      parse_statement(module.children);
    }
    return module;
  }

 private:
  // ---- token helpers ----
  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  bool at(TokenKind k) const { return peek().kind == k; }
  bool at_op(std::string_view op, std::size_t ahead = 0) const {
    return peek(ahead).kind == TokenKind::Op && peek(ahead).text == op;
  }
  bool at_kw(std::string_view kw, std::size_t ahead = 0) const {
    return peek(ahead).kind == TokenKind::Name && peek(ahead).text == kw;
  }
  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool accept_kind(TokenKind k) {
    if (!at(k)) return false;
    next();
    return true;
  }
  bool accept_op(std::string_view op) {
    if (!at_op(op)) return false;
    next();
    return true;
  }
  bool accept_kw(std::string_view kw) {
    if (!at_kw(kw)) return false;
    next();
    return true;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw SyntaxError("line " + std::to_string(peek().line) + ": " + what);
  }
  void expect_op(std::string_view op) {
    if (!accept_op(op)) fail("expected '" + std::string(op) + "'");
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail("expected '" + std::string(kw) + "'");
  }
  void expect_kind(TokenKind k, const char* what) {
    if (!accept_kind(k)) fail(std::string("expected ") + what);
  }
  std::string expect_name() {
    if (!at(TokenKind::Name) || kKeywords.count(peek().text)) fail("expected identifier");
    return next().text;
  }

  // Tokens that can start an expression.
  bool at_expression_start() const {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Number:
      case TokenKind::String:
        return true;
      case TokenKind::Name:
        return !kKeywords.count(t.text) || t.text == "None" || t.text == "True" ||
               t.text == "False" || t.text == "not" || t.text == "lambda" ||
               t.text == "await" || t.text == "yield";
      case TokenKind::Op:
        return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" ||
               t.text == "+" || t.text == "~" || t.text == "*" || t.text == "...";
      default:
        return false;
    }
  }

  // ---- statements ----
  void parse_statement(std::vector<AstNode>& out) {
    DepthGuard guard(*this);
    if (at_op("@")) {
      out.push_back(parse_decorated());
      return;
    }
    if (at(TokenKind::Name)) {
      const std::string& kw = peek().text;
      if (kw == "if") return out.push_back(parse_if());
      if (kw == "while") return out.push_back(parse_while());
      if (kw == "for") return out.push_back(parse_for("For"));
      if (kw == "try") return out.push_back(parse_try());
      if (kw == "with") return out.push_back(parse_with("With"));
      if (kw == "def") return out.push_back(parse_funcdef("FunctionDef"));
      if (kw == "class") return out.push_back(parse_classdef());
      if (kw == "async") {
        next();
        if (at_kw("def")) return out.push_back(parse_funcdef("AsyncFunctionDef"));
        if (at_kw("for")) return out.push_back(parse_for("AsyncFor"));
        if (at_kw("with")) return out.push_back(parse_with("AsyncWith"));
        fail("expected def, for or with after async");
      }
    }
    parse_simple_statements(out);
  }

  void parse_simple_statements(std::vector<AstNode>& out) {
    out.push_back(parse_simple_statement());
    while (accept_op(";")) {
      if (at(TokenKind::Newline)) break;
      out.push_back(parse_simple_statement());
    }
    expect_kind(TokenKind::Newline, "end of statement");
  }

  AstNode parse_simple_statement() {
    if (accept_kw("pass")) return node("Pass");
    if (accept_kw("break")) return node("Break");
    if (accept_kw("continue")) return node("Continue");
    if (accept_kw("return")) {
      AstNode r = node("Return");
      if (at_expression_start()) r.children.push_back(parse_star_expressions());
      return r;
    }
    if (accept_kw("raise")) {
      AstNode r = node("Raise");
      if (at_expression_start()) {
        r.children.push_back(parse_test());
        if (accept_kw("from")) r.children.push_back(parse_test());
      }
      return r;
    }
    if (at_kw("global") || at_kw("nonlocal")) {
      AstNode r = node(next().text == "global" ? "Global" : "Nonlocal");
      r.children.push_back(ident(expect_name()));
      while (accept_op(",")) r.children.push_back(ident(expect_name()));
      return r;
    }
    if (accept_kw("del")) {
      AstNode r = node("Delete");
      r.children.push_back(parse_target());
      while (accept_op(",")) {
        if (!at_expression_start()) break;
        r.children.push_back(parse_target());
      }
      return r;
    }
    if (accept_kw("assert")) {
      AstNode r = node("Assert");
      r.children.push_back(parse_test());
      if (accept_op(",")) r.children.push_back(parse_test());
      return r;
    }
    if (accept_kw("import")) {
      AstNode r = node("Import");
      do {
        r.children.push_back(parse_alias(true));
      } while (accept_op(","));
      return r;
    }
    if (accept_kw("from")) return parse_import_from();
    return parse_expression_statement();
  }

  AstNode parse_alias(bool dotted) {
    AstNode a = node("alias");
    std::string name = expect_name();
    while (dotted && accept_op(".")) name += "." + expect_name();
    a.children.push_back(ident(name));
    if (accept_kw("as")) a.children.push_back(ident(expect_name()));
    return a;
  }

  AstNode parse_import_from() {
    AstNode r = node("ImportFrom");
    int level = 0;
    while (at_op(".") || at_op("...")) level += static_cast<int>(next().text.size());
    if (!at_kw("import")) {
      std::string module = expect_name();
      while (accept_op(".")) module += "." + expect_name();
      r.children.push_back(ident(module));
    } else if (level == 0) {
      fail("expected module name");
    }
    if (level > 0) r.children.push_back(leaf("level", std::to_string(level)));
    expect_kw("import");
    if (accept_op("*")) {
      r.children.push_back(node("alias", {leaf("star", "*")}));
      return r;
    }
    const bool paren = accept_op("(");
    do {
      if (paren && at_op(")")) break;
      r.children.push_back(parse_alias(false));
    } while (accept_op(","));
    if (paren) expect_op(")");
    return r;
  }

  static bool is_aug_assign(const Token& t) {
    static const std::set<std::string, std::less<>> ops = {
        "+=", "-=", "*=", "/=", "//=", "%=", "**=", ">>=", "<<=", "&=", "|=", "^=", "@="};
    return t.kind == TokenKind::Op && ops.count(t.text);
  }

  static std::string binop_name(std::string_view op) {
    if (op == "+") return "Add";
    if (op == "-") return "Sub";
    if (op == "*") return "Mult";
    if (op == "/") return "Div";
    if (op == "//") return "FloorDiv";
    if (op == "%") return "Mod";
    if (op == "**") return "Pow";
    if (op == "<<") return "LShift";
    if (op == ">>") return "RShift";
    if (op == "|") return "BitOr";
    if (op == "^") return "BitXor";
    if (op == "&") return "BitAnd";
    if (op == "@") return "MatMult";
    return "Op";
  }

  static bool is_assignable(const AstNode& n) {
    if (n.kind == "Name" || n.kind == "Attribute" || n.kind == "Subscript") return true;
    if (n.kind == "Starred") return is_assignable(n.children.front());
    if (n.kind == "Tuple" || n.kind == "List") {
      for (const auto& c : n.children) {
        if (!is_assignable(c)) return false;
      }
      return true;
    }
    return false;
  }

  AstNode parse_expression_statement() {
    AstNode first = at_kw("yield") ? parse_yield() : parse_star_expressions();
    if (is_aug_assign(peek())) {
      if (first.kind != "Name" && first.kind != "Attribute" && first.kind != "Subscript") {
        fail("illegal target for augmented assignment");
      }
      std::string op = next().text;
      op.pop_back();
      AstNode value = at_kw("yield") ? parse_yield() : parse_star_expressions();
      return node("AugAssign", {std::move(first), node(binop_name(op)), std::move(value)});
    }
    if (at_op(":")) {
      next();
      if (!is_assignable(first) || first.kind == "Tuple" || first.kind == "List") {
        fail("illegal target for annotation");
      }
      AstNode r = node("AnnAssign", {std::move(first), parse_test()});
      if (accept_op("=")) {
        r.children.push_back(at_kw("yield") ? parse_yield() : parse_star_expressions());
      }
      return r;
    }
    if (at_op("=")) {
      AstNode r = node("Assign");
      r.children.push_back(std::move(first));
      while (accept_op("=")) {
        r.children.push_back(at_kw("yield") ? parse_yield() : parse_star_expressions());
      }
      for (std::size_t i = 0; i + 1 < r.children.size(); ++i) {
        if (!is_assignable(r.children[i])) fail("cannot assign to expression");
      }
      return r;
    }
    return node("Expr", {std::move(first)});
  }

  void parse_block(std::vector<AstNode>& out) {
    expect_op(":");
    if (accept_kind(TokenKind::Newline)) {
      expect_kind(TokenKind::Indent, "indented block");
      while (!accept_kind(TokenKind::Dedent)) {
        if (at(TokenKind::EndMarker)) fail("unexpected end of input");
        if (accept_kind(TokenKind::Newline)) continue;
        parse_statement(out);
      }
    } else {
      parse_simple_statements(out);
    }
  }

  AstNode parse_if() {
    next();  // 'if' or 'elif'
    AstNode r = node("If");
    r.children.push_back(parse_named_expression());
    parse_block(r.children);
    if (at_kw("elif")) {
      r.children.push_back(node("orelse", {parse_if()}));
    } else if (accept_kw("else")) {
      AstNode orelse = node("orelse");
      parse_block(orelse.children);
      r.children.push_back(std::move(orelse));
    }
    return r;
  }

  void parse_optional_else(AstNode& r) {
    if (accept_kw("else")) {
      AstNode orelse = node("orelse");
      parse_block(orelse.children);
      r.children.push_back(std::move(orelse));
    }
  }

  AstNode parse_while() {
    next();
    AstNode r = node("While");
    r.children.push_back(parse_named_expression());
    parse_block(r.children);
    parse_optional_else(r);
    return r;
  }

  AstNode parse_for(const char* kind) {
    expect_kw("for");
    AstNode r = node(kind);
    r.children.push_back(parse_target_list());
    expect_kw("in");
    r.children.push_back(parse_star_expressions());
    parse_block(r.children);
    parse_optional_else(r);
    return r;
  }

  AstNode parse_try() {
    next();
    AstNode r = node("Try");
    parse_block(r.children);
    bool handled = false;
    while (at_kw("except")) {
      next();
      handled = true;
      AstNode h = node("ExceptHandler");
      if (accept_op("*")) h.kind = "ExceptStarHandler";
      if (!at_op(":")) {
        h.children.push_back(parse_test());
        if (accept_op(",")) {
          AstNode tuple = node("Tuple", {std::move(h.children.back())});
          do {
            if (at_op(":") || at_kw("as")) break;
            tuple.children.push_back(parse_test());
          } while (accept_op(","));
          h.children.back() = std::move(tuple);
        }
        if (accept_kw("as")) h.children.push_back(ident(expect_name()));
      }
      parse_block(h.children);
      r.children.push_back(std::move(h));
    }
    if (handled) parse_optional_else(r);
    if (accept_kw("finally")) {
      AstNode fin = node("finalbody");
      parse_block(fin.children);
      r.children.push_back(std::move(fin));
    } else if (!handled) {
      fail("try without except or finally");
    }
    return r;
  }

  AstNode parse_with(const char* kind) {
    expect_kw("with");
    AstNode r = node(kind);
    // Parenthesized multi-item form is handled as a tuple expression, which
    // parses identically for the single-item case.
    do {
      AstNode item = node("withitem", {parse_test()});
      if (accept_kw("as")) item.children.push_back(parse_target());
      r.children.push_back(std::move(item));
    } while (accept_op(","));
    parse_block(r.children);
    return r;
  }

  AstNode parse_decorated() {
    AstNode decorators = node("decorators");
    while (accept_op("@")) {
      decorators.children.push_back(parse_named_expression());
      expect_kind(TokenKind::Newline, "newline after decorator");
    }
    AstNode def;
    if (at_kw("def")) {
      def = parse_funcdef("FunctionDef");
    } else if (at_kw("class")) {
      def = parse_classdef();
    } else if (accept_kw("async")) {
      def = parse_funcdef("AsyncFunctionDef");
    } else {
      fail("expected def or class after decorator");
    }
    def.children.push_back(std::move(decorators));
    return def;
  }

  AstNode parse_funcdef(const char* kind) {
    expect_kw("def");
    AstNode r = node(kind);
    r.children.push_back(ident(expect_name()));
    expect_op("(");
    r.children.push_back(parse_parameters(")", true));
    expect_op(")");
    std::optional<AstNode> returns;
    if (accept_op("->")) returns = node("returns", {parse_test()});
    parse_block(r.children);
    if (returns) r.children.push_back(std::move(*returns));
    return r;
  }

  AstNode parse_classdef() {
    expect_kw("class");
    AstNode r = node("ClassDef");
    r.children.push_back(ident(expect_name()));
    if (accept_op("(")) {
      parse_call_arguments(r.children);
      expect_op(")");
    }
    parse_block(r.children);
    return r;
  }

  // Parameter list for def (annotations allowed) or lambda (closer ':').
  AstNode parse_parameters(std::string_view closer, bool annotations) {
    AstNode args = node("arguments");
    bool seen_default = false;
    while (!at_op(closer)) {
      if (accept_op("/")) {
        args.children.push_back(node("posonly"));
      } else if (accept_op("**")) {
        args.children.push_back(node("kwarg", {parse_param(annotations, false)}));
      } else if (accept_op("*")) {
        if (at_op(",") || at_op(closer)) {
          args.children.push_back(node("kwonly"));
        } else {
          args.children.push_back(node("vararg", {parse_param(annotations, false)}));
        }
      } else {
        AstNode p = parse_param(annotations, true);
        const bool has_default = p.children.back().kind == "default";
        if (seen_default && !has_default && !kwonly_started(args)) {
          fail("non-default argument follows default argument");
        }
        seen_default = seen_default || has_default;
        args.children.push_back(std::move(p));
      }
      if (!accept_op(",")) break;
    }
    return args;
  }

  static bool kwonly_started(const AstNode& args) {
    for (const auto& c : args.children) {
      if (c.kind == "vararg" || c.kind == "kwonly") return true;
    }
    return false;
  }

  AstNode parse_param(bool annotations, bool allow_default) {
    AstNode p = node("arg", {ident(expect_name())});
    if (annotations && accept_op(":")) p.children.push_back(node("annotation", {parse_test()}));
    if (allow_default && accept_op("=")) p.children.push_back(node("default", {parse_test()}));
    return p;
  }

  // ---- expressions ----
  AstNode parse_yield() {
    expect_kw("yield");
    if (accept_kw("from")) return node("YieldFrom", {parse_test()});
    AstNode y = node("Yield");
    if (at_expression_start()) y.children.push_back(parse_star_expressions());
    return y;
  }

  AstNode parse_star_or_named() {
    if (accept_op("*")) return node("Starred", {parse_bitor()});
    return parse_named_expression();
  }

  AstNode parse_star_expressions() {
    AstNode first = parse_star_or_named();
    if (!at_op(",")) {
      if (first.kind == "Starred") fail("can't use starred expression here");
      return first;
    }
    AstNode tuple = node("Tuple", {std::move(first)});
    while (accept_op(",")) {
      if (!at_expression_start()) break;
      tuple.children.push_back(parse_star_or_named());
    }
    return tuple;
  }

  AstNode parse_named_expression() {
    if (at(TokenKind::Name) && at_op(":=", 1) && !kKeywords.count(peek().text)) {
      AstNode target = node("Name", {ident(next().text)});
      next();
      return node("NamedExpr", {std::move(target), parse_test()});
    }
    return parse_test();
  }

  AstNode parse_target() {
    if (accept_op("*")) return node("Starred", {parse_target()});
    AstNode t = parse_bitor();
    if (!is_assignable(t)) fail("invalid assignment target");
    return t;
  }

  AstNode parse_target_list() {
    AstNode first = parse_target();
    if (!at_op(",")) return first;
    AstNode tuple = node("Tuple", {std::move(first)});
    while (accept_op(",")) {
      if (at_kw("in") || at_op("=")) break;
      tuple.children.push_back(parse_target());
    }
    return tuple;
  }

  struct DepthGuard {
    explicit DepthGuard(Parser& p) : parser(p) {
      if (++parser.depth_ > kMaxDepth) parser.fail("expression nested too deeply");
    }
    ~DepthGuard() { --parser.depth_; }
    Parser& parser;
  };
  static constexpr int kMaxDepth = 200;

  AstNode parse_test() {
    DepthGuard guard(*this);
    if (at_kw("lambda")) return parse_lambda();
    AstNode cond = parse_or();
    if (accept_kw("if")) {
      AstNode test = parse_or();
      expect_kw("else");
      AstNode orelse = parse_test();
      return node("IfExp", {std::move(test), std::move(cond), std::move(orelse)});
    }
    return cond;
  }

  AstNode parse_test_no_cond() {
    if (at_kw("lambda")) return parse_lambda();
    return parse_or();
  }

  AstNode parse_lambda() {
    expect_kw("lambda");
    AstNode args = parse_parameters(":", false);
    expect_op(":");
    return node("Lambda", {std::move(args), parse_test()});
  }

  AstNode parse_or() {
    AstNode first = parse_and();
    if (!at_kw("or")) return first;
    AstNode r = node("BoolOp", {node("Or"), std::move(first)});
    while (accept_kw("or")) r.children.push_back(parse_and());
    return r;
  }

  AstNode parse_and() {
    AstNode first = parse_not();
    if (!at_kw("and")) return first;
    AstNode r = node("BoolOp", {node("And"), std::move(first)});
    while (accept_kw("and")) r.children.push_back(parse_not());
    return r;
  }

  AstNode parse_not() {
    if (accept_kw("not")) return node("UnaryOp", {node("Not"), parse_not()});
    return parse_comparison();
  }

  std::optional<std::string> comparison_operator() {
    const Token& t = peek();
    if (t.kind == TokenKind::Op) {
      if (t.text == "<") return "Lt";
      if (t.text == ">") return "Gt";
      if (t.text == "==") return "Eq";
      if (t.text == ">=") return "GtE";
      if (t.text == "<=") return "LtE";
      if (t.text == "!=") return "NotEq";
      return std::nullopt;
    }
    if (t.kind == TokenKind::Name) {
      if (t.text == "in") return "In";
      if (t.text == "not" && at_kw("in", 1)) return "NotIn";
      if (t.text == "is") return at_kw("not", 1) ? "IsNot" : "Is";
    }
    return std::nullopt;
  }

  AstNode parse_comparison() {
    AstNode first = parse_bitor();
    auto op = comparison_operator();
    if (!op) return first;
    AstNode r = node("Compare", {std::move(first)});
    while (op) {
      next();
      if (*op == "NotIn" || *op == "IsNot") next();
      r.children.push_back(node(*op));
      r.children.push_back(parse_bitor());
      op = comparison_operator();
    }
    return r;
  }

  template <typename Next>
  AstNode parse_binary(std::initializer_list<std::string_view> ops, Next next_level) {
    AstNode left = (this->*next_level)();
    for (;;) {
      bool matched = false;
      for (std::string_view op : ops) {
        if (at_op(op)) {
          next();
          AstNode right = (this->*next_level)();
          left = node("BinOp", {std::move(left), node(binop_name(op)), std::move(right)});
          matched = true;
          break;
        }
      }
      if (!matched) return left;
    }
  }

  AstNode parse_bitor() { return parse_binary({"|"}, &Parser::parse_xor); }
  AstNode parse_xor() { return parse_binary({"^"}, &Parser::parse_bitand); }
  AstNode parse_bitand() { return parse_binary({"&"}, &Parser::parse_shift); }
  AstNode parse_shift() { return parse_binary({"<<", ">>"}, &Parser::parse_arith); }
  AstNode parse_arith() { return parse_binary({"+", "-"}, &Parser::parse_term); }
  AstNode parse_term() {
    return parse_binary({"*", "/", "//", "%", "@"}, &Parser::parse_factor);
  }

  AstNode parse_factor() {
    DepthGuard guard(*this);
    if (accept_op("-")) return node("UnaryOp", {node("USub"), parse_factor()});
    if (accept_op("+")) return node("UnaryOp", {node("UAdd"), parse_factor()});
    if (accept_op("~")) return node("UnaryOp", {node("Invert"), parse_factor()});
    return parse_power();
  }

  AstNode parse_power() {
    AstNode base = accept_kw("await") ? node("Await", {parse_primary()}) : parse_primary();
    if (accept_op("**")) {
      return node("BinOp", {std::move(base), node("Pow"), parse_factor()});
    }
    return base;
  }

  AstNode parse_primary() {
    AstNode value = parse_atom();
    for (;;) {
      if (accept_op(".")) {
        value = node("Attribute", {std::move(value), ident(expect_name())});
      } else if (accept_op("(")) {
        AstNode call = node("Call", {std::move(value)});
        parse_call_arguments(call.children);
        expect_op(")");
        value = std::move(call);
      } else if (accept_op("[")) {
        AstNode sub = node("Subscript", {std::move(value), parse_slices()});
        expect_op("]");
        value = std::move(sub);
      } else {
        return value;
      }
    }
  }

  void parse_call_arguments(std::vector<AstNode>& out) {
    while (!at_op(")")) {
      if (accept_op("**")) {
        out.push_back(node("keyword", {parse_test()}));
      } else if (accept_op("*")) {
        out.push_back(node("Starred", {parse_test()}));
      } else if (at(TokenKind::Name) && at_op("=", 1) && !kKeywords.count(peek().text)) {
        AstNode kw = node("keyword", {ident(next().text)});
        next();
        kw.children.push_back(parse_test());
        out.push_back(std::move(kw));
      } else {
        AstNode arg = parse_named_expression();
        if (at_kw("for") || at_kw("async")) {
          arg = parse_comprehension("GeneratorExp", std::move(arg));
        }
        out.push_back(std::move(arg));
      }
      if (!accept_op(",")) break;
    }
  }

  AstNode parse_slice() {
    AstNode lower = node("Empty");
    if (!at_op(":")) {
      AstNode e = parse_star_or_named();
      if (!at_op(":")) return e;
      lower = std::move(e);
    }
    expect_op(":");
    AstNode s = node("Slice", {std::move(lower)});
    s.children.push_back(at_op(":") || at_op("]") || at_op(",") ? node("Empty") : parse_test());
    if (accept_op(":")) {
      if (!at_op("]") && !at_op(",")) s.children.push_back(parse_test());
    }
    return s;
  }

  AstNode parse_slices() {
    AstNode first = parse_slice();
    if (!at_op(",")) return first;
    AstNode tuple = node("Tuple", {std::move(first)});
    while (accept_op(",")) {
      if (at_op("]")) break;
      tuple.children.push_back(parse_slice());
    }
    return tuple;
  }

  AstNode parse_comprehension(const char* kind, AstNode element) {
    AstNode r = node(kind, {std::move(element)});
    while (at_kw("for") || at_kw("async")) {
      AstNode gen = node("comprehension");
      if (accept_kw("async")) gen.kind = "async_comprehension";
      expect_kw("for");
      gen.children.push_back(parse_target_list());
      expect_kw("in");
      gen.children.push_back(parse_or());
      while (accept_kw("if")) gen.children.push_back(parse_test_no_cond());
      r.children.push_back(std::move(gen));
    }
    return r;
  }

  AstNode parse_atom() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Number:
        return node("Constant", {leaf("num", next().text)});
      case TokenKind::String: {
        std::string text = next().text;
        while (at(TokenKind::String)) text += next().text;
        return node("Constant", {leaf("str", std::move(text))});
      }
      case TokenKind::Name: {
        if (t.text == "None" || t.text == "True" || t.text == "False") {
          return node("Constant", {node(next().text)});
        }
        if (t.text == "yield") fail("yield outside parentheses");
        return node("Name", {ident(expect_name())});
      }
      case TokenKind::Op:
        break;
      default:
        fail("expected expression");
    }
    if (accept_op("...")) return node("Constant", {node("Ellipsis")});
    if (accept_op("(")) {
      if (accept_op(")")) return node("Tuple");
      if (at_kw("yield")) {
        AstNode y = parse_yield();
        expect_op(")");
        return y;
      }
      AstNode first = parse_star_or_named();
      if (at_kw("for") || at_kw("async")) {
        AstNode gen = parse_comprehension("GeneratorExp", std::move(first));
        expect_op(")");
        return gen;
      }
      if (accept_op(")")) {
        if (first.kind == "Starred") fail("can't use starred expression here");
        return first;
      }
      AstNode tuple = node("Tuple", {std::move(first)});
      while (accept_op(",")) {
        if (at_op(")")) break;
        tuple.children.push_back(parse_star_or_named());
      }
      expect_op(")");
      return tuple;
    }
    if (accept_op("[")) {
      AstNode list = node("List");
      if (accept_op("]")) return list;
      AstNode first = parse_star_or_named();
      if (at_kw("for") || at_kw("async")) {
        AstNode comp = parse_comprehension("ListComp", std::move(first));
        expect_op("]");
        return comp;
      }
      list.children.push_back(std::move(first));
      while (accept_op(",")) {
        if (at_op("]")) break;
        list.children.push_back(parse_star_or_named());
      }
      expect_op("]");
      return list;
    }
    if (accept_op("{")) return parse_brace();
    fail("unexpected '" + t.text + "'");
  }

  void parse_dict_entry(AstNode& dict) {
    if (accept_op("**")) {
      dict.children.push_back(node("DictUnpack", {parse_bitor()}));
      return;
    }
    AstNode key = parse_test();
    expect_op(":");
    dict.children.push_back(std::move(key));
    dict.children.push_back(parse_test());
  }

  AstNode parse_brace() {
    if (accept_op("}")) return node("Dict");
    if (at_op("**")) {
      AstNode dict = node("Dict");
      do {
        if (at_op("}")) break;
        parse_dict_entry(dict);
      } while (accept_op(","));
      expect_op("}");
      return dict;
    }
    AstNode first = parse_star_or_named();
    if (accept_op(":")) {
      AstNode value = parse_test();
      if (at_kw("for") || at_kw("async")) {
        AstNode comp = parse_comprehension("DictComp", std::move(first));
        comp.children.insert(comp.children.begin() + 1, std::move(value));
        expect_op("}");
        return comp;
      }
      AstNode dict = node("Dict", {std::move(first), std::move(value)});
      while (accept_op(",")) {
        if (at_op("}")) break;
        parse_dict_entry(dict);
      }
      expect_op("}");
      return dict;
    }
    if (at_kw("for") || at_kw("async")) {
      AstNode comp = parse_comprehension("SetComp", std::move(first));
      expect_op("}");
      return comp;
    }
    AstNode set = node("Set", {std::move(first)});
    while (accept_op(",")) {
      if (at_op("}")) break;
      set.children.push_back(parse_star_or_named());
    }
    expect_op("}");
    return set;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

std::optional<AstNode> parse_module(std::string_view source) {
  LexResult lexed = lex(source);
  if (lexed.had_error) return std::nullopt;
  try {
    return Parser(std::move(lexed.tokens)).parse_file();
  } catch (const SyntaxError&) {
    return std::nullopt;
  }
}

}  // namespace esdiv::python

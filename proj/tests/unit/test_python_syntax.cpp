#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "esdiv/kernels.hpp"
#include "esdiv/python_ast.hpp"
#include "esdiv/python_lexer.hpp"

using namespace esdiv;
using Tokens = std::vector<std::string>;

// Expected streams were produced with CPython's tokenize module, dropping
// NEWLINE/NL/INDENT/DEDENT/COMMENT/ENDMARKER.
TEST(Tokenize, MatchesReferenceTokenizer) {
  EXPECT_EQ(tokenize("def f(N): print(N**2)\n").tokens,
            (Tokens{"def", "f", "(", "N", ")", ":", "print", "(", "N", "**", "2", ")"}));
  EXPECT_EQ(tokenize("x = a[1:2] # c\nif x >= 3.5e-2:\n    y = 'a,b' + \"q\"\n").tokens,
            (Tokens{"x", "=", "a", "[", "1", ":", "2", "]", "if", "x", ">=", "3.5e-2", ":", "y",
                    "=", "'a,b'", "+", "\"q\""}));
  EXPECT_EQ(tokenize("def g(a, *b, **k):\n    return a @ b // 2 ** -1 != 0x1F\n").tokens,
            (Tokens{"def", "g", "(", "a", ",", "*", "b", ",", "**", "k", ")", ":", "return", "a",
                    "@", "b", "//", "2", "**", "-", "1", "!=", "0x1F"}));
  EXPECT_EQ(tokenize("s = f'{x}' + b'\\x00' + r'\\d'\nz = 1_000 + 1j + .5\n"
                     "w = x if y else (lambda q: q)\n")
                .tokens,
            (Tokens{"s", "=", "f'{x}'", "+", "b'\\x00'", "+", "r'\\d'", "z", "=", "1_000", "+",
                    "1j", "+", ".5", "w", "=", "x", "if", "y", "else", "(", "lambda", "q", ":",
                    "q", ")"}));
}

TEST(Tokenize, EmptyAndBroken) {
  EXPECT_TRUE(tokenize("").tokens.empty());
  EXPECT_TRUE(tokenize("# only a comment\n").tokens.empty());
  EXPECT_EQ(tokenize("x = \"abc").tokens, (Tokens{"x", "=", "\"abc"}));
  EXPECT_EQ(tokenize("def f(:\n  $ ?").tokens, (Tokens{"def", "f", "(", ":", "$", "?"}));
}

TEST(Lexer, LayoutTokens) {
  const auto r = python::lex("if a:\n    b\nc\n");
  std::vector<python::TokenKind> kinds;
  for (const auto& t : r.tokens) kinds.push_back(t.kind);
  using K = python::TokenKind;
  EXPECT_EQ(kinds, (std::vector<K>{K::Name, K::Name, K::Op, K::Newline, K::Indent, K::Name,
                                   K::Newline, K::Dedent, K::Name, K::Newline, K::EndMarker}));
  EXPECT_FALSE(r.had_error);
  EXPECT_TRUE(python::lex("x = 'open").had_error);
}

TEST(Lexer, BracketContinuationKeepsIndentation) {
  EXPECT_TRUE(python::parse_module("if a:\n    f(a,\n b)\n    g()\n").has_value());
  EXPECT_TRUE(python::parse_module("(a,\n b) = g(c)\n").has_value());
  EXPECT_TRUE(python::parse_module("x = 1 + \\\n    2\n").has_value());
}

TEST(Parser, AcceptsCommonConstructs) {
  const std::vector<std::string> ok = {
      "x = 3",
      "lambda X: -X",
      "def f(a, /, b=1, *args, c, **kw) -> int:\n    return a",
      "class A(B, metaclass=M):\n    x: int = 0\n    def m(self): ...",
      "@d(1)\n@e\ndef f(): pass",
      "try:\n    pass\nexcept (A, B) as e:\n    raise C from e\nelse:\n    pass\nfinally:\n    pass",
      "with open(p) as fh, lock: pass",
      "for a, *b in c:\n    continue\nelse:\n    pass",
      "while x:\n    break",
      "x = [i for i in y if i for j in z]",
      "x = {k: v for k, v in d.items()}",
      "x = {a, *b}",
      "x = {**a, 'k': 1}",
      "x = a[1:2, ::3, ...]",
      "async def g():\n    async with a as b:\n        await b\n    async for i in c:\n        yield i",
      "x = (yield from y)",
      "if (n := len(a)) > 3: pass",
      "x = a if b else c if d else e",
      "x = not a and b or c is not d and e not in f",
      "x = a < b <= c != d",
      "import a.b as c, d",
      "from ..m import (x as y, z,)",
      "from . import *",
      "global a, b\nnonlocal c",
      "del a[0], b.c",
      "assert x, 'msg'",
      "x = 0x1f + 0o7 + 0b1 + 1e5 + 1j + 1_000",
      "x = 'a' \"b\" f'{c!r:>10}'",
      "f(*a, **k, key=1)",
      "f(x for x in y)",
      "x = *a, b",
      "x = ~a ** -b // c @ d % e << f >> g & h ^ i | j",
      "x += 1; y -= 2; z **= 3",
      "print(1,)",
      "x = ()\ny = []\nz = {}",
      "if a:\n    pass\nelif b:\n    pass\nelse:\n    pass",
  };
  for (const auto& src : ok) EXPECT_TRUE(python::parse_module(src + "\n").has_value()) << src;
}

TEST(Parser, RejectsInvalidPrograms) {
  const std::vector<std::string> bad = {
      "def f(",          "x = = 1",      "if x\n    pass", "def f():\nreturn 1",
      "x = (1",          "print \"a\"", "f(a b)",         "x = 1 +",
      "for x in : pass", "  x = 1",      "1 = x",          "f() = 1",
      "x = $",           "else: pass",   "try:\n    pass", "def f():\n    x = 1\n  y = 2",
      "x = \"abc",       "lambda x",     "import",         "x = {1:}",
  };
  for (const auto& src : bad) EXPECT_FALSE(python::parse_module(src + "\n").has_value()) << src;
}

TEST(Parser, DeepNestingIsRejectedNotCrashing) {
  const std::string deep = std::string(5000, '(') + "1" + std::string(5000, ')') + "\n";
  EXPECT_FALSE(python::parse_module(deep).has_value());
  const std::string moderate = std::string(50, '(') + "1" + std::string(50, ')') + "\n";
  EXPECT_TRUE(python::parse_module(moderate).has_value());
}

TEST(Parser, TreeShape) {
  const auto t = python::parse_module("x = 3\n");
  ASSERT_TRUE(t);
  EXPECT_EQ(python::dump(*t), "Module(Assign(Name(id<x>) Constant(num<3>)))");
  EXPECT_EQ(t->size(), 6u);
  const auto u = python::parse_module("def f(N):\n    print(N**2)\n");
  ASSERT_TRUE(u);
  EXPECT_EQ(python::dump(*u),
            "Module(FunctionDef(id<f> arguments(arg(id<N>)) Expr(Call(Name(id<print>) "
            "BinOp(Name(id<N>) Pow Constant(num<2>))))))");
}

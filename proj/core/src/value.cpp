#include "esdiv/value.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>

#include "esdiv/error.hpp"

namespace esdiv {

Integer Integer::from_decimal(std::string_view text) {
  std::string_view digits = text;
  bool negative = false;
  if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) {
    negative = digits.front() == '-';
    digits.remove_prefix(1);
  }
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                     [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorCode::MalformedRecord, "invalid integer literal '" + std::string(text) + "'");
  }
  const auto first = digits.find_first_not_of('0');
  Integer out;
  if (first == std::string_view::npos) {
    out.decimal = "0";
  } else {
    out.decimal = (negative ? "-" : "") + std::string(digits.substr(first));
  }
  return out;
}

std::string format_float(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return std::signbit(v) ? "-0.0" : "0.0";

  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific);
  std::string_view sci(buf, static_cast<std::size_t>(res.ptr - buf));

  std::string sign;
  if (sci.front() == '-') {
    sign = "-";
    sci.remove_prefix(1);
  }
  const auto e_pos = sci.find('e');
  std::string digits;
  for (char c : sci.substr(0, e_pos)) {
    if (c != '.') digits += c;
  }
  while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
  const int exponent = std::atoi(std::string(sci.substr(e_pos + 1)).c_str());
  // Position of the decimal point relative to the digit string.
  const int decpt = exponent + 1;

  std::string out = sign;
  if (decpt <= -4 || decpt > 16) {
    out += digits.substr(0, 1);
    if (digits.size() > 1) out += "." + digits.substr(1);
    const int e = decpt - 1;
    out += e < 0 ? "e-" : "e+";
    std::string mag = std::to_string(std::abs(e));
    if (mag.size() < 2) mag = "0" + mag;
    out += mag;
  } else if (decpt <= 0) {
    out += "0." + std::string(static_cast<std::size_t>(-decpt), '0') + digits;
  } else if (static_cast<std::size_t>(decpt) >= digits.size()) {
    out += digits + std::string(static_cast<std::size_t>(decpt) - digits.size(), '0') + ".0";
  } else {
    out += digits.substr(0, static_cast<std::size_t>(decpt)) + "." +
           digits.substr(static_cast<std::size_t>(decpt));
  }
  return out;
}

std::string escape_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '\\': case ',': case ':': case '[': case ']':
      case '(': case ')': case '{': case '}':
        out += '\\';
        out += c;
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        out += c;
    }
  }
  return out;
}

namespace {

void serialize_into(const Value& value, int depth, std::string& out);

std::string serialize_at(const Value& value, int depth) {
  std::string s;
  serialize_into(value, depth, s);
  return s;
}

void join_sequence(const std::vector<Value>& items, int depth, std::string& out) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    serialize_into(items[i], depth + 1, out);
  }
}

void serialize_into(const Value& value, int depth, std::string& out) {
  if (depth > kMaxValueDepth) {
    throw Error(ErrorCode::DepthLimitExceeded,
                "value nesting exceeds " + std::to_string(kMaxValueDepth));
  }
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Null>) {
          out += "null";
        } else if constexpr (std::is_same_v<T, bool>) {
          out += v ? "bool:true" : "bool:false";
        } else if constexpr (std::is_same_v<T, Integer>) {
          out += "int:" + v.decimal;
        } else if constexpr (std::is_same_v<T, double>) {
          out += "float:" + format_float(v);
        } else if constexpr (std::is_same_v<T, std::string>) {
          out += "str:" + escape_text(v);
        } else if constexpr (std::is_same_v<T, List>) {
          out += "list:[";
          join_sequence(v.items, depth, out);
          out += ']';
        } else if constexpr (std::is_same_v<T, Tuple>) {
          out += "tuple:(";
          join_sequence(v.items, depth, out);
          out += ')';
        } else if constexpr (std::is_same_v<T, Set>) {
          std::vector<std::string> parts;
          parts.reserve(v.items.size());
          for (const auto& item : v.items) parts.push_back(serialize_at(item, depth + 1));
          std::sort(parts.begin(), parts.end());
          out += "set:{";
          for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) out += ',';
            out += parts[i];
          }
          out += '}';
        } else if constexpr (std::is_same_v<T, Dict>) {
          std::vector<std::pair<std::string, std::string>> parts;
          parts.reserve(v.entries.size());
          for (const auto& [k, val] : v.entries) {
            parts.emplace_back(serialize_at(k, depth + 1), serialize_at(val, depth + 1));
          }
          std::sort(parts.begin(), parts.end());
          out += "dict:{";
          for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) out += ',';
            out += parts[i].first + ":" + parts[i].second;
          }
          out += '}';
        } else if constexpr (std::is_same_v<T, Opaque>) {
          out += "obj:" + escape_text(v.type_name) + ":" + escape_text(v.repr);
        }
      },
      value.data);
}

class ValueParser {
 public:
  explicit ValueParser(std::string_view text) : text_(text) {}

  Value parse_all() {
    Value v = parse(0);
    if (pos_ != text_.size()) fail("trailing characters");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::MalformedRecord,
                "value trace at offset " + std::to_string(pos_) + ": " + what);
  }

  bool consume(std::string_view prefix) {
    if (text_.substr(pos_, prefix.size()) != prefix) return false;
    pos_ += prefix.size();
    return true;
  }

  static bool is_terminator(char c) {
    return c == ',' || c == ']' || c == ')' || c == '}' || c == ':';
  }

  std::string_view raw_atom() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_terminator(text_[pos_])) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  std::string escaped_atom() {
    std::string out;
    while (pos_ < text_.size() && !is_terminator(text_[pos_])) {
      char c = text_[pos_++];
      if (c == '\\') {
        if (pos_ >= text_.size()) fail("dangling escape");
        const char e = text_[pos_++];
        if (e == 'n') {
          out += '\n';
        } else if (e == 'r') {
          out += '\r';
        } else {
          out += e;
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  std::vector<Value> items(char close, int depth) {
    std::vector<Value> out;
    if (consume(std::string_view(&close, 1))) return out;
    for (;;) {
      out.push_back(parse(depth + 1));
      if (consume(",")) continue;
      if (consume(std::string_view(&close, 1))) return out;
      fail(std::string("expected ',' or '") + close + "'");
    }
  }

  Value parse(int depth) {
    if (depth > kMaxValueDepth) {
      throw Error(ErrorCode::DepthLimitExceeded, "value trace nesting too deep");
    }
    if (consume("null")) return Value(Null{});
    if (consume("bool:true")) return Value(true);
    if (consume("bool:false")) return Value(false);
    if (consume("int:")) return Value(Integer::from_decimal(raw_atom()));
    if (consume("float:")) return Value(parse_float(raw_atom()));
    if (consume("str:")) return Value(escaped_atom());
    if (consume("list:[")) return Value(List{items(']', depth)});
    if (consume("tuple:(")) return Value(Tuple{items(')', depth)});
    if (consume("set:{")) return Value(Set{items('}', depth)});
    if (consume("dict:{")) {
      Dict d;
      if (consume("}")) return Value(std::move(d));
      for (;;) {
        Value key = parse(depth + 1);
        if (!consume(":")) fail("expected ':' in dict entry");
        Value val = parse(depth + 1);
        d.entries.emplace_back(std::move(key), std::move(val));
        if (consume(",")) continue;
        if (consume("}")) return Value(std::move(d));
        fail("expected ',' or '}'");
      }
    }
    if (consume("obj:")) {
      Opaque o;
      o.type_name = escaped_atom();
      if (!consume(":")) fail("expected ':' in obj");
      o.repr = escaped_atom();
      return Value(std::move(o));
    }
    fail("unknown type tag");
  }

  double parse_float(std::string_view s) {
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    if (s == "nan") return std::nan("");
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("invalid float");
    return v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_value(const Value& value) { return serialize_at(value, 0); }

Value parse_value(std::string_view text) { return ValueParser(text).parse_all(); }

}  // namespace esdiv

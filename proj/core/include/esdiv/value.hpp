#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace esdiv {

/// Arbitrary-precision integer kept as canonical decimal text ("-12", "0").
struct Integer {
  std::string decimal;

  Integer() : decimal("0") {}
  Integer(std::int64_t v) : decimal(std::to_string(v)) {}  // NOLINT(implicit)
  static Integer from_decimal(std::string_view text);

  bool operator==(const Integer&) const = default;
};

struct Value;

struct List { std::vector<Value> items; };
struct Tuple { std::vector<Value> items; };
struct Set { std::vector<Value> items; };
struct Dict { std::vector<std::pair<Value, Value>> entries; };
/// A returned object outside the closed grammar; carries its type name and repr.
struct Opaque { std::string type_name; std::string repr; };

struct Null {};

/// Structured value returned by a candidate program.
struct Value {
  using Storage = std::variant<Null, bool, Integer, double, std::string, List, Tuple, Set, Dict, Opaque>;
  Storage data;

  Value() = default;
  Value(Null) {}
  Value(bool b) : data(b) {}
  Value(int v) : data(Integer(v)) {}
  Value(std::int64_t v) : data(Integer(v)) {}
  Value(Integer v) : data(std::move(v)) {}
  Value(double v) : data(v) {}
  Value(const char* s) : data(std::string(s)) {}
  Value(std::string s) : data(std::move(s)) {}
  Value(List v) : data(std::move(v)) {}
  Value(Tuple v) : data(std::move(v)) {}
  Value(Set v) : data(std::move(v)) {}
  Value(Dict v) : data(std::move(v)) {}
  Value(Opaque v) : data(std::move(v)) {}

  template <typename T>
  bool is() const { return std::holds_alternative<T>(data); }
  template <typename T>
  const T& as() const { return std::get<T>(data); }
};

inline constexpr int kMaxValueDepth = 64;

/// Canonical type-tagged serialization:
///   null | bool:true | int:<decimal> | float:<repr> | str:<escaped>
///   list:[a,b] | tuple:(a,b) | set:{sorted} | dict:{k:v sorted by key} | obj:<type>:<repr>
/// Throws DepthLimitExceeded past kMaxValueDepth levels of nesting.
std::string serialize_value(const Value& value);

/// Inverse of serialize_value. Set and dict entries come back in serialized order.
/// Throws MalformedRecord on text outside the grammar.
Value parse_value(std::string_view text);

/// Shortest round-trip decimal in the same layout as CPython's float repr
/// ("1.0", "0.1", "1e+16", "1.5e-05", "inf", "nan").
std::string format_float(double v);

/// Backslash-escapes the grammar's delimiters and line breaks.
std::string escape_text(std::string_view raw);

}  // namespace esdiv

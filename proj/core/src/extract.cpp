#include "esdiv/extract.hpp"

#include <algorithm>
#include <optional>
#include <regex>
#include <set>

#include "esdiv/python_lexer.hpp"

namespace esdiv {

std::string_view to_string(ExtractionFailureReason r) noexcept {
  switch (r) {
    case ExtractionFailureReason::NoCodeFound: return "no_code_found";
    case ExtractionFailureReason::NoTargetFunction: return "no_target_function";
  }
  return "no_code_found";
}

namespace {

enum class SegmentKind { Import, Definition, Assignment };

struct Segment {
  SegmentKind kind;
  std::vector<std::string> names;  // defined names
  std::vector<std::string> lines;  // dedented
  bool is_function = false;
};

struct Line {
  std::string text;
  std::size_t indent = 0;
  bool blank = false;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Line l;
    l.indent = line.find_first_not_of(" \t");
    l.blank = l.indent == std::string::npos;
    if (l.blank) l.indent = 0;
    l.text = std::move(line);
    out.push_back(std::move(l));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

bool is_fence(const Line& l) {
  if (l.blank) return false;
  std::string_view body = std::string_view(l.text).substr(l.indent);
  return body.rfind("```", 0) == 0 || body.rfind("~~~", 0) == 0;
}

const std::regex& def_re() {
  static const std::regex re(R"(^(async\s+)?def\s+([A-Za-z_]\w*)\s*\()");
  return re;
}
const std::regex& class_re() {
  static const std::regex re(R"(^class\s+([A-Za-z_]\w*)\s*[(:])");
  return re;
}
const std::regex& import_re() {
  static const std::regex re(R"(^(import\s+[A-Za-z_.]|from\s+[\w.]+\s+import\b))");
  return re;
}
const std::regex& assign_re() {
  static const std::regex re(
      R"(^([A-Za-z_]\w*(?:\s*,\s*[A-Za-z_]\w*)*)\s*(?::[^=]*)?=(?!=))");
  return re;
}

// Net bracket depth change of one line, skipping strings and comments.
int bracket_delta(std::string_view s) {
  int depth = 0;
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quote) {
      if (c == '\\') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    if (c == '#') break;
    if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == '(' || c == '[' || c == '{') {
      ++depth;
    } else if (c == ')' || c == ']' || c == '}') {
      --depth;
    }
  }
  return depth;
}

bool ends_with_backslash(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return !s.empty() && s.back() == '\\';
}

std::vector<std::string> split_names(const std::string& list) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : list) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Splits a region into top-level code segments relative to base indentation.
std::vector<Segment> segment_region(const std::vector<Line>& lines, std::size_t base) {
  std::vector<Segment> out;
  std::optional<Segment> current;
  std::vector<std::string> pending_decorators;
  int open_brackets = 0;
  bool continuation = false;

  auto dedent = [base](const Line& l) {
    return l.blank ? std::string() : l.text.substr(std::min(base, l.indent));
  };
  auto close = [&]() {
    if (current) {
      while (!current->lines.empty() && current->lines.back().empty()) current->lines.pop_back();
      out.push_back(std::move(*current));
      current.reset();
    }
    pending_decorators.clear();
    open_brackets = 0;
    continuation = false;
  };

  for (const Line& l : lines) {
    if (is_fence(l)) {
      close();
      continue;
    }
    if (open_brackets > 0 || continuation) {
      if (current) {
        current->lines.push_back(dedent(l));
      } else if (!pending_decorators.empty()) {
        pending_decorators.push_back(dedent(l));
      }
      open_brackets += l.blank ? 0 : bracket_delta(l.text);
      continuation = !l.blank && ends_with_backslash(l.text);
      continue;
    }
    if (l.blank) {
      if (current && current->kind == SegmentKind::Definition) current->lines.emplace_back();
      continue;
    }
    if (l.indent > base && current && current->kind == SegmentKind::Definition) {
      current->lines.push_back(dedent(l));
      open_brackets += bracket_delta(l.text);
      continuation = ends_with_backslash(l.text);
      continue;
    }
    if (l.indent != base) {
      close();
      continue;
    }
    const std::string body = l.text.substr(base);
    std::smatch m;
    if (body.front() == '@') {
      auto keep = std::move(pending_decorators);
      close();
      pending_decorators = std::move(keep);
      pending_decorators.push_back(body);
      open_brackets = bracket_delta(body);
      continue;
    }
    const bool is_def = std::regex_search(body, m, def_re());
    std::string def_name = is_def ? m[2].str() : std::string();
    const bool is_class = !is_def && std::regex_search(body, m, class_re());
    if (is_class) def_name = m[1].str();
    if (is_def || is_class) {
      auto decorators = std::move(pending_decorators);
      close();
      current = Segment{SegmentKind::Definition, {def_name}, std::move(decorators), is_def};
      current->lines.push_back(body);
      open_brackets = bracket_delta(body);
      continuation = ends_with_backslash(body);
      continue;
    }
    if (std::regex_search(body, m, import_re())) {
      close();
      current = Segment{SegmentKind::Import, {}, {body}, false};
      open_brackets = bracket_delta(body);
      continuation = ends_with_backslash(body);
      continue;
    }
    if (std::regex_search(body, m, assign_re())) {
      close();
      current = Segment{SegmentKind::Assignment, split_names(m[1].str()), {body}, false};
      open_brackets = bracket_delta(body);
      continuation = ends_with_backslash(body);
      continue;
    }
    close();
  }
  close();
  return out;
}

std::set<std::string> referenced_names(const Segment& s) {
  std::string text;
  for (const auto& line : s.lines) text += line + "\n";
  std::set<std::string> names;
  for (const auto& t : python::lex(text).tokens) {
    if (t.kind == python::TokenKind::Name) names.insert(t.text);
  }
  return names;
}

std::optional<std::size_t> find_target(const std::vector<Segment>& segs, std::string_view target) {
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (segs[i].is_function && segs[i].names.front() == target) return i;
  }
  return std::nullopt;
}

ExtractedProgram assemble(const std::vector<Segment>& segs, std::size_t target_idx) {
  const std::string target = segs[target_idx].names.front();
  std::vector<bool> selected(segs.size(), false);
  selected[target_idx] = true;

  std::vector<std::size_t> queue{target_idx};
  std::set<std::string> visited_names{target};
  while (!queue.empty()) {
    const std::size_t idx = queue.back();
    queue.pop_back();
    for (const auto& name : referenced_names(segs[idx])) {
      if (!visited_names.insert(name).second) continue;
      for (std::size_t j = 0; j < segs.size(); ++j) {
        if (selected[j] || segs[j].kind == SegmentKind::Import) continue;
        const auto& names = segs[j].names;
        if (std::find(names.begin(), names.end(), name) != names.end()) {
          selected[j] = true;
          queue.push_back(j);
        }
      }
    }
  }

  ExtractedProgram prog;
  prog.includes_target = true;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Segment& s = segs[i];
    const bool is_import = s.kind == SegmentKind::Import;
    if (!is_import && !selected[i]) continue;
    std::string text;
    for (const auto& line : s.lines) text += line + "\n";
    prog.source += text;
    if (is_import) {
      text.pop_back();
      prog.import_lines.push_back(text);
    } else if (i != target_idx) {
      for (const auto& n : s.names) {
        if (n != target &&
            std::find(prog.helper_names.begin(), prog.helper_names.end(), n) ==
                prog.helper_names.end()) {
          prog.helper_names.push_back(n);
        }
      }
    }
  }
  return prog;
}

// Indentation of the first line defining the target within `lines`.
std::optional<std::size_t> target_indent(const std::vector<Line>& lines, std::string_view target) {
  for (const auto& l : lines) {
    if (l.blank) continue;
    std::smatch m;
    const std::string body = l.text.substr(l.indent);
    if (std::regex_search(body, m, def_re()) && m[2].str() == target) return l.indent;
  }
  return std::nullopt;
}

std::optional<ExtractedProgram> try_region(const std::vector<Line>& lines,
                                           std::string_view target) {
  auto base = target_indent(lines, target);
  if (!base) return std::nullopt;
  auto segs = segment_region(lines, *base);
  auto idx = find_target(segs, target);
  if (!idx) return std::nullopt;
  return assemble(segs, *idx);
}

bool looks_like_code(const std::vector<Line>& lines) {
  for (const auto& l : lines) {
    if (l.blank) continue;
    const std::string body = l.text.substr(l.indent);
    if (std::regex_search(body, def_re()) || std::regex_search(body, class_re()) ||
        std::regex_search(body, import_re())) {
      return true;
    }
  }
  return false;
}

}  // namespace

ExtractionResult extract_program(std::string_view raw_text, std::string_view target_name) {
  const std::vector<Line> lines = split_lines(raw_text);

  std::vector<std::vector<Line>> blocks;
  bool any_fenced_code = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!is_fence(lines[i])) continue;
    std::vector<Line> block;
    std::size_t j = i + 1;
    while (j < lines.size() && !is_fence(lines[j])) block.push_back(lines[j++]);
    any_fenced_code = any_fenced_code || std::any_of(block.begin(), block.end(),
                                                     [](const Line& l) { return !l.blank; });
    blocks.push_back(std::move(block));
    i = j;
  }

  for (const auto& block : blocks) {
    if (auto prog = try_region(block, target_name)) return *prog;
  }
  if (auto prog = try_region(lines, target_name)) return *prog;

  if (any_fenced_code || looks_like_code(lines)) {
    return ExtractionFailure{ExtractionFailureReason::NoTargetFunction};
  }
  return ExtractionFailure{ExtractionFailureReason::NoCodeFound};
}

}  // namespace esdiv

#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace esdiv {

struct ExtractedProgram {
  std::string source;
  bool includes_target = false;
  std::vector<std::string> helper_names;
  std::vector<std::string> import_lines;

  bool operator==(const ExtractedProgram&) const = default;
};

enum class ExtractionFailureReason { NoCodeFound, NoTargetFunction };

std::string_view to_string(ExtractionFailureReason r) noexcept;

struct ExtractionFailure {
  ExtractionFailureReason reason;

  bool operator==(const ExtractionFailure&) const = default;
};

using ExtractionResult = std::variant<ExtractedProgram, ExtractionFailure>;

/// Recovers the target definition, the top-level helpers it references
/// (transitively, by name), and every import line from raw model output.
///
/// Fenced code blocks are searched first, in document order; the first block
/// defining the target wins. Otherwise unfenced (possibly indented) code in the
/// raw text is searched. Top-level statements other than imports and
/// definitions (driver code, `if __name__ == ...` blocks) are dropped.
ExtractionResult extract_program(std::string_view raw_text, std::string_view target_name = "f");

}  // namespace esdiv

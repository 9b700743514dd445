#include "esdiv/semantics.hpp"

#include "esdiv/error.hpp"
#include "esdiv/hash.hpp"

namespace esdiv {

namespace {

void append_field(std::string& out, std::string_view field) {
  out += std::to_string(field.size());
  out += ':';
  out += field;
}

void require_same_problem(const SemanticFingerprint& a, const SemanticFingerprint& b) {
  if (a.problem_id != b.problem_id || a.test_count != b.test_count) {
    throw Error(ErrorCode::ProblemMismatch, "fingerprints from '" + a.problem_id + "' (L=" +
                                                std::to_string(a.test_count) + ") and '" +
                                                b.problem_id + "' (L=" +
                                                std::to_string(b.test_count) + ")");
  }
}

}  // namespace

std::string canonical_trace_bytes(const ExecutionTrace& trace) {
  std::string out;
  for (const auto& o : trace.outcomes) {
    append_field(out, to_string(o.status));
    if (o.value_trace) {
      out += 'v';
      append_field(out, *o.value_trace);
    } else {
      out += '-';
    }
    append_field(out, o.stdout_text);
    out += '\n';
  }
  return out;
}

SemanticFingerprint fingerprint(const ExecutionTrace& trace, std::string problem_id) {
  SemanticFingerprint fp;
  fp.problem_id = std::move(problem_id);
  fp.test_count = trace.outcomes.size();
  fp.digest = sha256_hex(canonical_trace_bytes(trace));
  fp.source_valid = trace.valid;
  return fp;
}

bool semantically_equal(const SemanticFingerprint& a, const SemanticFingerprint& b) {
  require_same_problem(a, b);
  return a.digest == b.digest;
}

int hard_semantic_distance(const SemanticFingerprint& a, const SemanticFingerprint& b) {
  require_same_problem(a, b);
  if (!a.source_valid && !b.source_valid) return 0;
  if (a.source_valid && b.source_valid && a.digest == b.digest) return 0;
  return 1;
}

}  // namespace esdiv

#pragma once

#include <cstddef>
#include <string>

#include "esdiv/sandbox.hpp"

namespace esdiv {

/// SHA-256 digest over a generation's ordered output trace.
struct SemanticFingerprint {
  std::string problem_id;
  std::size_t test_count = 0;
  std::string digest;
  bool source_valid = false;

  bool operator==(const SemanticFingerprint&) const = default;
};

/// Unambiguous byte encoding of the per-test (status, value trace, stdout)
/// sequence that the digest is computed over.
std::string canonical_trace_bytes(const ExecutionTrace& trace);

SemanticFingerprint fingerprint(const ExecutionTrace& trace, std::string problem_id = {});

/// True iff digests are equal. Throws ProblemMismatch for different problems.
bool semantically_equal(const SemanticFingerprint& a, const SemanticFingerprint& b);

/// 0 when both are invalid, 0 when both are valid and equal, 1 otherwise.
/// Symmetric with zero self-distance, but not a metric.
int hard_semantic_distance(const SemanticFingerprint& a, const SemanticFingerprint& b);

}  // namespace esdiv

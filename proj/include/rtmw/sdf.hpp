#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rtmw/time.hpp"

namespace rtmw {

struct SdfEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  std::uint32_t produce = 1;
  std::uint32_t consume = 1;
  std::uint32_t initial_tokens = 0;
};

struct SdfActor {
  std::string name;
  Nanos wcet = 0;
};

// Synchronous dataflow graph. Period/deadline apply to one iteration and are
// copied onto the roots of the expansion.
struct SdfGraph {
  std::vector<SdfActor> actors;
  std::vector<SdfEdge> edges;
  Nanos period = 0;
  Nanos deadline = 0;
};

// One node of the expanded DAG: firing `firing` of actor `actor`, named
// "actor#firing".
struct DagNode {
  std::string name;
  std::size_t actor = 0;
  std::uint32_t firing = 0;
};

// Token flow of one iteration from producer firing to consumer firing.
struct DagEdge {
  std::size_t src = 0;  // DagNode index
  std::size_t dst = 0;
  std::uint32_t tokens = 0;
};

struct DagExpansion {
  std::vector<std::uint64_t> repetition;  // per actor
  std::vector<DagNode> nodes;
  std::vector<DagEdge> edges;
};

// Minimal positive repetition vector: produce*q[src] == consume*q[dst] on
// every edge. Throws InconsistencyError naming the violated edge.
std::vector<std::uint64_t> repetition_vector(const SdfGraph& graph);

// Expands one iteration into a DAG whose edges follow token flow. Tokens
// present initially are consumed without a precedence edge. Throws
// InconsistencyError or DeadlockError.
DagExpansion expand_sdf(const SdfGraph& graph);

}  // namespace rtmw

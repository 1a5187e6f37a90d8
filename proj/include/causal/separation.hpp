#pragma once

#include <optional>
#include <vector>

#include "causal/graph.hpp"

namespace causal {

struct SeparationQuery {
  NodeSet a;
  NodeSet b;
  NodeSet given;
};

// True iff every path between an a-node and a b-node is blocked by `given`.
// The conditioning set may contain observed nodes only.
bool d_separated(const ExpandedGraph& g, const SeparationQuery& q);
bool d_separated(const ExpandedGraph& g, const NodeSet& a, const NodeSet& b,
                 const NodeSet& given);

// When a and b are connected, one open path as a node sequence; otherwise
// nullopt.  Used for diagnostics on negative verdicts.
std::optional<std::vector<int>> find_open_path(const ExpandedGraph& g,
                                               const NodeSet& a, const NodeSet& b,
                                               const NodeSet& given);

bool has_directed_path(const ExpandedGraph& g, int from, const NodeSet& to);

// All back-door paths from x to y blocked by z: d-separation with x's
// outgoing arrows removed.
bool backdoor_blocked(const ExpandedGraph& g, const NodeSet& x, const NodeSet& y,
                      const NodeSet& z);
bool backdoor_blocked(const ExpandedGraph& g, int x, const NodeSet& y,
                      const NodeSet& z);

enum class BlockFail { TargetHit, ResidualPath };

struct BlockingSetResult {
  bool found = false;
  NodeSet set;
  BlockFail reason = BlockFail::ResidualPath;

  static BlockingSetResult ok(NodeSet s) { return {true, std::move(s), {}}; }
  static BlockingSetResult fail(BlockFail r) { return {false, {}, r}; }
};

const char* to_string(BlockFail r);

struct Surgery {
  NodeSet cut_incoming;
  NodeSet cut_outgoing;
};

struct BlockingOptions {
  NodeSet context;  // always-conditioned nodes, never members of the result
  // Candidate deletion order for the greedy minimization pass; defaults to
  // declaration order.
  const std::vector<int>* deletion_order = nullptr;
};

// The minimal-blocking-set construction: parent shields on both sides,
// migration of confounded (or forbidden) shield members, a residual-path
// check, then greedy minimization.  `a` plays the role of X, `b` of Y.
BlockingSetResult find_blocking_set(const CausalDiagram& g, const NodeSet& a,
                                    const NodeSet& b, const NodeSet& forbidden,
                                    const Surgery& surgery,
                                    const BlockingOptions& opts = {});

BlockingSetResult find_minimal_blocking_set(const CausalDiagram& g, int x,
                                            const NodeSet& y,
                                            const BlockingOptions& opts = {});

BlockingSetResult find_blocking_set_with_forbidden(const CausalDiagram& g,
                                                   const NodeSet& a,
                                                   const NodeSet& b,
                                                   const NodeSet& forbidden,
                                                   const Surgery& surgery);

}  // namespace causal

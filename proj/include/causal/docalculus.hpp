#pragma once

#include "causal/graph.hpp"
#include "causal/separation.hpp"

namespace causal {

// Applicability certificate for one inference rule: the surgery that was
// applied and the separation query evaluated on the mutilated graph.
// Re-running the certificate must reproduce `holds`.
struct RuleCheck {
  int rule = 0;
  NodeSet x, y, z, w;
  bool holds = false;
  Surgery surgery;
  SeparationQuery query;
};

// Rule 1, insertion/deletion of observations:
//   P(y|do(x),z,w) = P(y|do(x),w)  when  (Y _||_ Z | X,W) in G with X's
//   incoming arrows removed.
RuleCheck rule1_applicable(const ExpandedGraph& g, const NodeSet& y,
                           const NodeSet& z, const NodeSet& x, const NodeSet& w);

// Rule 2, action/observation exchange:
//   P(y|do(x),do(z),w) = P(y|do(x),z,w)  when  (Y _||_ Z | X,W) in G with
//   X's incoming and Z's outgoing arrows removed.
RuleCheck rule2_applicable(const ExpandedGraph& g, const NodeSet& y,
                           const NodeSet& z, const NodeSet& x, const NodeSet& w);

// Rule 3, insertion/deletion of actions:
//   P(y|do(x),do(z),w) = P(y|do(x),w)  when  (Y _||_ Z | X,W) in G with
//   incoming arrows removed for X and for Z(W), the z-nodes that are not
//   ancestors of any w-node once X's incoming arrows are gone.
RuleCheck rule3_applicable(const ExpandedGraph& g, const NodeSet& y,
                           const NodeSet& z, const NodeSet& x, const NodeSet& w);

// Re-evaluates the stored surgery + separation query against g.
bool replay(const ExpandedGraph& g, const RuleCheck& check);

}  // namespace causal

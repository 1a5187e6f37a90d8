#pragma once

#include <optional>
#include <string>
#include <vector>

#include "causal/docalculus.hpp"
#include "causal/estimand.hpp"
#include "causal/graph.hpp"
#include "causal/separation.hpp"

namespace causal {

// A causal-effect query P(y | do(x), context).  The intervention is a single
// variable; context carries observed conditioning accumulated by target
// decomposition and is empty at the top level.
struct Query {
  int x = -1;
  NodeSet y;
  NodeSet context;
};

void validate_query(const CausalDiagram& g, const Query& q);

struct Verdict {
  bool identifiable = false;
  std::string condition;  // "1", "2", "3", "4" or "decomposed"
  std::optional<Estimand> estimand;
  std::vector<RuleCheck> trace;
  std::vector<std::string> failures;  // per-condition reasons on failure
};

struct IdentifyOptions {
  // Bitmask of conditions to skip (bit k-1 disables condition k); used by
  // tests to force success through a later condition.
  unsigned disable_conditions = 0;
  // When set, the greedy blocking-set deletion pass runs in a seeded shuffle
  // of declaration order instead of declaration order itself.
  std::optional<unsigned> deletion_shuffle_seed;
};

struct ConditionResult {
  std::optional<Estimand> estimand;
  std::vector<RuleCheck> trace;
  std::string failure;

  bool ok() const { return estimand.has_value(); }
};

ConditionResult check_condition1(const CausalDiagram& g, const ExpandedGraph& e,
                                 const Query& q);
ConditionResult check_condition2(const CausalDiagram& g, const ExpandedGraph& e,
                                 const Query& q);
ConditionResult check_condition3(const CausalDiagram& g, const ExpandedGraph& e,
                                 const Query& q, const IdentifyOptions& opts = {});
ConditionResult check_condition4(const CausalDiagram& g, const ExpandedGraph& e,
                                 const Query& q, const IdentifyOptions& opts = {});

// Sequential target chaining: splits y into non-descendants of x followed by
// descendants in topological order, each sub-query's context accumulating the
// earlier targets.  Returns a single query unchanged when no split applies.
std::vector<Query> decompose_targets(const CausalDiagram& g, const Query& q);

Verdict identify(const CausalDiagram& g, const Query& q,
                 const IdentifyOptions& opts = {});

}  // namespace causal

#include "causal/docalculus.hpp"

namespace causal {

namespace {

void check_disjoint(const NodeSet& x, const NodeSet& y, const NodeSet& z,
                    const NodeSet& w) {
  const NodeSet* sets[] = {&x, &y, &z, &w};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (!disjoint(*sets[i], *sets[j]))
        throw std::invalid_argument("rule sets must be pairwise disjoint");
}

RuleCheck evaluate(const ExpandedGraph& g, int rule, NodeSet x, NodeSet y,
                   NodeSet z, NodeSet w, Surgery surgery) {
  RuleCheck out;
  out.rule = rule;
  out.x = std::move(x);
  out.y = std::move(y);
  out.z = std::move(z);
  out.w = std::move(w);
  out.surgery = std::move(surgery);
  out.query = SeparationQuery{out.y, out.z, set_union(out.x, out.w)};
  // Empty y or z makes the rule's identity vacuous.
  out.holds = out.y.empty() || out.z.empty() ||
              d_separated(mutilate(g, out.surgery.cut_incoming, out.surgery.cut_outgoing),
                          out.query);
  return out;
}

}  // namespace

RuleCheck rule1_applicable(const ExpandedGraph& g, const NodeSet& y,
                           const NodeSet& z, const NodeSet& x, const NodeSet& w) {
  check_disjoint(x, y, z, w);
  return evaluate(g, 1, x, y, z, w, Surgery{x, {}});
}

RuleCheck rule2_applicable(const ExpandedGraph& g, const NodeSet& y,
                           const NodeSet& z, const NodeSet& x, const NodeSet& w) {
  check_disjoint(x, y, z, w);
  return evaluate(g, 2, x, y, z, w, Surgery{x, z});
}

RuleCheck rule3_applicable(const ExpandedGraph& g, const NodeSet& y,
                           const NodeSet& z, const NodeSet& x, const NodeSet& w) {
  check_disjoint(x, y, z, w);
  NodeSet zw = z_given_w(g, x, z, w);
  return evaluate(g, 3, x, y, z, w, Surgery{set_union(x, zw), {}});
}

bool replay(const ExpandedGraph& g, const RuleCheck& check) {
  if (check.y.empty() || check.z.empty()) return check.holds;
  bool holds = d_separated(
      mutilate(g, check.surgery.cut_incoming, check.surgery.cut_outgoing), check.query);
  return holds == check.holds;
}

}  // namespace causal

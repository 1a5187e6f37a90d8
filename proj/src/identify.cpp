#include "causal/identify.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <sstream>

namespace causal {

void validate_query(const CausalDiagram& g, const Query& q) {
  if (q.x < 0 || q.x >= g.size())
    throw std::invalid_argument("unknown intervention node");
  if (q.y.empty()) throw std::invalid_argument("target set must be nonempty");
  if (contains(q.y, q.x) || contains(q.context, q.x))
    throw std::invalid_argument("intervention node overlaps targets or context");
  if (!disjoint(q.y, q.context))
    throw std::invalid_argument("targets overlap context");
  for (int v : q.y)
    if (v < 0 || v >= g.size()) throw std::invalid_argument("unknown target node");
  for (int v : q.context)
    if (v < 0 || v >= g.size()) throw std::invalid_argument("unknown context node");
}

namespace {

std::vector<VarRef> free_refs(const CausalDiagram& g, const NodeSet& s) {
  std::vector<VarRef> out;
  for (int v : s) out.push_back(VarRef::free(g.name(v)));
  return out;
}

void append(std::vector<VarRef>& dst, const std::vector<VarRef>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

void append(std::vector<RuleCheck>& dst, const std::vector<RuleCheck>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

std::string join_names(const CausalDiagram& g, const NodeSet& s) {
  std::string out;
  for (int v : s) {
    if (!out.empty()) out += ",";
    out += g.name(v);
  }
  return out;
}

std::string path_names(const ExpandedGraph& e, const std::vector<int>& path) {
  std::string out;
  for (int v : path) {
    if (!out.empty()) out += " ~ ";
    out += e.names[v];
  }
  return out;
}

NodeSet observed_only(const ExpandedGraph& e, const NodeSet& s) {
  NodeSet out;
  for (int v : s)
    if (e.is_observed(v)) out.insert(v);
  return out;
}

struct EngineContext {
  const CausalDiagram& g;
  const ExpandedGraph& e;
  IdentifyOptions opts;
  std::vector<int> deletion_order;  // empty = declaration order
  std::vector<Query> stack;

  BlockingOptions blocking(const NodeSet& context) const {
    BlockingOptions b;
    b.context = context;
    if (!deletion_order.empty()) b.deletion_order = &deletion_order;
    return b;
  }
  bool on_stack(const Query& q) const {
    for (const auto& s : stack)
      if (s.x == q.x && s.y == q.y && s.context == q.context) return true;
    return false;
  }
};

Verdict identify_impl(EngineContext& ctx, const Query& q);

ConditionResult condition1(EngineContext& ctx, const Query& q) {
  ConditionResult out;
  RuleCheck rc = rule3_applicable(ctx.e, q.y, NodeSet{q.x}, {}, q.context);
  if (!rc.holds) {
    if (has_directed_path(ctx.e, q.x, q.y))
      out.failure = "directed path from " + ctx.g.name(q.x) + " to a target";
    else
      out.failure = "context keeps " + ctx.g.name(q.x) + " relevant to the targets";
    return out;
  }
  out.trace.push_back(std::move(rc));
  out.estimand = Estimand::term(free_refs(ctx.g, q.y), free_refs(ctx.g, q.context));
  return out;
}

ConditionResult condition2(EngineContext& ctx, const Query& q) {
  ConditionResult out;
  RuleCheck rc = rule2_applicable(ctx.e, q.y, NodeSet{q.x}, {}, q.context);
  if (!rc.holds) {
    out.failure = "back-door path from " + ctx.g.name(q.x) + " to a target";
    auto witness = find_open_path(mutilate(ctx.e, {}, NodeSet{q.x}), NodeSet{q.x},
                                  q.y, q.context);
    if (witness) out.failure += " (" + path_names(ctx.e, *witness) + ")";
    return out;
  }
  out.trace.push_back(std::move(rc));
  std::vector<VarRef> given{VarRef::fixed(ctx.g.name(q.x))};
  append(given, free_refs(ctx.g, q.context));
  out.estimand = Estimand::term(free_refs(ctx.g, q.y), std::move(given));
  return out;
}

ConditionResult condition3(EngineContext& ctx, const Query& q) {
  ConditionResult out;
  auto res = find_blocking_set(ctx.g, NodeSet{q.x}, q.y, {}, Surgery{},
                               ctx.blocking(q.context));
  if (!res.found) {
    out.failure = std::string("no minimal blocking set (") + to_string(res.reason) + ")";
    return out;
  }
  const NodeSet& bset = res.set;
  if (bset.empty()) {
    // Degenerate blocking set: the query is already back-door free.
    return condition2(ctx, q);
  }

  RuleCheck exchange =
      rule2_applicable(ctx.e, q.y, NodeSet{q.x}, {}, set_union(bset, q.context));
  if (!exchange.holds) {
    out.failure = "blocking set " + join_names(ctx.g, bset) +
                  " fails the action/observation exchange";
    return out;
  }

  Query sub{q.x, bset, q.context};
  Verdict sub_verdict = identify_impl(ctx, sub);
  if (!sub_verdict.identifiable) {
    bool cyclic = std::any_of(sub_verdict.failures.begin(), sub_verdict.failures.end(),
                              [](const std::string& f) { return f == "cyclic-subquery"; });
    out.failure = cyclic ? "cyclic-subquery"
                         : "P(" + join_names(ctx.g, bset) + "|do(" + ctx.g.name(q.x) +
                               ")) not identifiable";
    return out;
  }

  std::vector<VarRef> bound;
  for (int v : bset)
    bound.push_back(VarRef::bound(ctx.g.name(v), VarRef::free(ctx.g.name(v)).display));

  std::vector<VarRef> given{VarRef::fixed(ctx.g.name(q.x))};
  append(given, bound);
  append(given, free_refs(ctx.g, q.context));

  std::vector<VarRef> sub_vars = bound;
  append(sub_vars, free_refs(ctx.g, q.context));

  Estimand outer = Estimand::sum(
      bound, Estimand::product({Estimand::term(free_refs(ctx.g, q.y), std::move(given)),
                                Estimand::placeholder("sub", std::move(sub_vars))}));
  out.estimand = substitute(outer, "sub", *sub_verdict.estimand);
  out.trace.push_back(std::move(exchange));
  append(out.trace, sub_verdict.trace);
  return out;
}

ConditionResult condition4(EngineContext& ctx, const Query& q) {
  ConditionResult out;
  const CausalDiagram& g = ctx.g;
  const ExpandedGraph& e = ctx.e;

  NodeSet desc_x = observed_only(e, closure(e, NodeSet{q.x}, Direction::Descendants, false));
  NodeSet anc_y = observed_only(e, closure(e, q.y, Direction::Ancestors, false));
  NodeSet z1;
  for (int c : g.children(q.x))
    if (contains(anc_y, c) && !contains(q.y, c) && !contains(q.context, c))
      z1.insert(c);
  if (z1.empty()) {
    out.failure = "no usable Z1 (children of " + g.name(q.x) +
                  " intersected with ancestors of the targets)";
    return out;
  }

  // Z1 must cut every directed path from x to the targets.
  {
    std::vector<char> seen(e.size(), 0);
    std::deque<int> work{q.x};
    seen[q.x] = 1;
    bool leak = false;
    while (!work.empty() && !leak) {
      int v = work.front();
      work.pop_front();
      for (int c : e.children[v]) {
        if (contains(z1, c) || seen[c]) continue;
        if (contains(q.y, c)) {
          leak = true;
          break;
        }
        seen[c] = 1;
        work.push_back(c);
      }
    }
    if (leak) {
      out.failure = "Z1 = {" + join_names(g, z1) + "} does not block every directed path";
      return out;
    }
  }

  NodeSet forbidden =
      set_difference(set_union(NodeSet{q.x}, desc_x), set_union(z1, q.y));
  auto res = find_blocking_set(g, z1, q.y, forbidden, Surgery{NodeSet{q.x}, {}},
                               ctx.blocking(q.context));
  if (!res.found) {
    out.failure = std::string("no non-descendant Z2 blocks Z1 ~ targets (") +
                  to_string(res.reason) + ")";
    return out;
  }
  const NodeSet& z2 = res.set;
  NodeSet z2c = set_union(z2, q.context);

  struct Step {
    const char* what;
    RuleCheck rc;
  };
  std::vector<Step> steps;
  steps.push_back({"exchange do(z1) for z1 given do(x)",
                   rule2_applicable(e, q.y, z1, NodeSet{q.x}, z2c)});
  steps.push_back({"delete do(x) under do(z1)",
                   rule3_applicable(e, q.y, NodeSet{q.x}, z1, z2c)});
  steps.push_back({"exchange do(z1) for z1 given x'",
                   rule2_applicable(e, q.y, z1, {}, set_union(NodeSet{q.x}, z2c))});
  steps.push_back({"delete do(z1) from P(x'|...)",
                   rule3_applicable(e, NodeSet{q.x}, z1, {}, z2c)});
  if (!z2.empty())
    steps.push_back({"delete do(x) from P(z2|...)",
                     rule3_applicable(e, z2, NodeSet{q.x}, {}, q.context)});
  steps.push_back({"exchange do(x) for x in P(z1|...)",
                   rule2_applicable(e, z1, NodeSet{q.x}, {}, z2c)});
  for (auto& s : steps) {
    if (!s.rc.holds) {
      out.failure = std::string("derivation step not licensed: ") + s.what;
      return out;
    }
  }

  std::vector<VarRef> z1_bound, z2_bound;
  for (int v : z1)
    z1_bound.push_back(VarRef::bound(g.name(v), VarRef::free(g.name(v)).display));
  for (int v : z2)
    z2_bound.push_back(VarRef::bound(g.name(v), VarRef::free(g.name(v)).display));
  VarRef x_prime = VarRef::bound(g.name(q.x), VarRef::free(g.name(q.x)).display + "'");
  auto ctx_refs = free_refs(g, q.context);

  std::vector<VarRef> y_given = z1_bound;
  append(y_given, z2_bound);
  y_given.push_back(x_prime);
  append(y_given, ctx_refs);

  std::vector<VarRef> xp_given = z2_bound;
  append(xp_given, ctx_refs);

  std::vector<VarRef> z1_given{VarRef::fixed(g.name(q.x))};
  append(z1_given, z2_bound);
  append(z1_given, ctx_refs);

  std::vector<Estimand> factors;
  factors.push_back(Estimand::term(free_refs(g, q.y), std::move(y_given)));
  factors.push_back(Estimand::term({x_prime}, std::move(xp_given)));
  factors.push_back(Estimand::term(z1_bound, std::move(z1_given)));
  if (!z2.empty()) factors.push_back(Estimand::term(z2_bound, ctx_refs));

  std::vector<VarRef> outer_vars = z1_bound;
  append(outer_vars, z2_bound);
  out.estimand = Estimand::sum(
      std::move(outer_vars),
      Estimand::sum({x_prime}, Estimand::product(std::move(factors))));
  for (auto& s : steps) out.trace.push_back(std::move(s.rc));
  return out;
}

Verdict identify_impl(EngineContext& ctx, const Query& q) {
  Verdict verdict;
  if (ctx.on_stack(q)) {
    verdict.failures.push_back("cyclic-subquery");
    return verdict;
  }
  ctx.stack.push_back(q);

  struct Entry {
    const char* label;
    ConditionResult res;
  };
  std::vector<Entry> attempts;
  auto emit = [&](const char* label, ConditionResult res) -> bool {
    if (res.ok()) {
      verdict.identifiable = true;
      verdict.condition = label;
      verdict.estimand = std::move(res.estimand);
      verdict.trace = std::move(res.trace);
      return true;
    }
    verdict.failures.push_back(std::string("condition") + label + ": " + res.failure);
    return false;
  };

  bool done = false;
  if (!(ctx.opts.disable_conditions & 1u) && !done)
    done = emit("1", condition1(ctx, q));
  if (!(ctx.opts.disable_conditions & 2u) && !done)
    done = emit("2", condition2(ctx, q));
  if (!(ctx.opts.disable_conditions & 4u) && !done)
    done = emit("3", condition3(ctx, q));
  if (!(ctx.opts.disable_conditions & 8u) && !done)
    done = emit("4", condition4(ctx, q));

  if (!done && q.y.size() >= 2) {
    auto subs = decompose_targets(ctx.g, q);
    if (subs.size() >= 2) {
      std::vector<Estimand> factors;
      std::vector<RuleCheck> trace;
      bool all_ok = true;
      for (const auto& sub : subs) {
        Verdict v = identify_impl(ctx, sub);
        if (!v.identifiable) {
          verdict.failures.push_back(
              "decomposition: P(" + join_names(ctx.g, sub.y) + "|do(" +
              ctx.g.name(q.x) + ")," + join_names(ctx.g, sub.context) +
              ") not identifiable");
          all_ok = false;
          break;
        }
        factors.push_back(std::move(*v.estimand));
        append(trace, v.trace);
      }
      if (all_ok) {
        verdict.identifiable = true;
        verdict.condition = "decomposed";
        verdict.estimand = Estimand::product(std::move(factors));
        verdict.trace = std::move(trace);
      }
    } else {
      verdict.failures.push_back("decomposition: no valid target split");
    }
  }

  ctx.stack.pop_back();
  return verdict;
}

std::vector<int> topological_order(const CausalDiagram& g) {
  std::vector<int> indeg(g.size(), 0);
  for (auto [a, b] : g.directed()) {
    (void)a;
    ++indeg[b];
  }
  NodeSet ready;
  for (int v = 0; v < g.size(); ++v)
    if (indeg[v] == 0) ready.insert(v);
  std::vector<int> order;
  while (!ready.empty()) {
    int v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (auto [a, b] : g.directed())
      if (a == v && --indeg[b] == 0) ready.insert(b);
  }
  return order;
}

}  // namespace

std::vector<Query> decompose_targets(const CausalDiagram& g, const Query& q) {
  validate_query(g, q);
  NodeSet desc_x = closure(g, NodeSet{q.x}, Direction::Descendants, false);
  NodeSet y1 = set_difference(q.y, desc_x);
  NodeSet y2 = set_difference(q.y, y1);

  std::vector<int> y2_ordered;
  for (int v : topological_order(g))
    if (contains(y2, v)) y2_ordered.push_back(v);

  std::vector<Query> out;
  NodeSet context = q.context;
  if (!y1.empty()) {
    out.push_back(Query{q.x, y1, context});
    context = set_union(context, y1);
  }
  for (int v : y2_ordered) {
    out.push_back(Query{q.x, NodeSet{v}, context});
    context.insert(v);
  }
  return out;
}

namespace {

EngineContext make_context(const CausalDiagram& g, const ExpandedGraph& e,
                           const IdentifyOptions& opts) {
  EngineContext ctx{g, e, opts, {}, {}};
  if (opts.deletion_shuffle_seed) {
    ctx.deletion_order.resize(g.size());
    for (int v = 0; v < g.size(); ++v) ctx.deletion_order[v] = v;
    std::mt19937 rng(*opts.deletion_shuffle_seed);
    std::shuffle(ctx.deletion_order.begin(), ctx.deletion_order.end(), rng);
  }
  return ctx;
}

}  // namespace

ConditionResult check_condition1(const CausalDiagram& g, const ExpandedGraph& e,
                                 const Query& q) {
  validate_query(g, q);
  EngineContext ctx = make_context(g, e, {});
  return condition1(ctx, q);
}

ConditionResult check_condition2(const CausalDiagram& g, const ExpandedGraph& e,
                                 const Query& q) {
  validate_query(g, q);
  EngineContext ctx = make_context(g, e, {});
  return condition2(ctx, q);
}

ConditionResult check_condition3(const CausalDiagram& g, const ExpandedGraph& e,
                                 const Query& q, const IdentifyOptions& opts) {
  validate_query(g, q);
  EngineContext ctx = make_context(g, e, opts);
  return condition3(ctx, q);
}

ConditionResult check_condition4(const CausalDiagram& g, const ExpandedGraph& e,
                                 const Query& q, const IdentifyOptions& opts) {
  validate_query(g, q);
  EngineContext ctx = make_context(g, e, opts);
  return condition4(ctx, q);
}

Verdict identify(const CausalDiagram& g, const Query& q, const IdentifyOptions& opts) {
  validate_query(g, q);
  ExpandedGraph e = expand_latents(g);
  EngineContext ctx = make_context(g, e, opts);
  return identify_impl(ctx, q);
}

}  // namespace causal

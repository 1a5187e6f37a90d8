#include "causal/separation.hpp"

#include <algorithm>
#include <deque>

namespace causal {

namespace {

void check_query(const ExpandedGraph& g, const SeparationQuery& q) {
  if (q.a.empty() || q.b.empty())
    throw std::invalid_argument("separation query sets must be nonempty");
  if (!disjoint(q.a, q.b) || !disjoint(q.a, q.given) || !disjoint(q.b, q.given))
    throw std::invalid_argument("separation query sets must be pairwise disjoint");
  for (const NodeSet* s : {&q.a, &q.b, &q.given})
    for (int v : *s) {
      if (v < 0 || v >= g.size())
        throw std::invalid_argument("unknown node in separation query");
      if (!g.is_observed(v))
        throw std::invalid_argument("latent node in separation query: " + g.names[v]);
    }
}

// Reachability over (node, approach-direction) states.  Direction Up means the
// trail reaches v from a child (or v is a source); Down means from a parent.
// A collider is passable only when it has a conditioned descendant.
struct State {
  int node;
  int dir;  // 0 = up, 1 = down
};

}  // namespace

bool d_separated(const ExpandedGraph& g, const SeparationQuery& q) {
  check_query(g, q);
  NodeSet anc_given = closure(g, q.given, Direction::Ancestors, true);

  std::vector<char> seen(static_cast<size_t>(g.size()) * 2, 0);
  std::deque<State> work;
  for (int v : q.a) {
    work.push_back({v, 0});
    seen[v * 2 + 0] = 1;
  }
  auto push = [&](int v, int dir) {
    if (!seen[v * 2 + dir]) {
      seen[v * 2 + dir] = 1;
      work.push_back({v, dir});
    }
  };
  while (!work.empty()) {
    auto [v, dir] = work.front();
    work.pop_front();
    if (contains(q.b, v)) return false;
    bool conditioned = contains(q.given, v);
    if (dir == 0) {
      if (conditioned) continue;
      for (int p : g.parents[v]) push(p, 0);
      for (int c : g.children[v]) push(c, 1);
    } else {
      if (!conditioned)
        for (int c : g.children[v]) push(c, 1);
      if (contains(anc_given, v))
        for (int p : g.parents[v]) push(p, 0);
    }
  }
  return true;
}

bool d_separated(const ExpandedGraph& g, const NodeSet& a, const NodeSet& b,
                 const NodeSet& given) {
  return d_separated(g, SeparationQuery{a, b, given});
}

std::optional<std::vector<int>> find_open_path(const ExpandedGraph& g,
                                               const NodeSet& a, const NodeSet& b,
                                               const NodeSet& given) {
  SeparationQuery q{a, b, given};
  check_query(g, q);
  NodeSet anc_given = closure(g, given, Direction::Ancestors, true);

  std::vector<int> prev(static_cast<size_t>(g.size()) * 2, -1);
  std::vector<char> seen(static_cast<size_t>(g.size()) * 2, 0);
  std::deque<State> work;
  for (int v : a) {
    work.push_back({v, 0});
    seen[v * 2 + 0] = 1;
  }
  auto push = [&](int v, int dir, int from_state) {
    if (!seen[v * 2 + dir]) {
      seen[v * 2 + dir] = 1;
      prev[v * 2 + dir] = from_state;
      work.push_back({v, dir});
    }
  };
  while (!work.empty()) {
    auto [v, dir] = work.front();
    work.pop_front();
    int state = v * 2 + dir;
    if (contains(b, v)) {
      std::vector<int> path;
      for (int s = state; s != -1; s = prev[s]) path.push_back(s / 2);
      std::reverse(path.begin(), path.end());
      return path;
    }
    bool conditioned = contains(given, v);
    if (dir == 0) {
      if (conditioned) continue;
      for (int p : g.parents[v]) push(p, 0, state);
      for (int c : g.children[v]) push(c, 1, state);
    } else {
      if (!conditioned)
        for (int c : g.children[v]) push(c, 1, state);
      if (contains(anc_given, v))
        for (int p : g.parents[v]) push(p, 0, state);
    }
  }
  return std::nullopt;
}

bool has_directed_path(const ExpandedGraph& g, int from, const NodeSet& to) {
  if (from < 0 || from >= g.size())
    throw std::invalid_argument("unknown node");
  NodeSet desc = closure(g, NodeSet{from}, Direction::Descendants, false);
  for (int v : to) {
    if (v < 0 || v >= g.size()) throw std::invalid_argument("unknown node");
    if (contains(desc, v)) return true;
  }
  return false;
}

bool backdoor_blocked(const ExpandedGraph& g, const NodeSet& x, const NodeSet& y,
                      const NodeSet& z) {
  if (!disjoint(z, x) || !disjoint(z, y))
    throw std::invalid_argument("blocking set overlaps query sets");
  return d_separated(mutilate(g, {}, x), x, y, z);
}

bool backdoor_blocked(const ExpandedGraph& g, int x, const NodeSet& y,
                      const NodeSet& z) {
  return backdoor_blocked(g, NodeSet{x}, y, z);
}

const char* to_string(BlockFail r) {
  switch (r) {
    case BlockFail::TargetHit: return "target-hit";
    case BlockFail::ResidualPath: return "residual-path";
  }
  return "?";
}

namespace {

// One side of the shield construction: R1 starts as the endpoint set, R2 as
// its parents.  Members of R2 that are confounded with R1 (or forbidden, i.e.
// treated as unobservable) migrate into R1 and contribute their own parents,
// iterating to fixpoint.  Returns false when a migrated or shield node lands
// in the opposing endpoint set.
bool build_shield(const CausalDiagram& g, const NodeSet& endpoints,
                  const NodeSet& opposite, const NodeSet& forbidden,
                  NodeSet& shield_out) {
  NodeSet r1 = endpoints;
  NodeSet r2;
  auto add_parents = [&](int v) {
    for (int p : g.parents(v))
      if (!contains(r1, p)) r2.insert(p);
  };
  for (int v : endpoints) add_parents(v);

  bool changed = true;
  while (changed) {
    changed = false;
    for (int r : r2) {
      bool confounded = false;
      for (int m : g.confounder_partners(r))
        if (contains(r1, m)) confounded = true;
      if (confounded || contains(forbidden, r)) {
        if (contains(opposite, r)) return false;
        r2.erase(r);
        r1.insert(r);
        add_parents(r);
        changed = true;
        break;
      }
    }
  }
  if (!disjoint(r2, opposite)) return false;
  shield_out = r2;
  return true;
}

}  // namespace

BlockingSetResult find_blocking_set(const CausalDiagram& g, const NodeSet& a,
                                    const NodeSet& b, const NodeSet& forbidden,
                                    const Surgery& surgery,
                                    const BlockingOptions& opts) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("blocking-set endpoints must be nonempty");
  if (!disjoint(a, b))
    throw std::invalid_argument("blocking-set endpoints must be disjoint");
  if (!disjoint(forbidden, b))
    throw std::invalid_argument("forbidden set overlaps targets");

  // Back-door analysis only: work in the surgical graph with a's outgoing
  // arrows removed, for both the shields and the separation checks.
  CausalDiagram d = mutilate(g, surgery.cut_incoming, surgery.cut_outgoing);
  CausalDiagram dcut = mutilate(d, {}, a);
  ExpandedGraph e = mutilate(expand_latents(d), {}, a);

  NodeSet shield_a, shield_b;
  if (!build_shield(dcut, a, b, forbidden, shield_a))
    return BlockingSetResult::fail(BlockFail::TargetHit);
  if (!build_shield(dcut, b, a, forbidden, shield_b))
    return BlockingSetResult::fail(BlockFail::TargetHit);

  NodeSet bset = set_union(shield_a, shield_b);
  bset = set_difference(bset, set_union(a, b));
  bset = set_difference(bset, opts.context);

  auto blocked = [&](const NodeSet& cand) {
    return d_separated(e, a, b, set_union(cand, opts.context));
  };
  if (!blocked(bset)) return BlockingSetResult::fail(BlockFail::ResidualPath);

  std::vector<int> order(bset.begin(), bset.end());
  if (opts.deletion_order) {
    std::vector<int> custom;
    for (int v : *opts.deletion_order)
      if (contains(bset, v)) custom.push_back(v);
    for (int v : order)
      if (std::find(custom.begin(), custom.end(), v) == custom.end())
        custom.push_back(v);
    order = std::move(custom);
  }

  bool removed = true;
  while (removed) {
    removed = false;
    for (int v : order) {
      if (!contains(bset, v)) continue;
      NodeSet trial = bset;
      trial.erase(v);
      if (blocked(trial)) {
        bset = std::move(trial);
        removed = true;
      }
    }
  }
  return BlockingSetResult::ok(bset);
}

BlockingSetResult find_minimal_blocking_set(const CausalDiagram& g, int x,
                                            const NodeSet& y,
                                            const BlockingOptions& opts) {
  if (contains(y, x)) throw std::invalid_argument("x must not be a target");
  return find_blocking_set(g, NodeSet{x}, y, {}, Surgery{}, opts);
}

BlockingSetResult find_blocking_set_with_forbidden(const CausalDiagram& g,
                                                   const NodeSet& a,
                                                   const NodeSet& b,
                                                   const NodeSet& forbidden,
                                                   const Surgery& surgery) {
  return find_blocking_set(g, a, b, forbidden, surgery, {});
}

}  // namespace causal

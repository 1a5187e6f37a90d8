#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace oracles {

using namespace causal;

namespace {

bool has_edge(const ExpandedGraph& g, int from, int to) {
  for (int c : g.children[from])
    if (c == to) return true;
  return false;
}

}  // namespace

bool path_d_separated(const ExpandedGraph& g, const NodeSet& a,
                      const NodeSet& b, const NodeSet& given) {
  NodeSet anc_given = closure(g, given, Direction::Ancestors, true);
  std::vector<int> path;
  std::vector<char> on_path(g.size(), 0);
  bool open_found = false;

  // Recursive enumeration of simple paths: path = [s, ..., u], currently at
  // v; extending by a neighbor n makes v an inner node whose blocking status
  // depends on whether (u, v, n) forms a collider.
  std::function<void(int)> walk = [&](int v) {
    if (open_found) return;
    if (contains(b, v)) {
      open_found = true;
      return;
    }
    std::vector<int> neighbors = g.children[v];
    neighbors.insert(neighbors.end(), g.parents[v].begin(), g.parents[v].end());
    for (int n : neighbors) {
      if (open_found) return;
      if (on_path[n]) continue;
      if (path.size() >= 1) {
        int u = path.back();
        bool collider = has_edge(g, u, v) && has_edge(g, n, v);
        bool blocked = collider ? !contains(anc_given, v) : contains(given, v);
        if (blocked) continue;
      }
      path.push_back(v);
      on_path[n] = 1;
      walk(n);
      on_path[n] = 0;
      path.pop_back();
    }
  };

  for (int s : a) {
    path.clear();
    std::fill(on_path.begin(), on_path.end(), 0);
    on_path[s] = 1;
    walk(s);
    if (open_found) return false;
  }
  return true;
}

CausalDiagram random_diagram(std::mt19937& rng, int max_nodes, int max_arcs,
                             double edge_rate) {
  std::uniform_int_distribution<int> node_count(2, max_nodes);
  int n = node_count(rng);
  CausalDiagram g;
  for (int i = 0; i < n; ++i) g.add_node("N" + std::to_string(i));

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  double p = std::min(1.0, edge_rate / n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng) < p) g.add_directed(order[i], order[j]);

  std::uniform_int_distribution<int> arc_count(0, max_arcs);
  std::uniform_int_distribution<int> pick(0, n - 1);
  int arcs = arc_count(rng);
  for (int k = 0; k < arcs; ++k) {
    int a = pick(rng), b = pick(rng);
    if (a == b || g.has_bidirected(a, b)) continue;
    g.add_bidirected(a, b);
  }
  return g;
}

CausalDiagram sized_diagram(std::mt19937& rng, int nodes, int edges, int arcs) {
  CausalDiagram g;
  for (int i = 0; i < nodes; ++i) g.add_node("N" + std::to_string(i));
  std::vector<int> order(nodes);
  for (int i = 0; i < nodes; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_int_distribution<int> pick(0, nodes - 1);
  int placed = 0;
  while (placed < edges) {
    int i = pick(rng), j = pick(rng);
    if (i == j) continue;
    int a = order[std::min(i, j)], b = order[std::max(i, j)];
    if (g.has_directed(a, b)) continue;
    g.add_directed(a, b);
    ++placed;
  }
  placed = 0;
  while (placed < arcs) {
    int a = pick(rng), b = pick(rng);
    if (a == b || g.has_bidirected(a, b)) continue;
    g.add_bidirected(a, b);
    ++placed;
  }
  return g;
}

double mass(const Distribution& d, const std::map<std::string, int>& fixed) {
  std::vector<int> want(d.variables.size(), -1);
  for (const auto& [name, val] : fixed) want[d.var_index(name)] = val;
  int n = static_cast<int>(d.variables.size());
  std::vector<int> digits(n, 0);
  double total = 0;
  for (size_t idx = 0; idx < d.table.size(); ++idx) {
    bool match = true;
    for (int i = 0; i < n; ++i)
      if (want[i] >= 0 && digits[i] != want[i]) match = false;
    if (match) total += d.table[idx];
    for (int i = n - 1; i >= 0; --i) {
      if (++digits[i] < d.card(i)) break;
      digits[i] = 0;
    }
  }
  return total;
}

namespace {

using Assignment = std::map<std::string, int>;

// All value-index assignments of the given nodes.
std::vector<Assignment> assignments(const DiscreteModel& m, const NodeSet& s) {
  std::vector<Assignment> out{{}};
  for (int v : s) {
    std::vector<Assignment> next;
    for (const auto& a : out)
      for (int val = 0; val < m.card(v); ++val) {
        Assignment b = a;
        b[m.graph.names[v]] = val;
        next.push_back(std::move(b));
      }
    out = std::move(next);
  }
  return out;
}

Assignment merge(const Assignment& a, const Assignment& b) {
  Assignment out = a;
  out.insert(b.begin(), b.end());
  return out;
}

std::vector<std::string> values_for(const DiscreteModel& m, const NodeSet& s,
                                    const Assignment& a) {
  std::vector<std::string> out;
  for (int v : s) out.push_back(m.domains[v][a.at(m.graph.names[v])]);
  return out;
}

double cond(const Distribution& d, const Assignment& target,
            const Assignment& given) {
  double den = mass(d, given);
  if (den <= 1e-12) return -1;
  return mass(d, merge(target, given)) / den;
}

}  // namespace

double rule_identity_gap(const DiscreteModel& m, int rule, const NodeSet& y,
                         const NodeSet& z, const NodeSet& x, const NodeSet& w) {
  double gap = 0;
  auto note = [&](double lhs, double rhs) {
    if (lhs >= 0 && rhs >= 0) gap = std::max(gap, std::abs(lhs - rhs));
  };
  for (const auto& ax : assignments(m, x)) {
    Distribution dx = interventional_set(m, x, values_for(m, x, ax));
    if (rule == 1) {
      for (const auto& aw : assignments(m, w))
        for (const auto& az : assignments(m, z))
          for (const auto& ay : assignments(m, y))
            note(cond(dx, ay, merge(az, aw)), cond(dx, ay, aw));
      continue;
    }
    for (const auto& az : assignments(m, z)) {
      NodeSet xz = set_union(x, z);
      Distribution dxz = interventional_set(m, xz, values_for(m, xz, merge(ax, az)));
      for (const auto& aw : assignments(m, w))
        for (const auto& ay : assignments(m, y)) {
          double lhs = cond(dxz, ay, aw);
          double rhs = rule == 2 ? cond(dx, ay, merge(az, aw))
                                 : cond(dx, ay, aw);
          note(lhs, rhs);
        }
    }
  }
  return gap;
}

}  // namespace oracles

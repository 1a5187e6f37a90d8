#include "causal/graph.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <sstream>

namespace causal {

NodeSet set_union(const NodeSet& a, const NodeSet& b) {
  NodeSet out = a;
  out.insert(b.begin(), b.end());
  return out;
}

NodeSet set_difference(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  for (int v : a)
    if (!contains(b, v)) out.insert(v);
  return out;
}

bool disjoint(const NodeSet& a, const NodeSet& b) {
  for (int v : a)
    if (contains(b, v)) return false;
  return true;
}

ParseError::ParseError(const std::string& msg, int line, int col)
    : std::runtime_error(msg + " (line " + std::to_string(line) + ", col " +
                         std::to_string(col) + ")"),
      line_(line),
      col_(col) {}

namespace {

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

}  // namespace

int CausalDiagram::add_node(const std::string& name) {
  if (!valid_identifier(name))
    throw std::invalid_argument("invalid node name: '" + name + "'");
  if (name.rfind(kLatentPrefix, 0) == 0)
    throw std::invalid_argument("node name uses reserved prefix: " + name);
  if (index_.count(name))
    throw std::invalid_argument("duplicate node: " + name);
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back(name);
  index_.emplace(name, id);
  return id;
}

void CausalDiagram::add_directed(int from, int to) {
  if (from < 0 || from >= size() || to < 0 || to >= size())
    throw std::invalid_argument("edge endpoint out of range");
  if (from == to)
    throw std::invalid_argument("self-loop on " + nodes_[from]);
  if (has_directed(from, to))
    throw std::invalid_argument("duplicate edge " + nodes_[from] + " -> " + nodes_[to]);
  directed_.emplace_back(from, to);
}

void CausalDiagram::add_bidirected(int a, int b) {
  if (a < 0 || a >= size() || b < 0 || b >= size())
    throw std::invalid_argument("edge endpoint out of range");
  if (a == b)
    throw std::invalid_argument("self-loop on " + nodes_[a]);
  if (a > b) std::swap(a, b);
  if (has_bidirected(a, b))
    throw std::invalid_argument("duplicate arc " + nodes_[a] + " <-> " + nodes_[b]);
  bidirected_.emplace_back(a, b);
}

int CausalDiagram::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw std::invalid_argument("unknown node: " + name);
  return it->second;
}

std::optional<int> CausalDiagram::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> CausalDiagram::parents(int v) const {
  std::vector<int> out;
  for (auto [a, b] : directed_)
    if (b == v) out.push_back(a);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> CausalDiagram::children(int v) const {
  std::vector<int> out;
  for (auto [a, b] : directed_)
    if (a == v) out.push_back(b);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> CausalDiagram::confounder_partners(int v) const {
  std::vector<int> out;
  for (auto [a, b] : bidirected_) {
    if (a == v) out.push_back(b);
    if (b == v) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool CausalDiagram::has_directed(int from, int to) const {
  return std::find(directed_.begin(), directed_.end(), std::make_pair(from, to)) !=
         directed_.end();
}

bool CausalDiagram::has_bidirected(int a, int b) const {
  if (a > b) std::swap(a, b);
  return std::find(bidirected_.begin(), bidirected_.end(), std::make_pair(a, b)) !=
         bidirected_.end();
}

NodeSet CausalDiagram::all_nodes() const {
  NodeSet out;
  for (int v = 0; v < size(); ++v) out.insert(v);
  return out;
}

NodeSet CausalDiagram::resolve(const std::vector<std::string>& names) const {
  NodeSet out;
  for (const auto& n : names) out.insert(index_of(n));
  return out;
}

void CausalDiagram::validate() const {
  // Kahn's algorithm; leftover nodes mean a directed cycle.
  std::vector<int> indeg(size(), 0);
  for (auto [a, b] : directed_) {
    (void)a;
    ++indeg[b];
  }
  std::deque<int> ready;
  for (int v = 0; v < size(); ++v)
    if (indeg[v] == 0) ready.push_back(v);
  int seen = 0;
  while (!ready.empty()) {
    int v = ready.front();
    ready.pop_front();
    ++seen;
    for (auto [a, b] : directed_)
      if (a == v && --indeg[b] == 0) ready.push_back(b);
  }
  if (seen != size())
    throw std::invalid_argument("cycle detected in directed edges");
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

CausalDiagram parse_diagram(std::string_view text, bool strict) {
  CausalDiagram g;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;

  auto resolve = [&](const std::string& name, int col) -> int {
    if (auto id = g.find(name)) return *id;
    if (strict)
      throw ParseError("undeclared node: " + name, lineno, col);
    return g.add_node(name);
  };

  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    auto toks = split_ws(line);
    if (toks.empty()) continue;

    try {
      if (toks[0] == "node") {
        if (toks.size() < 2)
          throw ParseError("expected node names after 'node'", lineno, 1);
        for (size_t i = 1; i < toks.size(); ++i) g.add_node(toks[i]);
      } else if (toks.size() == 3 && toks[1] == "->") {
        g.add_directed(resolve(toks[0], 1), resolve(toks[2], 1));
      } else if (toks.size() == 3 && toks[1] == "<->") {
        g.add_bidirected(resolve(toks[0], 1), resolve(toks[2], 1));
      } else {
        throw ParseError("unrecognized statement: '" + toks[0] + "'", lineno, 1);
      }
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), lineno, 1);
    }
  }
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), lineno, 1);
  }
  return g;
}

std::string serialize_diagram(const CausalDiagram& g) {
  std::ostringstream out;
  if (g.size() > 0) {
    out << "node";
    for (const auto& n : g.nodes()) out << ' ' << n;
    out << '\n';
  }
  for (auto [a, b] : g.directed())
    out << g.name(a) << " -> " << g.name(b) << '\n';
  for (auto [a, b] : g.bidirected())
    out << g.name(a) << " <-> " << g.name(b) << '\n';
  return out.str();
}

void ExpandedGraph::rebuild_adjacency() {
  parents.assign(size(), {});
  children.assign(size(), {});
  for (auto [a, b] : edges) {
    children[a].push_back(b);
    parents[b].push_back(a);
  }
  for (auto& v : parents) std::sort(v.begin(), v.end());
  for (auto& v : children) std::sort(v.begin(), v.end());
}

ExpandedGraph expand_latents(const CausalDiagram& g) {
  ExpandedGraph e;
  e.names = g.nodes();
  e.observed_count = g.size();
  e.edges = g.directed();
  for (auto [a, b] : g.bidirected()) {
    std::string n1 = g.name(a), n2 = g.name(b);
    if (n2 < n1) std::swap(n1, n2);
    int u = e.size();
    e.names.push_back(std::string(kLatentPrefix) + n1 + "_" + n2);
    e.latent_origin.emplace_back(a, b);
    e.edges.emplace_back(u, a);
    e.edges.emplace_back(u, b);
  }
  e.rebuild_adjacency();
  return e;
}

namespace {

template <class NeighborFn>
NodeSet closure_impl(int n, const NodeSet& seeds, bool include_seeds,
                     NeighborFn&& neighbors) {
  std::vector<char> seen(n, 0);
  std::deque<int> work;
  for (int v : seeds) {
    if (v < 0 || v >= n) throw std::invalid_argument("unknown node in seed set");
    work.push_back(v);
  }
  NodeSet out;
  while (!work.empty()) {
    int v = work.front();
    work.pop_front();
    for (int u : neighbors(v)) {
      if (!seen[u]) {
        seen[u] = 1;
        out.insert(u);
        work.push_back(u);
      }
    }
  }
  if (include_seeds)
    out.insert(seeds.begin(), seeds.end());
  else
    for (int v : seeds)
      if (!seen[v]) out.erase(v);
  return out;
}

}  // namespace

NodeSet closure(const ExpandedGraph& g, const NodeSet& seeds, Direction dir,
                bool include_seeds) {
  auto res = closure_impl(g.size(), seeds, include_seeds, [&](int v) -> const std::vector<int>& {
    return dir == Direction::Ancestors ? g.parents[v] : g.children[v];
  });
  return res;
}

NodeSet closure(const CausalDiagram& g, const NodeSet& seeds, Direction dir,
                bool include_seeds) {
  return closure_impl(g.size(), seeds, include_seeds, [&](int v) {
    return dir == Direction::Ancestors ? g.parents(v) : g.children(v);
  });
}

namespace {

void check_observed(const ExpandedGraph& g, const NodeSet& s, const char* what) {
  for (int v : s) {
    if (v < 0 || v >= g.size()) throw std::invalid_argument(std::string("unknown node in ") + what);
    if (!g.is_observed(v))
      throw std::invalid_argument(std::string("latent node in ") + what + ": " + g.names[v]);
  }
}

}  // namespace

ExpandedGraph mutilate(const ExpandedGraph& g, const NodeSet& cut_incoming,
                       const NodeSet& cut_outgoing) {
  check_observed(g, cut_incoming, "cut_incoming");
  check_observed(g, cut_outgoing, "cut_outgoing");
  ExpandedGraph out;
  out.names = g.names;
  out.observed_count = g.observed_count;
  out.latent_origin = g.latent_origin;
  for (auto [a, b] : g.edges)
    if (!contains(cut_incoming, b) && !contains(cut_outgoing, a))
      out.edges.emplace_back(a, b);
  out.rebuild_adjacency();
  return out;
}

CausalDiagram mutilate(const CausalDiagram& g, const NodeSet& cut_incoming,
                       const NodeSet& cut_outgoing) {
  CausalDiagram out;
  for (const auto& n : g.nodes()) out.add_node(n);
  for (auto [a, b] : g.directed())
    if (!contains(cut_incoming, b) && !contains(cut_outgoing, a))
      out.add_directed(a, b);
  for (auto [a, b] : g.bidirected())
    if (!contains(cut_incoming, a) && !contains(cut_incoming, b))
      out.add_bidirected(a, b);
  return out;
}

NodeSet z_given_w(const ExpandedGraph& g, const NodeSet& x, const NodeSet& z,
                  const NodeSet& w) {
  check_observed(g, x, "x");
  check_observed(g, z, "z");
  check_observed(g, w, "w");
  if (!disjoint(x, z) || !disjoint(x, w) || !disjoint(z, w))
    throw std::invalid_argument("x, z, w must be pairwise disjoint");
  ExpandedGraph gx = mutilate(g, x, {});
  NodeSet anc_w = closure(gx, w, Direction::Ancestors, false);
  return set_difference(z, anc_w);
}

}  // namespace causal

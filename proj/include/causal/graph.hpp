#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace causal {

// Node sets are sets of indices into a graph's node list.  Nodes are stored
// in declaration order, so iterating a NodeSet yields declaration order.
using NodeSet = std::set<int>;

inline bool contains(const NodeSet& s, int v) { return s.count(v) != 0; }

NodeSet set_union(const NodeSet& a, const NodeSet& b);
NodeSet set_difference(const NodeSet& a, const NodeSet& b);
bool disjoint(const NodeSet& a, const NodeSet& b);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int col);
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

// A DAG over named observed variables plus bidirected arcs marking latent
// confounders.  Immutable once built; the mutating methods exist for the
// parser and for test construction.
class CausalDiagram {
 public:
  int add_node(const std::string& name);
  void add_directed(int from, int to);
  void add_bidirected(int a, int b);

  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::string& name(int v) const { return nodes_.at(v); }
  int index_of(const std::string& name) const;  // throws on unknown node
  std::optional<int> find(const std::string& name) const;

  const std::vector<std::pair<int, int>>& directed() const { return directed_; }
  const std::vector<std::pair<int, int>>& bidirected() const { return bidirected_; }

  std::vector<int> parents(int v) const;
  std::vector<int> children(int v) const;
  std::vector<int> confounder_partners(int v) const;
  bool has_directed(int from, int to) const;
  bool has_bidirected(int a, int b) const;

  NodeSet all_nodes() const;
  NodeSet resolve(const std::vector<std::string>& names) const;

  // Checks acyclicity of the directed part; throws std::invalid_argument.
  void validate() const;

 private:
  std::vector<std::string> nodes_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::pair<int, int>> directed_;
  std::vector<std::pair<int, int>> bidirected_;  // stored with first < second
};

// Latent-expanded view: every bidirected arc becomes an explicit latent root
// with exactly two children.  Observed nodes keep their diagram indices;
// latents follow in arc insertion order.
struct ExpandedGraph {
  std::vector<std::string> names;
  int observed_count = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> parents;
  std::vector<std::vector<int>> children;
  // Per latent node: the observed endpoints of its source bidirected arc.
  std::vector<std::pair<int, int>> latent_origin;

  int size() const { return static_cast<int>(names.size()); }
  bool is_observed(int v) const { return v < observed_count; }
  int latent_count() const { return size() - observed_count; }

  void rebuild_adjacency();
};

inline constexpr const char* kLatentPrefix = "_u_";

CausalDiagram parse_diagram(std::string_view text, bool strict = true);
std::string serialize_diagram(const CausalDiagram& g);

ExpandedGraph expand_latents(const CausalDiagram& g);

enum class Direction { Ancestors, Descendants };

NodeSet closure(const ExpandedGraph& g, const NodeSet& seeds, Direction dir,
                bool include_seeds);
NodeSet closure(const CausalDiagram& g, const NodeSet& seeds, Direction dir,
                bool include_seeds);

// Surgery: edge (a,b) survives iff b is not in cut_incoming and a is not in
// cut_outgoing.  Cut sets must name observed nodes; latent edges are only
// removed through their observed endpoints.
ExpandedGraph mutilate(const ExpandedGraph& g, const NodeSet& cut_incoming,
                       const NodeSet& cut_outgoing);

// Diagram-level surgery.  A bidirected arc carries an arrowhead into both
// endpoints, so cut_incoming removes incident arcs while cut_outgoing leaves
// them alone.
CausalDiagram mutilate(const CausalDiagram& g, const NodeSet& cut_incoming,
                       const NodeSet& cut_outgoing);

// Rule 3's surgery set Z(W): members of z that are not ancestors of any
// w-node in mutilate(g, x, {}).
NodeSet z_given_w(const ExpandedGraph& g, const NodeSet& x, const NodeSet& z,
                  const NodeSet& w);

}  // namespace causal

#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "causal/graph.hpp"
#include "causal/model.hpp"

// Independent brute-force implementations used to cross-check the library.
namespace oracles {

// d-separation by exhaustive enumeration of simple undirected paths.
bool path_d_separated(const causal::ExpandedGraph& g, const causal::NodeSet& a,
                      const causal::NodeSet& b, const causal::NodeSet& given);

// Random causal diagram: nodes N0.., random DAG edges over a shuffled
// topological order, random bidirected arcs.
causal::CausalDiagram random_diagram(std::mt19937& rng, int max_nodes,
                                     int max_arcs, double edge_rate = 2.0);

// Dense version for the performance runs: exact node/edge/arc counts.
causal::CausalDiagram sized_diagram(std::mt19937& rng, int nodes, int edges,
                                    int arcs);

// Total probability mass of the assignments consistent with `fixed`
// (variable name -> value index).
double mass(const causal::Distribution& d,
            const std::map<std::string, int>& fixed);

// Max-abs violation of the distributional identity behind the given rule,
// computed with truncated-factorization interventions.  Rule 1:
// P(y|do(x),z,w) vs P(y|do(x),w); rule 2: P(y|do(x),do(z),w) vs
// P(y|do(x),z,w); rule 3: P(y|do(x),do(z),w) vs P(y|do(x),w).
double rule_identity_gap(const causal::DiscreteModel& m, int rule,
                         const causal::NodeSet& y, const causal::NodeSet& z,
                         const causal::NodeSet& x, const causal::NodeSet& w);

}  // namespace oracles

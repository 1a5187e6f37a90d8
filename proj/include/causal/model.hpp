#pragma once

#include <optional>
#include <string>
#include <vector>

#include "causal/estimand.hpp"
#include "causal/graph.hpp"
#include "causal/identify.hpp"

namespace causal {

// Fully parameterized discrete model over a latent-expanded graph.  Latents
// are roots, so disturbance independence is structural.
struct DiscreteModel {
  ExpandedGraph graph;
  std::vector<std::vector<std::string>> domains;  // per node, value names
  // Per node: flat CPT, rows in lexicographic order over the assignments of
  // the node's parents (ascending index, first parent most significant),
  // row length = node cardinality.
  std::vector<std::vector<double>> cpts;

  int card(int v) const { return static_cast<int>(domains[v].size()); }
  size_t row_count(int v) const;
  size_t row_index(int v, const std::vector<int>& assignment) const;
  // P(v = assignment[v] | parents per assignment).
  double prob(int v, const std::vector<int>& assignment) const;

  void validate(double min_prob = 0.0) const;
};

// Deterministic in seed.  Each CPT row is sampled uniformly on the simplex,
// then squeezed into [min_prob, 1 - (card-1)*min_prob].  latent_card < 2
// means "same as card".
DiscreteModel random_model(const CausalDiagram& g, unsigned seed, int card = 2,
                           double min_prob = 0.05, int latent_card = -1);

// Exact observed-variable joint: product over every node of the expanded
// graph, latents marginalized out.
Distribution joint_observational(const DiscreteModel& m);

// Truncated-factorization joint after forcing x to x_value: x's factor is
// dropped and x is clamped.  The result ranges over the remaining observed
// nodes.
Distribution interventional(const DiscreteModel& m, int x,
                            const std::string& x_value);

// Same with several simultaneous interventions; values align with the
// iteration order of xs.
Distribution interventional_set(const DiscreteModel& m, const NodeSet& xs,
                                const std::vector<std::string>& values);

// Max-abs gap between the estimand evaluated on the observational joint and
// the true interventional distribution of q.y.  With a nonempty context the
// comparison is against the interventional conditional given each context
// assignment.
double check_estimand(const DiscreteModel& m, const Estimand& e, const Query& q,
                      const std::string& x_value);

struct Witness {
  DiscreteModel model_a;
  DiscreteModel model_b;
  double obs_distance = 0;
  double effect_distance = 0;
  std::string x_value;
};

struct SearchConfig {
  int budget = 10000;
  unsigned seed = 0;
  double match_tol = 1e-9;
  double gap_min = 0.01;
  int latent_card = 4;
  int max_observed = 6;
};

// Best-effort search for two models with (numerically) identical observed
// joints but causal effects at least gap_min apart.  Empty result proves
// nothing.
std::optional<Witness> search_counterexample(const CausalDiagram& g,
                                             const Query& q,
                                             const SearchConfig& cfg = {});

std::string serialize_model(const DiscreteModel& m);
DiscreteModel parse_model(const std::string& text);

}  // namespace causal

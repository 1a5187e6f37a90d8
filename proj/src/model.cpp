#include "causal/model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <random>
#include <sstream>

namespace causal {

namespace {

constexpr size_t kEnumerationCap = size_t{1} << 22;

size_t full_table_size(const DiscreteModel& m) {
  size_t total = 1;
  for (int v = 0; v < m.graph.size(); ++v) {
    total *= static_cast<size_t>(m.card(v));
    if (total > kEnumerationCap)
      throw std::length_error("joint enumeration exceeds the size cap");
  }
  return total;
}

// Odometer over the nodes in `vars` (last fastest); `assignment` holds the
// current digit per graph node.  Returns false once exhausted.
bool advance(const std::vector<int>& vars, const DiscreteModel& m,
             std::vector<int>& assignment) {
  for (int i = static_cast<int>(vars.size()) - 1; i >= 0; --i) {
    int v = vars[i];
    if (++assignment[v] < m.card(v)) return true;
    assignment[v] = 0;
  }
  return false;
}

int value_of(const DiscreteModel& m, int v, const std::string& name) {
  for (int i = 0; i < m.card(v); ++i)
    if (m.domains[v][i] == name) return i;
  throw std::invalid_argument("unknown value '" + name + "' for " +
                              m.graph.names[v]);
}

std::vector<int> topo_observed(const CausalDiagram& g) {
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

std::vector<double> floored_row(int card, double min_prob, std::mt19937& rng) {
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> row(card);
  double total = 0;
  for (auto& p : row) {
    p = exp1(rng);
    total += p;
  }
  double scale = 1.0 - card * min_prob;
  for (auto& p : row) p = min_prob + scale * (p / total);
  return row;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

size_t DiscreteModel::row_count(int v) const {
  size_t n = 1;
  for (int p : graph.parents[v]) n *= static_cast<size_t>(card(p));
  return n;
}

size_t DiscreteModel::row_index(int v, const std::vector<int>& assignment) const {
  size_t row = 0;
  for (int p : graph.parents[v])
    row = row * static_cast<size_t>(card(p)) + assignment[p];
  return row;
}

double DiscreteModel::prob(int v, const std::vector<int>& assignment) const {
  return cpts[v][row_index(v, assignment) * card(v) + assignment[v]];
}

void DiscreteModel::validate(double min_prob) const {
  if (static_cast<int>(domains.size()) != graph.size() ||
      static_cast<int>(cpts.size()) != graph.size())
    throw std::invalid_argument("model arrays do not match the graph");
  for (int v = 0; v < graph.size(); ++v) {
    if (card(v) < 2) throw std::invalid_argument("domain too small");
    if (cpts[v].size() != row_count(v) * static_cast<size_t>(card(v)))
      throw std::invalid_argument("CPT size mismatch for " + graph.names[v]);
    for (size_t r = 0; r < row_count(v); ++r) {
      double sum = 0;
      for (int val = 0; val < card(v); ++val) {
        double p = cpts[v][r * card(v) + val];
        if (p < min_prob) throw std::invalid_argument("CPT entry below floor");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("CPT row does not sum to 1");
    }
  }
}

DiscreteModel random_model(const CausalDiagram& g, unsigned seed, int card,
                           double min_prob, int latent_card) {
  if (card < 2) throw std::invalid_argument("cardinality must be at least 2");
  if (latent_card < 2) latent_card = card;
  if (min_prob <= 0 || min_prob * card >= 1.0 || min_prob * latent_card >= 1.0)
    throw std::invalid_argument("infeasible probability floor");

  DiscreteModel m;
  m.graph = expand_latents(g);
  std::mt19937 rng(seed);
  for (int v = 0; v < m.graph.size(); ++v) {
    int c = m.graph.is_observed(v) ? card : latent_card;
    std::vector<std::string> values(c);
    for (int i = 0; i < c; ++i) values[i] = std::to_string(i);
    m.domains.push_back(std::move(values));
  }
  for (int v = 0; v < m.graph.size(); ++v) {
    std::vector<double> cpt;
    for (size_t r = 0; r < m.row_count(v); ++r) {
      auto row = floored_row(m.card(v), min_prob, rng);
      cpt.insert(cpt.end(), row.begin(), row.end());
    }
    m.cpts.push_back(std::move(cpt));
  }
  return m;
}

namespace {

// Shared enumeration core: sums the truncated-factorization product over all
// assignments, with `clamped` nodes fixed and their factors dropped.
Distribution enumerate_joint(const DiscreteModel& m, const NodeSet& clamped,
                             std::vector<int> assignment) {
  full_table_size(m);
  std::vector<int> loop_vars;
  std::vector<int> out_vars;
  for (int v = 0; v < m.graph.size(); ++v)
    if (!contains(clamped, v)) loop_vars.push_back(v);
  for (int v = 0; v < m.graph.observed_count; ++v)
    if (!contains(clamped, v)) out_vars.push_back(v);

  Distribution d;
  size_t out_size = 1;
  for (int v : out_vars) {
    d.variables.push_back(m.graph.names[v]);
    d.domains.push_back(m.domains[v]);
    out_size *= static_cast<size_t>(m.card(v));
  }
  d.table.assign(out_size, 0.0);

  for (int v : loop_vars) assignment[v] = 0;
  do {
    double p = 1.0;
    for (int v : loop_vars) p *= m.prob(v, assignment);
    size_t idx = 0;
    for (int v : out_vars) idx = idx * m.card(v) + assignment[v];
    d.table[idx] += p;
  } while (advance(loop_vars, m, assignment));
  return d;
}

}  // namespace

Distribution joint_observational(const DiscreteModel& m) {
  return enumerate_joint(m, {}, std::vector<int>(m.graph.size(), 0));
}

Distribution interventional_set(const DiscreteModel& m, const NodeSet& xs,
                                const std::vector<std::string>& values) {
  if (xs.size() != values.size())
    throw std::invalid_argument("intervention values do not match nodes");
  std::vector<int> assignment(m.graph.size(), 0);
  size_t i = 0;
  for (int v : xs) {
    if (!m.graph.is_observed(v))
      throw std::invalid_argument("cannot intervene on a latent node");
    assignment[v] = value_of(m, v, values[i++]);
  }
  return enumerate_joint(m, xs, std::move(assignment));
}

Distribution interventional(const DiscreteModel& m, int x,
                            const std::string& x_value) {
  return interventional_set(m, NodeSet{x}, {x_value});
}

double check_estimand(const DiscreteModel& m, const Estimand& e, const Query& q,
                      const std::string& x_value) {
  Distribution joint = joint_observational(m);
  Distribution est = evaluate(e, joint, x_value);
  Distribution intv = interventional(m, q.x, x_value);

  // A textual estimand carries the intervention variable as a free variable;
  // its dimension gets sliced at x_value instead of compared.
  std::vector<int> yc_in_intv;
  std::vector<bool> is_context, is_intervention;
  int x_slice = -1;
  for (const auto& name : est.variables) {
    int node = -1;
    for (int v = 0; v < m.graph.observed_count; ++v)
      if (m.graph.names[v] == name) node = v;
    if (node < 0)
      throw std::invalid_argument("estimand variable not in graph: " + name);
    if (node == q.x) {
      is_intervention.push_back(true);
      is_context.push_back(false);
      yc_in_intv.push_back(-1);
      x_slice = value_of(m, q.x, x_value);
      continue;
    }
    is_intervention.push_back(false);
    yc_in_intv.push_back(intv.var_index(name));
    is_context.push_back(contains(q.context, node));
  }
  std::vector<int> truth_vars;
  for (int v : yc_in_intv)
    if (v >= 0) truth_vars.push_back(v);
  std::vector<double> truth_yc = marginal(intv, truth_vars);

  bool has_context = std::any_of(is_context.begin(), is_context.end(),
                                 [](bool b) { return b; });
  int n = static_cast<int>(est.variables.size());

  // Context-assignment masses of the interventional truth, for conditional
  // comparison.  Indexed over the non-intervention est variables.
  std::vector<bool> truth_is_context;
  for (int i = 0; i < n; ++i)
    if (!is_intervention[i]) truth_is_context.push_back(is_context[i]);
  size_t ctx_size = 1;
  for (int i = 0; i < n; ++i)
    if (is_context[i]) ctx_size *= static_cast<size_t>(est.card(i));
  std::vector<double> ctx_mass(ctx_size, 0.0);
  if (has_context) {
    std::vector<int> tdigits(truth_vars.size(), 0);
    for (size_t idx = 0; idx < truth_yc.size(); ++idx) {
      size_t c = 0;
      for (size_t i = 0; i < truth_vars.size(); ++i)
        if (truth_is_context[i])
          c = c * intv.card(truth_vars[i]) + tdigits[i];
      ctx_mass[c] += truth_yc[idx];
      for (int i = static_cast<int>(truth_vars.size()) - 1; i >= 0; --i) {
        if (++tdigits[i] < intv.card(truth_vars[i])) break;
        tdigits[i] = 0;
      }
    }
  }

  double err = 0;
  std::vector<int> digits(n, 0);
  for (size_t idx = 0; idx < est.table.size(); ++idx) {
    bool on_slice = true;
    for (int i = 0; i < n; ++i)
      if (is_intervention[i] && digits[i] != x_slice) on_slice = false;
    if (on_slice) {
      size_t t = 0, c = 0;
      for (int i = 0; i < n; ++i) {
        if (is_intervention[i]) continue;
        t = t * est.card(i) + digits[i];
        if (is_context[i]) c = c * est.card(i) + digits[i];
      }
      double truth = has_context
                         ? (ctx_mass[c] > 0 ? truth_yc[t] / ctx_mass[c] : 0.0)
                         : truth_yc[t];
      err = std::max(err, std::abs(est.table[idx] - truth));
    }
    for (int i = n - 1; i >= 0; --i) {
      if (++digits[i] < est.card(i)) break;
      digits[i] = 0;
    }
  }
  return err;
}

namespace {

// Solves node v's CPT in model B so that P_B(v | predecessors) matches model
// A's observational conditional for every predecessor assignment.  The
// system is linear in the CPT entries; slack beyond the constraints is
// explored along the kernel for effect diversity.
bool solve_matching_cpt(const DiscreteModel& a, DiscreteModel& b, int v,
                        const std::vector<int>& pre,
                        const Distribution& joint_a, std::mt19937& rng) {
  const ExpandedGraph& g = b.graph;
  int card = b.card(v);
  size_t rows = b.row_count(v);
  size_t unknowns = rows * static_cast<size_t>(card);

  std::vector<int> latent_parents;
  for (int p : g.parents[v])
    if (!g.is_observed(p)) latent_parents.push_back(p);
  std::vector<int> all_latents;
  for (int u = g.observed_count; u < g.size(); ++u) all_latents.push_back(u);

  // Marginals of A's joint for the conditional targets.
  std::vector<int> pre_sorted = pre;
  std::sort(pre_sorted.begin(), pre_sorted.end());
  std::vector<int> prev_sorted = pre_sorted;
  prev_sorted.insert(
      std::lower_bound(prev_sorted.begin(), prev_sorted.end(), v), v);
  std::vector<double> t_prev = marginal(joint_a, prev_sorted);
  std::vector<double> t_pre = marginal(joint_a, pre_sorted);

  size_t pre_count = 1;
  for (int p : pre_sorted) pre_count *= static_cast<size_t>(b.card(p));

  Eigen::MatrixXd M =
      Eigen::MatrixXd::Zero(pre_count * card + rows, unknowns);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(pre_count * card + rows);

  std::vector<int> assignment(g.size(), 0);
  size_t pre_idx = 0;
  for (int p : pre_sorted) assignment[p] = 0;
  bool more = true;
  while (more) {
    // Mixture weights of v's latent-parent assignments given the observed
    // predecessors, under B's already-solved mechanisms.
    size_t lp_count = 1;
    for (int u : latent_parents) lp_count *= static_cast<size_t>(b.card(u));
    std::vector<double> w(lp_count, 0.0);
    double total = 0;
    for (int u : all_latents) assignment[u] = 0;
    bool lmore = true;
    while (lmore) {
      double p = 1.0;
      for (int u : all_latents) p *= b.prob(u, assignment);
      for (int q : pre) p *= b.prob(q, assignment);
      size_t lp = 0;
      for (int u : latent_parents) lp = lp * b.card(u) + assignment[u];
      w[lp] += p;
      total += p;
      lmore = advance(all_latents, b, assignment);
    }
    if (total <= 0) return false;
    for (auto& x : w) x /= total;

    double pre_mass = t_pre.empty() ? 1.0 : t_pre[pre_idx];
    if (pre_mass <= 0) return false;
    for (int val = 0; val < card; ++val) {
      size_t eq = pre_idx * card + val;
      // Column coefficients: one per latent-parent assignment.
      for (int u : all_latents) assignment[u] = 0;
      for (size_t lp = 0; lp < lp_count; ++lp) {
        size_t rem = lp;
        for (int i = static_cast<int>(latent_parents.size()) - 1; i >= 0; --i) {
          int u = latent_parents[i];
          assignment[u] = static_cast<int>(rem % b.card(u));
          rem /= b.card(u);
        }
        assignment[v] = val;
        size_t col = b.row_index(v, assignment) * card + val;
        M(eq, col) += w[lp];
      }
      // Conditional target from A's joint, indexed over prev_sorted.
      size_t prev_idx = 0;
      assignment[v] = val;
      for (int p : prev_sorted) prev_idx = prev_idx * b.card(p) + assignment[p];
      rhs(eq) = t_prev[prev_idx] / pre_mass;
    }

    ++pre_idx;
    more = advance(pre_sorted, b, assignment);
  }

  for (size_t r = 0; r < rows; ++r) {
    for (int val = 0; val < card; ++val)
      M(pre_count * card + r, r * card + val) = 1.0;
    rhs(pre_count * card + r) = 1.0;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU |
                                            Eigen::ComputeThinV);
  Eigen::VectorXd p0 = svd.solve(rhs);
  if ((M * p0 - rhs).lpNorm<Eigen::Infinity>() > 1e-10) return false;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  Eigen::MatrixXd kernel = lu.kernel();
  bool has_kernel = lu.dimensionOfKernel() > 0;

  const double eps = 1e-3;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::VectorXd cand = p0;
    if (has_kernel) {
      Eigen::VectorXd dir(kernel.cols());
      for (int i = 0; i < dir.size(); ++i) dir(i) = gauss(rng);
      Eigen::VectorXd d = kernel * dir;
      double dmax = d.lpNorm<Eigen::Infinity>();
      if (dmax > 1e-12) {
        d /= dmax;
        // Feasible alpha interval keeping every entry inside [eps, 1-eps].
        double lo = -1e18, hi = 1e18;
        bool feasible = true;
        for (int i = 0; i < cand.size(); ++i) {
          double di = d(i);
          if (std::abs(di) < 1e-14) {
            if (cand(i) < eps || cand(i) > 1 - eps) feasible = false;
            continue;
          }
          double a1 = (eps - cand(i)) / di;
          double a2 = (1 - eps - cand(i)) / di;
          lo = std::max(lo, std::min(a1, a2));
          hi = std::min(hi, std::max(a1, a2));
        }
        if (!feasible || lo > hi) continue;
        cand += (lo + unif(rng) * (hi - lo)) * d;
      }
    }
    bool in_bounds = true;
    for (int i = 0; i < cand.size(); ++i)
      if (cand(i) < eps || cand(i) > 1 - eps) in_bounds = false;
    if (!in_bounds) continue;
    for (size_t i = 0; i < unknowns; ++i) b.cpts[v][i] = cand(i);
    return true;
  }
  return false;
}

}  // namespace

std::optional<Witness> search_counterexample(const CausalDiagram& g,
                                             const Query& q,
                                             const SearchConfig& cfg) {
  validate_query(g, q);
  if (g.size() > cfg.max_observed)
    throw std::invalid_argument("graph exceeds the search size ceiling");

  DiscreteModel a = random_model(g, cfg.seed, 2, 0.05, cfg.latent_card);
  Distribution joint_a = joint_observational(a);

  std::vector<int> y_vars;
  for (int v : q.y) y_vars.push_back(v);

  auto effect = [&](const DiscreteModel& m, const std::string& xv) {
    Distribution d = interventional(m, q.x, xv);
    std::vector<int> idx;
    for (int v : y_vars) idx.push_back(d.var_index(m.graph.names[v]));
    std::sort(idx.begin(), idx.end());
    return marginal(d, idx);
  };
  std::vector<std::vector<double>> effect_a;
  for (const auto& xv : a.domains[q.x]) effect_a.push_back(effect(a, xv));

  std::vector<int> order;
  for (int v : topo_observed(g)) order.push_back(v);

  std::mt19937 rng(cfg.seed + 0x9e3779b9u);
  for (int trial = 0; trial < cfg.budget; ++trial) {
    DiscreteModel b = a;
    for (int u = b.graph.observed_count; u < b.graph.size(); ++u)
      b.cpts[u] = floored_row(b.card(u), 0.01, rng);

    bool ok = true;
    std::vector<int> pre;
    for (int v : order) {
      if (!solve_matching_cpt(a, b, v, pre, joint_a, rng)) {
        ok = false;
        break;
      }
      pre.push_back(v);
    }
    if (!ok) continue;

    Distribution joint_b = joint_observational(b);
    double obs_d = max_abs_diff(joint_a.table, joint_b.table);
    if (obs_d > cfg.match_tol) continue;

    double best_gap = 0;
    std::string best_value;
    for (size_t i = 0; i < a.domains[q.x].size(); ++i) {
      double gap = max_abs_diff(effect_a[i], effect(b, a.domains[q.x][i]));
      if (gap > best_gap) {
        best_gap = gap;
        best_value = a.domains[q.x][i];
      }
    }
    if (best_gap >= cfg.gap_min)
      return Witness{a, std::move(b), obs_d, best_gap, best_value};
  }
  return std::nullopt;
}

std::string serialize_model(const DiscreteModel& m) {
  std::ostringstream out;
  char buf[64];
  auto fmt = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  for (int v = 0; v < m.graph.size(); ++v) {
    out << (m.graph.is_observed(v) ? "var " : "latent ") << m.graph.names[v]
        << " :";
    for (const auto& val : m.domains[v]) out << ' ' << val;
    out << '\n';
  }
  std::vector<int> assignment(m.graph.size(), 0);
  for (int v = 0; v < m.graph.size(); ++v) {
    out << "cpt " << m.graph.names[v];
    if (!m.graph.parents[v].empty()) {
      out << " |";
      for (int p : m.graph.parents[v]) out << ' ' << m.graph.names[p];
    }
    out << '\n';
    for (int p : m.graph.parents[v]) assignment[p] = 0;
    size_t rows = m.row_count(v);
    for (size_t r = 0; r < rows; ++r) {
      out << "row";
      for (int p : m.graph.parents[v]) out << ' ' << m.domains[p][assignment[p]];
      out << " :";
      for (int val = 0; val < m.card(v); ++val)
        out << ' ' << fmt(m.cpts[v][r * m.card(v) + val]);
      out << '\n';
      advance(m.graph.parents[v], m, assignment);
    }
  }
  return out.str();
}

DiscreteModel parse_model(const std::string& text) {
  DiscreteModel m;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  int current = -1;
  std::unordered_map<std::string, int> index;

  auto node_of = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end())
      throw ParseError("unknown node '" + name + "'", line_no, 1);
    return it->second;
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word) || word[0] == '#') continue;
    if (word == "var" || word == "latent") {
      std::string name, colon;
      if (!(ls >> name >> colon) || colon != ":")
        throw ParseError("malformed declaration", line_no, 1);
      if (word == "var" && m.graph.observed_count != m.graph.size())
        throw ParseError("observed declarations must precede latents", line_no, 1);
      index[name] = m.graph.size();
      m.graph.names.push_back(name);
      if (word == "var") ++m.graph.observed_count;
      std::vector<std::string> values;
      std::string val;
      while (ls >> val) values.push_back(val);
      if (values.size() < 2) throw ParseError("domain too small", line_no, 1);
      m.domains.push_back(std::move(values));
      m.cpts.emplace_back();
    } else if (word == "cpt") {
      std::string name;
      if (!(ls >> name)) throw ParseError("missing cpt node", line_no, 1);
      current = node_of(name);
      std::string bar;
      if (ls >> bar) {
        if (bar != "|") throw ParseError("expected '|'", line_no, 1);
        std::string pname;
        std::vector<int> parents;
        while (ls >> pname) parents.push_back(node_of(pname));
        for (size_t i = 1; i < parents.size(); ++i)
          if (parents[i - 1] >= parents[i])
            throw ParseError("parents out of order", line_no, 1);
        for (int p : parents) m.graph.edges.emplace_back(p, current);
      }
    } else if (word == "row") {
      if (current < 0) throw ParseError("row before cpt", line_no, 1);
      // Parent values are positional; the row order is the lexicographic
      // parent-assignment order, so we only validate the count.
      std::vector<std::string> fields;
      while (ls >> word) fields.push_back(word);
      auto colon = std::find(fields.begin(), fields.end(), ":");
      if (colon == fields.end())
        throw ParseError("missing ':' in row", line_no, 1);
      size_t probs = fields.end() - colon - 1;
      if (probs != m.domains[current].size())
        throw ParseError("probability count mismatch", line_no, 1);
      for (auto it = colon + 1; it != fields.end(); ++it) {
        try {
          m.cpts[current].push_back(std::stod(*it));
        } catch (const std::exception&) {
          throw ParseError("bad probability '" + *it + "'", line_no, 1);
        }
      }
    } else {
      throw ParseError("unknown directive '" + word + "'", line_no, 1);
    }
  }

  m.graph.rebuild_adjacency();
  for (int v = m.graph.observed_count; v < m.graph.size(); ++v) {
    const auto& ch = m.graph.children[v];
    if (ch.size() == 2) m.graph.latent_origin.emplace_back(ch[0], ch[1]);
    else m.graph.latent_origin.emplace_back(-1, -1);
  }
  m.validate();
  return m;
}

}  // namespace causal

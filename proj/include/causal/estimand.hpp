#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "causal/graph.hpp"

namespace causal {

// How a variable occurrence is bound inside an estimand.
//   Free  — a query variable; enumerated by the caller of evaluate().
//   Bound — introduced by an enclosing sum.
//   Fixed — the intervention variable; takes the supplied x value.
enum class Binding { Free, Bound, Fixed };

struct VarRef {
  std::string node;     // diagram node name
  Binding binding = Binding::Free;
  std::string display;  // rendered name; unique per enclosing sum for Bound

  static VarRef free(const std::string& node);
  static VarRef fixed(const std::string& node);
  static VarRef bound(const std::string& node, const std::string& display);
};

// Hat-free probability expression: sums over variable assignments of products
// of conditional-probability terms.  Hat-freeness is structural — there is no
// node kind that could express an intervention.
class Estimand {
 public:
  enum class Kind { Sum, Product, Term, Placeholder };

  static Estimand term(std::vector<VarRef> targets, std::vector<VarRef> given);
  static Estimand product(std::vector<Estimand> factors);
  static Estimand sum(std::vector<VarRef> vars, Estimand body);
  // A pending sub-derivation: `vars` says how the sub-expression's free
  // variables are rebound at the splice site.
  static Estimand placeholder(std::string id, std::vector<VarRef> vars);

  Kind kind() const { return kind_; }
  const std::vector<VarRef>& sum_vars() const { return sum_vars_; }
  const std::vector<Estimand>& children() const { return children_; }
  const std::vector<VarRef>& targets() const { return targets_; }
  const std::vector<VarRef>& given() const { return given_; }
  const std::string& placeholder_id() const { return placeholder_id_; }
  const std::vector<VarRef>& placeholder_vars() const { return placeholder_vars_; }

  bool has_placeholder() const;

  // Structural comparison on shape and display names; binding kinds carry
  // evaluation semantics, not identity.
  bool operator==(const Estimand& other) const;
  bool operator!=(const Estimand& other) const { return !(*this == other); }

 private:
  Kind kind_ = Kind::Term;
  std::vector<VarRef> sum_vars_;
  std::vector<Estimand> children_;
  std::vector<VarRef> targets_;
  std::vector<VarRef> given_;
  std::string placeholder_id_;
  std::vector<VarRef> placeholder_vars_;

  friend Estimand substitute(const Estimand&, const std::string&, const Estimand&);
  friend void rename_bound(Estimand&, const std::string&, const std::string&);
};

enum class Style { Plain, Latex };

std::string render(const Estimand& e, Style style = Style::Plain);

// Parses the plain grammar: P(a,b|c,d), juxtaposition = product,
// sum_{v1,v2} ( ... ).  Occurrences under a sum introducing their name parse
// as Bound, everything else as Free.
Estimand parse_estimand(std::string_view text);

// Splices `sub` for the unique placeholder with the given id, renaming sub's
// bound variables when they would collide with names in scope.
Estimand substitute(const Estimand& e, const std::string& placeholder_id,
                    const Estimand& sub);

// Exact finite joint distribution.  Flat table in row-major order with the
// last variable fastest.
struct Distribution {
  std::vector<std::string> variables;
  std::vector<std::vector<std::string>> domains;
  std::vector<double> table;

  int var_index(const std::string& name) const;     // throws on unknown
  int value_index(int var, const std::string& v) const;
  int card(int var) const { return static_cast<int>(domains[var].size()); }
  size_t table_size() const;
  void validate(bool require_positive = false) const;
};

// Marginal table over the given variables (ascending index order expected),
// in the same row-major layout.
std::vector<double> marginal(const Distribution& d, const std::vector<int>& vars);

// Evaluates the estimand against an observational joint.  The result is a
// table over the estimand's free variables; x_value is substituted for every
// Fixed occurrence.
Distribution evaluate(const Estimand& e, const Distribution& joint,
                      const std::string& x_value);

}  // namespace causal

#include "causal/estimand.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace causal {

namespace {

std::string lowercase(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

VarRef VarRef::free(const std::string& node) {
  return {node, Binding::Free, lowercase(node)};
}

VarRef VarRef::fixed(const std::string& node) {
  return {node, Binding::Fixed, lowercase(node)};
}

VarRef VarRef::bound(const std::string& node, const std::string& display) {
  return {node, Binding::Bound, display};
}

Estimand Estimand::term(std::vector<VarRef> targets, std::vector<VarRef> given) {
  for (const auto& t : targets)
    for (const auto& g : given)
      if (t.display == g.display)
        throw std::invalid_argument("term targets and given overlap: " + t.display);
  Estimand e;
  e.kind_ = Kind::Term;
  e.targets_ = std::move(targets);
  e.given_ = std::move(given);
  return e;
}

Estimand Estimand::product(std::vector<Estimand> factors) {
  Estimand e;
  e.kind_ = Kind::Product;
  e.children_ = std::move(factors);
  return e;
}

Estimand Estimand::sum(std::vector<VarRef> vars, Estimand body) {
  if (vars.empty()) return body;
  Estimand e;
  e.kind_ = Kind::Sum;
  e.sum_vars_ = std::move(vars);
  e.children_.push_back(std::move(body));
  return e;
}

Estimand Estimand::placeholder(std::string id, std::vector<VarRef> vars) {
  Estimand e;
  e.kind_ = Kind::Placeholder;
  e.placeholder_id_ = std::move(id);
  e.placeholder_vars_ = std::move(vars);
  return e;
}

bool Estimand::has_placeholder() const {
  if (kind_ == Kind::Placeholder) return true;
  for (const auto& c : children_)
    if (c.has_placeholder()) return true;
  return false;
}

namespace {

bool same_refs(const std::vector<VarRef>& a, const std::vector<VarRef>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].display != b[i].display) return false;
  return true;
}

}  // namespace

bool Estimand::operator==(const Estimand& other) const {
  if (kind_ != other.kind_) return false;
  switch (kind_) {
    case Kind::Term:
      return same_refs(targets_, other.targets_) && same_refs(given_, other.given_);
    case Kind::Placeholder:
      return placeholder_id_ == other.placeholder_id_;
    case Kind::Sum:
      if (!same_refs(sum_vars_, other.sum_vars_)) return false;
      break;
    case Kind::Product:
      break;
  }
  return children_ == other.children_;
}

namespace {

void render_refs(std::ostream& out, const std::vector<VarRef>& refs,
                 const char* sep) {
  for (size_t i = 0; i < refs.size(); ++i) {
    if (i) out << sep;
    out << refs[i].display;
  }
}

void render_impl(std::ostream& out, const Estimand& e, Style style) {
  switch (e.kind()) {
    case Estimand::Kind::Term:
      out << "P(";
      render_refs(out, e.targets(), style == Style::Plain ? "," : ", ");
      if (!e.given().empty()) {
        out << (style == Style::Plain ? "|" : " \\mid ");
        render_refs(out, e.given(), style == Style::Plain ? "," : ", ");
      }
      out << ")";
      break;
    case Estimand::Kind::Product:
      for (size_t i = 0; i < e.children().size(); ++i) {
        if (i) out << (style == Style::Plain ? " " : " \\, ");
        render_impl(out, e.children()[i], style);
      }
      break;
    case Estimand::Kind::Sum:
      out << (style == Style::Plain ? "sum_{" : "\\sum_{");
      render_refs(out, e.sum_vars(), ",");
      out << (style == Style::Plain ? "} ( " : "} \\Big( ");
      render_impl(out, e.children()[0], style);
      out << (style == Style::Plain ? " )" : " \\Big)");
      break;
    case Estimand::Kind::Placeholder:
      out << "[" << e.placeholder_id() << "]";
      break;
  }
}

}  // namespace

std::string render(const Estimand& e, Style style) {
  std::ostringstream out;
  render_impl(out, e, style);
  return out.str();
}

// ---------------------------------------------------------------------------
// Plain-grammar parser

namespace {

struct Lexer {
  std::string_view text;
  size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  bool eof() {
    skip_ws();
    return pos >= text.size();
  }
  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }
  bool consume(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!consume(c))
      throw std::invalid_argument(std::string("estimand parse: expected '") + c +
                                  "' at offset " + std::to_string(pos));
  }
  bool name_char(char c) const {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  }
  std::string name() {
    skip_ws();
    size_t start = pos;
    while (pos < text.size() && name_char(text[pos])) ++pos;
    if (pos == start)
      throw std::invalid_argument("estimand parse: expected name at offset " +
                                  std::to_string(pos));
    return std::string(text.substr(start, pos - start));
  }
};

struct Parser {
  Lexer lex;
  std::vector<std::string> scope;

  bool in_scope(const std::string& n) const {
    return std::find(scope.begin(), scope.end(), n) != scope.end();
  }

  VarRef ref(const std::string& n) const {
    return in_scope(n) ? VarRef::bound(n, n) : VarRef{n, Binding::Free, n};
  }

  std::vector<VarRef> ref_list() {
    std::vector<VarRef> out;
    out.push_back(ref(lex.name()));
    while (lex.consume(',')) out.push_back(ref(lex.name()));
    return out;
  }

  Estimand parse_unit() {
    lex.skip_ws();
    if (lex.text.substr(lex.pos, 4) == "sum_") {
      // sum_{v1,v2} ( expr )
      lex.pos += 4;
      lex.expect('{');
      std::vector<std::string> names;
      names.push_back(lex.name());
      while (lex.consume(',')) names.push_back(lex.name());
      lex.expect('}');
      lex.expect('(');
      std::vector<VarRef> vars;
      for (const auto& n : names) {
        vars.push_back(VarRef::bound(n, n));
        scope.push_back(n);
      }
      Estimand body = parse_expr();
      lex.expect(')');
      scope.resize(scope.size() - names.size());
      return Estimand::sum(std::move(vars), std::move(body));
    }
    lex.expect('P');
    lex.expect('(');
    std::vector<VarRef> targets = ref_list();
    std::vector<VarRef> given;
    if (lex.consume('|')) given = ref_list();
    lex.expect(')');
    return Estimand::term(std::move(targets), std::move(given));
  }

  Estimand parse_expr() {
    std::vector<Estimand> units;
    units.push_back(parse_unit());
    while (!lex.eof() && lex.peek() != ')') units.push_back(parse_unit());
    if (units.size() == 1) return std::move(units[0]);
    return Estimand::product(std::move(units));
  }
};

}  // namespace

Estimand parse_estimand(std::string_view text) {
  Parser p{Lexer{text}, {}};
  Estimand e = p.parse_expr();
  if (!p.lex.eof())
    throw std::invalid_argument("estimand parse: trailing input at offset " +
                                std::to_string(p.lex.pos));
  return e;
}

// ---------------------------------------------------------------------------
// Substitution

void rename_bound(Estimand& e, const std::string& from, const std::string& to) {
  for (auto& v : e.sum_vars_)
    if (v.display == from) v.display = to;
  for (auto* refs : {&e.targets_, &e.given_})
    for (auto& r : *refs)
      if (r.binding == Binding::Bound && r.display == from) r.display = to;
  for (auto& c : e.children_) rename_bound(c, from, to);
}

namespace {

void collect_displays(const Estimand& e, std::unordered_set<std::string>& out) {
  for (const auto& v : e.sum_vars()) out.insert(v.display);
  for (const auto* refs : {&e.targets(), &e.given()})
    for (const auto& r : *refs) out.insert(r.display);
  for (const auto& v : e.placeholder_vars()) out.insert(v.display);
  for (const auto& c : e.children()) collect_displays(c, out);
}

void collect_bound_displays(const Estimand& e, std::vector<std::string>& out) {
  for (const auto& v : e.sum_vars()) out.push_back(v.display);
  for (const auto& c : e.children()) collect_bound_displays(c, out);
}

int count_placeholders(const Estimand& e, const std::string& id) {
  int n = e.kind() == Estimand::Kind::Placeholder && e.placeholder_id() == id ? 1 : 0;
  for (const auto& c : e.children()) n += count_placeholders(c, id);
  return n;
}

// Rewrites sub's free refs per the placeholder's declared variable bindings.
Estimand rebind_free(const Estimand& e, const std::vector<VarRef>& vars) {
  Estimand out = e;
  auto rewrite = [&](std::vector<VarRef>& refs) {
    for (auto& r : refs) {
      if (r.binding != Binding::Free) continue;
      auto it = std::find_if(vars.begin(), vars.end(),
                             [&](const VarRef& v) { return v.node == r.node; });
      if (it == vars.end())
        throw std::invalid_argument("free variable '" + r.node +
                                    "' not declared by placeholder");
      r = *it;
    }
  };
  // Rebuild through the public surface to keep invariants checked.
  switch (out.kind()) {
    case Estimand::Kind::Term: {
      std::vector<VarRef> t = out.targets(), g = out.given();
      rewrite(t);
      rewrite(g);
      return Estimand::term(std::move(t), std::move(g));
    }
    case Estimand::Kind::Placeholder:
      throw std::invalid_argument("cannot splice an expression that still has a placeholder");
    case Estimand::Kind::Sum: {
      Estimand body = rebind_free(out.children()[0], vars);
      return Estimand::sum(out.sum_vars(), std::move(body));
    }
    case Estimand::Kind::Product: {
      std::vector<Estimand> factors;
      for (const auto& c : out.children()) factors.push_back(rebind_free(c, vars));
      return Estimand::product(std::move(factors));
    }
  }
  return out;
}

Estimand splice(const Estimand& e, const std::string& id, const Estimand& sub) {
  if (e.kind() == Estimand::Kind::Placeholder && e.placeholder_id() == id)
    return rebind_free(sub, e.placeholder_vars());
  Estimand out = e;
  switch (out.kind()) {
    case Estimand::Kind::Sum: {
      Estimand body = splice(out.children()[0], id, sub);
      return Estimand::sum(out.sum_vars(), std::move(body));
    }
    case Estimand::Kind::Product: {
      std::vector<Estimand> factors;
      for (const auto& c : out.children()) factors.push_back(splice(c, id, sub));
      return Estimand::product(std::move(factors));
    }
    default:
      return out;
  }
}

}  // namespace

Estimand substitute(const Estimand& e, const std::string& placeholder_id,
                    const Estimand& sub) {
  int n = count_placeholders(e, placeholder_id);
  if (n != 1)
    throw std::invalid_argument("placeholder '" + placeholder_id + "' occurs " +
                                std::to_string(n) + " times, expected exactly 1");

  std::unordered_set<std::string> taken;
  collect_displays(e, taken);
  std::vector<std::string> sub_bound;
  collect_bound_displays(sub, sub_bound);

  Estimand renamed = sub;
  std::unordered_set<std::string> sub_all;
  collect_displays(sub, sub_all);
  for (const auto& d : sub_bound) {
    if (!taken.count(d)) continue;
    std::string fresh = d;
    do {
      fresh += "'";
    } while (taken.count(fresh) || sub_all.count(fresh));
    rename_bound(renamed, d, fresh);
    taken.insert(fresh);
  }
  return splice(e, placeholder_id, renamed);
}

// ---------------------------------------------------------------------------
// Distribution and evaluation

int Distribution::var_index(const std::string& name) const {
  for (size_t i = 0; i < variables.size(); ++i)
    if (variables[i] == name) return static_cast<int>(i);
  // Estimands parsed from their textual form carry lowercased node names;
  // fall back to a unique case-insensitive match.
  auto lower = [](std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  int found = -1;
  std::string want = lower(name);
  for (size_t i = 0; i < variables.size(); ++i)
    if (lower(variables[i]) == want) {
      if (found >= 0) throw std::invalid_argument("ambiguous variable: " + name);
      found = static_cast<int>(i);
    }
  if (found >= 0) return found;
  throw std::invalid_argument("unknown variable: " + name);
}

int Distribution::value_index(int var, const std::string& v) const {
  const auto& dom = domains.at(var);
  for (size_t i = 0; i < dom.size(); ++i)
    if (dom[i] == v) return static_cast<int>(i);
  throw std::invalid_argument("unknown value '" + v + "' for " + variables[var]);
}

size_t Distribution::table_size() const {
  size_t n = 1;
  for (const auto& d : domains) n *= d.size();
  return n;
}

void Distribution::validate(bool require_positive) const {
  if (table.size() != table_size())
    throw std::invalid_argument("distribution table size mismatch");
  double total = 0;
  for (double p : table) {
    if (p < 0 || (require_positive && p <= 0))
      throw std::invalid_argument("distribution entry out of range");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("distribution does not sum to 1");
}

std::vector<double> marginal(const Distribution& d, const std::vector<int>& vars) {
  size_t out_size = 1;
  for (int v : vars) out_size *= d.card(v);
  std::vector<double> out(out_size, 0.0);

  // Per-variable strides in the full table.
  std::vector<size_t> stride(d.variables.size(), 1);
  for (int i = static_cast<int>(d.variables.size()) - 2; i >= 0; --i)
    stride[i] = stride[i + 1] * d.card(i + 1);

  for (size_t idx = 0; idx < d.table.size(); ++idx) {
    size_t key = 0;
    for (int v : vars) key = key * d.card(v) + (idx / stride[v]) % d.card(v);
    out[key] += d.table[idx];
  }
  return out;
}

namespace {

struct TermCache {
  std::vector<int> ref_vars;     // joint var index per ref, targets then given
  std::vector<double> cond;      // P(targets | given), mixed-radix over ref_vars
};

class Evaluator {
 public:
  Evaluator(const Distribution& joint, const std::string& x_value)
      : joint_(joint), x_value_(x_value) {}

  const Distribution& joint_;
  std::string x_value_;
  std::unordered_map<std::string, int> free_env;   // node -> value index
  std::unordered_map<std::string, int> bound_env;  // display -> value index
  std::map<const Estimand*, TermCache> caches_;

  int resolve(const VarRef& r) {
    switch (r.binding) {
      case Binding::Free: {
        // Keyed by the joint's canonical variable name; r.node may carry the
        // lowercased textual form.
        auto it = free_env.find(joint_.variables[joint_.var_index(r.node)]);
        if (it == free_env.end())
          throw std::invalid_argument("unresolved free variable: " + r.node);
        return it->second;
      }
      case Binding::Bound: {
        auto it = bound_env.find(r.display);
        if (it == bound_env.end())
          throw std::invalid_argument("bound variable used out of scope: " + r.display);
        return it->second;
      }
      case Binding::Fixed:
        return joint_.value_index(joint_.var_index(r.node), x_value_);
    }
    return -1;
  }

  const TermCache& term_cache(const Estimand& e) {
    auto it = caches_.find(&e);
    if (it != caches_.end()) return it->second;

    TermCache c;
    std::vector<int> given_vars;
    for (const auto& r : e.targets()) c.ref_vars.push_back(joint_.var_index(r.node));
    for (const auto& r : e.given()) {
      int v = joint_.var_index(r.node);
      c.ref_vars.push_back(v);
      given_vars.push_back(v);
    }
    size_t all_size = 1;
    for (int v : c.ref_vars) all_size *= joint_.card(v);
    size_t given_size = 1;
    for (int v : given_vars) given_size *= joint_.card(v);

    std::vector<double> marg_all(all_size, 0.0);
    std::vector<double> marg_given(given_size, 0.0);
    std::vector<size_t> stride(joint_.variables.size(), 1);
    for (int i = static_cast<int>(joint_.variables.size()) - 2; i >= 0; --i)
      stride[i] = stride[i + 1] * joint_.card(i + 1);
    for (size_t idx = 0; idx < joint_.table.size(); ++idx) {
      size_t key_all = 0, key_given = 0;
      for (int v : c.ref_vars) key_all = key_all * joint_.card(v) + (idx / stride[v]) % joint_.card(v);
      for (int v : given_vars)
        key_given = key_given * joint_.card(v) + (idx / stride[v]) % joint_.card(v);
      marg_all[key_all] += joint_.table[idx];
      marg_given[key_given] += joint_.table[idx];
    }

    c.cond.assign(all_size, 0.0);
    size_t per_given = given_size ? all_size / given_size : all_size;
    (void)per_given;
    for (size_t a = 0; a < all_size; ++a) {
      // Given-part key is the low-order digits (given refs come last).
      size_t g = given_vars.empty() ? 0 : a % given_size;
      double denom = given_vars.empty() ? 1.0 : marg_given[g];
      if (denom <= 0.0) {
        if (marg_all[a] > 0.0)
          throw std::domain_error("zero-probability conditioning event");
        c.cond[a] = 0.0;
      } else {
        c.cond[a] = marg_all[a] / denom;
      }
    }
    return caches_.emplace(&e, std::move(c)).first->second;
  }

  double eval(const Estimand& e) {
    switch (e.kind()) {
      case Estimand::Kind::Term: {
        const TermCache& c = term_cache(e);
        size_t key = 0;
        size_t i = 0;
        for (const auto* refs : {&e.targets(), &e.given()})
          for (const auto& r : *refs) {
            int v = c.ref_vars[i++];
            key = key * joint_.card(v) + resolve(r);
          }
        return c.cond[key];
      }
      case Estimand::Kind::Product: {
        double p = 1.0;
        for (const auto& f : e.children()) p *= eval(f);
        return p;
      }
      case Estimand::Kind::Sum:
        return eval_sum(e, 0);
      case Estimand::Kind::Placeholder:
        throw std::invalid_argument("cannot evaluate an estimand with a placeholder");
    }
    return 0.0;
  }

  double eval_sum(const Estimand& e, size_t vi) {
    if (vi == e.sum_vars().size()) return eval(e.children()[0]);
    const VarRef& var = e.sum_vars()[vi];
    int jv = joint_.var_index(var.node);
    double total = 0.0;
    for (int val = 0; val < joint_.card(jv); ++val) {
      bound_env[var.display] = val;
      total += eval_sum(e, vi + 1);
    }
    bound_env.erase(var.display);
    return total;
  }
};

void collect_free(const Estimand& e, NodeSet& vars, const Distribution& joint) {
  for (const auto* refs : {&e.targets(), &e.given()})
    for (const auto& r : *refs)
      if (r.binding == Binding::Free) vars.insert(joint.var_index(r.node));
  for (const auto& c : e.children()) collect_free(c, vars, joint);
}

void check_bound_scoping(const Estimand& e, std::vector<std::string>& scope) {
  for (const auto& v : e.sum_vars())
    if (std::count(scope.begin(), scope.end(), v.display))
      throw std::invalid_argument("bound variable shadowed: " + v.display);
  for (const auto& v : e.sum_vars()) scope.push_back(v.display);
  for (const auto* refs : {&e.targets(), &e.given()})
    for (const auto& r : *refs)
      if (r.binding == Binding::Bound &&
          !std::count(scope.begin(), scope.end(), r.display))
        throw std::invalid_argument("bound variable out of scope: " + r.display);
  for (const auto& c : e.children()) check_bound_scoping(c, scope);
  scope.resize(scope.size() - e.sum_vars().size());
}

}  // namespace

Distribution evaluate(const Estimand& e, const Distribution& joint,
                      const std::string& x_value) {
  std::vector<std::string> scope;
  check_bound_scoping(e, scope);

  NodeSet free_vars;
  collect_free(e, free_vars, joint);

  Distribution out;
  for (int v : free_vars) {
    out.variables.push_back(joint.variables[v]);
    out.domains.push_back(joint.domains[v]);
  }
  Evaluator ev(joint, x_value);
  size_t n = out.table_size();
  out.table.resize(n);
  for (size_t idx = 0; idx < n; ++idx) {
    size_t rest = idx;
    for (int i = static_cast<int>(out.variables.size()) - 1; i >= 0; --i) {
      int c = out.card(i);
      ev.free_env[out.variables[i]] = static_cast<int>(rest % c);
      rest /= c;
    }
    out.table[idx] = ev.eval(e);
  }
  return out;
}

}  // namespace causal

#include "causal/cli.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "causal/docalculus.hpp"
#include "causal/estimand.hpp"
#include "causal/graph.hpp"
#include "causal/identify.hpp"
#include "causal/model.hpp"
#include "causal/separation.hpp"

#include "json.hpp"

namespace causal {

namespace {

using nlohmann::json;

std::vector<std::string> names(const CausalDiagram& g, const NodeSet& s) {
  std::vector<std::string> out;
  for (int v : s) out.push_back(g.name(v));
  return out;
}

std::string joined(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += ",";
    out += s;
  }
  return out;
}

struct Styler {
  bool color;
  std::string good(const std::string& s) const {
    return color ? "\x1b[32m" + s + "\x1b[0m" : s;
  }
  std::string bad(const std::string& s) const {
    return color ? "\x1b[31m" + s + "\x1b[0m" : s;
  }
};

json rule_check_json(const CausalDiagram& g, const RuleCheck& rc) {
  return json{{"rule", rc.rule},
              {"y", names(g, rc.y)},
              {"z", names(g, rc.z)},
              {"x", names(g, rc.x)},
              {"w", names(g, rc.w)},
              {"holds", rc.holds},
              {"surgery",
               {{"cut_incoming", names(g, rc.surgery.cut_incoming)},
                {"cut_outgoing", names(g, rc.surgery.cut_outgoing)}}},
              {"query",
               {{"a", names(g, rc.query.a)},
                {"b", names(g, rc.query.b)},
                {"given", names(g, rc.query.given)}}}};
}

void print_trace(std::ostream& out, const CausalDiagram& g,
                 const std::vector<RuleCheck>& trace) {
  for (const auto& rc : trace) {
    out << "  rule" << rc.rule << " y={" << joined(names(g, rc.y)) << "} z={"
        << joined(names(g, rc.z)) << "} x={" << joined(names(g, rc.x))
        << "} w={" << joined(names(g, rc.w)) << "} "
        << (rc.holds ? "holds" : "fails") << "\n";
  }
}

NodeSet parse_set_spec(const CausalDiagram& g, const std::string& spec,
                       const std::string& key) {
  // spec looks like "y=A,B; z=C; x=; w=D"
  std::istringstream in(spec);
  std::string part;
  while (std::getline(in, part, ';')) {
    auto eq = part.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad --sets syntax");
    std::string k = part.substr(0, eq);
    k.erase(0, k.find_first_not_of(" \t"));
    k.erase(k.find_last_not_of(" \t") + 1);
    if (k != key) continue;
    std::vector<std::string> items;
    std::istringstream vals(part.substr(eq + 1));
    std::string item;
    while (std::getline(vals, item, ',')) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      if (!item.empty()) items.push_back(item);
    }
    return g.resolve(items);
  }
  return {};
}

int run_identify(const RunConfig& cfg, const CausalDiagram& g,
                 std::ostream& out, const Styler& style) {
  Query q{g.index_of(cfg.x), g.resolve(cfg.y), g.resolve(cfg.context)};
  Verdict v = identify(g, q);

  if (cfg.format == "json") {
    json j{{"command", cfg.command},
           {"identifiable", v.identifiable},
           {"condition", v.condition},
           {"failures", v.failures}};
    if (v.estimand) {
      j["estimand"] = render(*v.estimand, Style::Plain);
      j["estimand_latex"] = render(*v.estimand, Style::Latex);
    }
    json trace = json::array();
    for (const auto& rc : v.trace) trace.push_back(rule_check_json(g, rc));
    j["trace"] = trace;
    out << j.dump(2) << "\n";
    return v.identifiable ? 0 : 2;
  }

  Style render_style = cfg.format == "latex" ? Style::Latex : Style::Plain;
  if (cfg.command == "estimand") {
    if (!v.identifiable) {
      for (const auto& f : v.failures) out << f << "\n";
      return 2;
    }
    out << render(*v.estimand, render_style) << "\n";
    return 0;
  }

  if (v.identifiable) {
    out << "verdict: " << style.good("identifiable") << " (condition "
        << v.condition << ")\n";
    out << "estimand: " << render(*v.estimand, render_style) << "\n";
    out << "trace:\n";
    print_trace(out, g, v.trace);
    return 0;
  }
  out << "verdict: " << style.bad("not identifiable") << "\n";
  for (const auto& f : v.failures) out << "  " << f << "\n";
  return 2;
}

int run_dsep(const RunConfig& cfg, const CausalDiagram& g, std::ostream& out,
             const Styler& style) {
  ExpandedGraph e = expand_latents(g);
  SeparationQuery q{g.resolve(cfg.a), g.resolve(cfg.b), g.resolve(cfg.z)};
  bool sep = d_separated(e, q);
  if (cfg.format == "json") {
    json j{{"command", "dsep"},
           {"a", cfg.a},
           {"b", cfg.b},
           {"given", cfg.z},
           {"separated", sep}};
    if (!sep) {
      auto path = find_open_path(e, q.a, q.b, q.given);
      if (path) {
        std::vector<std::string> p;
        for (int v : *path) p.push_back(e.names[v]);
        j["open_path"] = p;
      }
    }
    out << j.dump(2) << "\n";
    return sep ? 0 : 2;
  }
  if (sep) {
    out << style.good("separated") << "\n";
    return 0;
  }
  out << style.bad("connected") << "\n";
  if (auto path = find_open_path(e, q.a, q.b, q.given)) {
    out << "open path:";
    for (int v : *path) out << " " << e.names[v];
    out << "\n";
  }
  return 2;
}

int run_rulecheck(const RunConfig& cfg, const CausalDiagram& g,
                  std::ostream& out, const Styler& style) {
  ExpandedGraph e = expand_latents(g);
  NodeSet y = parse_set_spec(g, cfg.sets, "y");
  NodeSet z = parse_set_spec(g, cfg.sets, "z");
  NodeSet x = parse_set_spec(g, cfg.sets, "x");
  NodeSet w = parse_set_spec(g, cfg.sets, "w");
  RuleCheck rc;
  switch (cfg.rule) {
    case 1: rc = rule1_applicable(e, y, z, x, w); break;
    case 2: rc = rule2_applicable(e, y, z, x, w); break;
    case 3: rc = rule3_applicable(e, y, z, x, w); break;
    default: throw std::invalid_argument("--rule must be 1, 2 or 3");
  }
  if (cfg.format == "json") {
    out << json{{"command", "rulecheck"}, {"check", rule_check_json(g, rc)}}
               .dump(2)
        << "\n";
    return rc.holds ? 0 : 2;
  }
  out << "rule" << rc.rule << " "
      << (rc.holds ? style.good("holds") : style.bad("fails")) << "\n";
  out << "surgery: cut_incoming={" << joined(names(g, rc.surgery.cut_incoming))
      << "} cut_outgoing={" << joined(names(g, rc.surgery.cut_outgoing))
      << "}\n";
  out << "separation: {" << joined(names(g, rc.query.a)) << "} _||_ {"
      << joined(names(g, rc.query.b)) << "} | {"
      << joined(names(g, rc.query.given)) << "}\n";
  return rc.holds ? 0 : 2;
}

int run_verify(const RunConfig& cfg, const CausalDiagram& g, std::ostream& out,
               std::ostream& err, const Styler& style) {
  Query q{g.index_of(cfg.x), g.resolve(cfg.y), g.resolve(cfg.context)};
  Verdict v = identify(g, q);

  if (v.identifiable) {
    double worst = 0;
    for (int i = 0; i < cfg.models; ++i) {
      DiscreteModel m = random_model(g, cfg.seed + i);
      for (const auto& xv : m.domains[q.x])
        worst = std::max(worst, check_estimand(m, *v.estimand, q, xv));
    }
    bool pass = worst < cfg.tol;
    if (cfg.format == "json") {
      out << json{{"command", "verify"},
                  {"identifiable", true},
                  {"condition", v.condition},
                  {"estimand", render(*v.estimand, Style::Plain)},
                  {"models", cfg.models},
                  {"max_error", worst},
                  {"pass", pass}}
                 .dump(2)
          << "\n";
    } else {
      out << "identifiable (condition " << v.condition
          << "), estimand: " << render(*v.estimand, Style::Plain) << "\n";
      out << "max error over " << cfg.models << " models: " << worst << " "
          << (pass ? style.good("pass") : style.bad("fail")) << "\n";
    }
    return pass ? 0 : 2;
  }

  SearchConfig sc;
  sc.budget = cfg.budget;
  sc.seed = cfg.seed;
  auto witness = search_counterexample(g, q, sc);
  if (cfg.format == "json") {
    json j{{"command", "verify"}, {"identifiable", false},
           {"failures", v.failures}, {"witness_found", witness.has_value()}};
    if (witness) {
      j["obs_distance"] = witness->obs_distance;
      j["effect_distance"] = witness->effect_distance;
      j["x_value"] = witness->x_value;
    }
    out << j.dump(2) << "\n";
  } else {
    out << "verdict: " << style.bad("not identifiable") << "\n";
    for (const auto& f : v.failures) out << "  " << f << "\n";
    if (witness) {
      out << "witness: obs_distance=" << witness->obs_distance
          << " effect_distance=" << witness->effect_distance << " at do("
          << cfg.x << "=" << witness->x_value << ")\n";
    } else {
      out << "no witness found within " << cfg.budget << " trials\n";
    }
  }
  if (witness && !cfg.dump_witness.empty()) {
    std::ofstream f(cfg.dump_witness);
    if (!f) {
      err << "cannot write " << cfg.dump_witness << "\n";
      return 1;
    }
    f << "# model A\n" << serialize_model(witness->model_a);
    f << "# model B\n" << serialize_model(witness->model_b);
  }
  return 2;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Styler style{cfg.color};
  std::ifstream file(cfg.graph_path);
  if (!file) {
    err << cfg.graph_path << ": cannot open\n";
    return 1;
  }
  std::stringstream buf;
  buf << file.rdbuf();

  try {
    CausalDiagram g = parse_diagram(buf.str());
    if (cfg.command == "identify" || cfg.command == "estimand")
      return run_identify(cfg, g, out, style);
    if (cfg.command == "dsep") return run_dsep(cfg, g, out, style);
    if (cfg.command == "rulecheck") return run_rulecheck(cfg, g, out, style);
    if (cfg.command == "verify") return run_verify(cfg, g, out, err, style);
    err << "unknown command '" << cfg.command << "'\n";
    return 1;
  } catch (const ParseError& ex) {
    err << cfg.graph_path << ":" << ex.line() << ":" << ex.col() << ": "
        << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    err << cfg.graph_path << ": " << ex.what() << "\n";
    return 1;
  }
}

}  // namespace causal

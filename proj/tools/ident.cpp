#include <unistd.h>

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "causal/cli.hpp"

namespace {

void add_query_flags(CLI::App* cmd, causal::RunConfig& cfg) {
  cmd->add_option("-g,--graph", cfg.graph_path, "graph file")->required();
  cmd->add_option("-x", cfg.x, "intervention node")->required();
  cmd->add_option("-y", cfg.y, "target nodes")->required()->delimiter(',');
  cmd->add_option("-c,--context", cfg.context, "conditioning nodes")
      ->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  causal::RunConfig cfg;

  const char* color_env = std::getenv("IDENT_COLOR");
  cfg.color = isatty(fileno(stdout)) &&
              !(color_env && std::string(color_env) == "0");

  CLI::App app{"identifiability of causal effects in diagrams with latent "
               "confounders"};
  app.require_subcommand(1);

  auto* identify = app.add_subcommand("identify", "derive P(y|do(x))");
  add_query_flags(identify, cfg);
  identify->add_option("--format", cfg.format, "plain|latex|json")
      ->check(CLI::IsMember({"plain", "latex", "json"}));

  auto* estimand = app.add_subcommand("estimand", "print the formula only");
  add_query_flags(estimand, cfg);
  estimand->add_option("--format", cfg.format, "plain|latex|json")
      ->check(CLI::IsMember({"plain", "latex", "json"}));

  auto* dsep = app.add_subcommand("dsep", "d-separation check");
  dsep->add_option("-g,--graph", cfg.graph_path, "graph file")->required();
  dsep->add_option("-a", cfg.a, "first node set")->required()->delimiter(',');
  dsep->add_option("-b", cfg.b, "second node set")->required()->delimiter(',');
  dsep->add_option("-z", cfg.z, "conditioning set")->delimiter(',');
  dsep->add_option("--format", cfg.format, "plain|json")
      ->check(CLI::IsMember({"plain", "json"}));

  auto* rulecheck = app.add_subcommand("rulecheck", "inference-rule certificate");
  rulecheck->add_option("-g,--graph", cfg.graph_path, "graph file")->required();
  rulecheck->add_option("--rule", cfg.rule, "1, 2 or 3")->required();
  rulecheck
      ->add_option("--sets", cfg.sets, "semicolon list, e.g. 'y=A;z=B;x=;w=C'")
      ->required();
  rulecheck->add_option("--format", cfg.format, "plain|json")
      ->check(CLI::IsMember({"plain", "json"}));

  auto* verify = app.add_subcommand("verify", "oracle-check the verdict");
  add_query_flags(verify, cfg);
  verify->add_option("--models", cfg.models, "random models per check");
  verify->add_option("--seed", cfg.seed, "base seed");
  verify->add_option("--tol", cfg.tol, "max-error tolerance");
  verify->add_option("--budget", cfg.budget, "counterexample trials");
  verify->add_option("--dump-witness", cfg.dump_witness,
                     "write witness models to this file");
  verify->add_option("--format", cfg.format, "plain|json")
      ->check(CLI::IsMember({"plain", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  return causal::run(cfg, std::cout, std::cerr);
}

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace causal {

// One parsed invocation.  The binary fills this from flags; tests construct
// it directly.
struct RunConfig {
  std::string command;  // identify | estimand | dsep | rulecheck | verify
  std::string graph_path;

  std::string x;
  std::vector<std::string> y;
  std::vector<std::string> context;

  std::vector<std::string> a, b, z;  // dsep sets

  int rule = 0;       // rulecheck: 1, 2 or 3
  std::string sets;   // rulecheck: "y=A,B; z=C; x=; w=D"

  int models = 100;   // verify: oracle seeds per identifiable verdict
  unsigned seed = 0;
  double tol = 1e-9;
  int budget = 10000;         // verify: counterexample trials
  std::string dump_witness;   // verify: write the witness models here

  std::string format = "plain";  // plain | latex | json
  bool color = false;
};

// Exit status: 0 = positive answer (identifiable / separated / rule holds /
// oracle passed), 2 = negative answer, 1 = usage or input error.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace causal

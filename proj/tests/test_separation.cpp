#include "doctest.h"

#include <random>

#include "causal/separation.hpp"
#include "oracles.hpp"

using namespace causal;

namespace {

ExpandedGraph expanded(const char* text) {
  return expand_latents(parse_diagram(text));
}

const char* kSprinkler =
    "node X1 X2 X3 X4 X5\n"
    "X1 -> X2\nX1 -> X3\nX2 -> X4\nX3 -> X4\nX4 -> X5\n";

const char* kSprinklerLatent =
    "node X2 X3 X4 X5\n"
    "X2 <-> X3\nX2 -> X4\nX3 -> X4\nX4 -> X5\n";

}  // namespace

TEST_CASE("chain and collider behavior") {
  ExpandedGraph chain = expanded("node A B C\nA -> B\nB -> C\n");
  CHECK(d_separated(chain, {0}, {2}, {1}));
  CHECK_FALSE(d_separated(chain, {0}, {2}, {}));

  ExpandedGraph collider = expanded("node A B C\nA -> C\nB -> C\n");
  CHECK(d_separated(collider, {0}, {1}, {}));
  CHECK_FALSE(d_separated(collider, {0}, {1}, {2}));
}

TEST_CASE("conditioning on a collider descendant opens the path") {
  ExpandedGraph g = expanded("node A B C D\nA -> C\nB -> C\nC -> D\n");
  CHECK_FALSE(d_separated(g, {0}, {1}, {3}));
}

TEST_CASE("sprinkler independencies") {
  ExpandedGraph g = expanded(kSprinkler);
  CHECK(d_separated(g, {1}, {2}, {0}));    // X2 _||_ X3 | X1
  CHECK_FALSE(d_separated(g, {1}, {2}, {0, 3}));
}

TEST_CASE("query validation") {
  ExpandedGraph g = expanded("node A B C\nA -> B\n");
  CHECK_THROWS(d_separated(g, {}, {1}, {}));
  CHECK_THROWS(d_separated(g, {0}, {0}, {}));
  CHECK_THROWS(d_separated(g, {0}, {1}, {1}));
}

TEST_CASE("d-separation matches path enumeration on random graphs") {
  std::mt19937 rng(2024);
  int checked = 0;
  while (checked < 300) {
    CausalDiagram g = oracles::random_diagram(rng, 8, 3);
    ExpandedGraph e = expand_latents(g);
    std::uniform_int_distribution<int> pick(0, g.size() - 1);
    int a = pick(rng), b = pick(rng);
    if (a == b) continue;
    NodeSet given;
    for (int v = 0; v < g.size(); ++v)
      if (v != a && v != b && pick(rng) % 3 == 0) given.insert(v);
    CHECK(d_separated(e, {a}, {b}, given) ==
          oracles::path_d_separated(e, {a}, {b}, given));
    ++checked;
  }
}

TEST_CASE("d-separation is symmetric") {
  std::mt19937 rng(99);
  for (int t = 0; t < 60; ++t) {
    CausalDiagram g = oracles::random_diagram(rng, 7, 2);
    ExpandedGraph e = expand_latents(g);
    std::uniform_int_distribution<int> pick(0, g.size() - 1);
    int a = pick(rng), b = pick(rng);
    if (a == b) continue;
    NodeSet given;
    for (int v = 0; v < g.size(); ++v)
      if (v != a && v != b && pick(rng) % 3 == 0) given.insert(v);
    CHECK(d_separated(e, {a}, {b}, given) == d_separated(e, {b}, {a}, given));
  }
}

TEST_CASE("find_open_path witnesses connection") {
  ExpandedGraph g = expanded("node A B C\nA -> B\nB -> C\n");
  auto path = find_open_path(g, {0}, {2}, {});
  REQUIRE(path.has_value());
  CHECK(path->front() == 0);
  CHECK(path->back() == 2);
  CHECK_FALSE(find_open_path(g, {0}, {2}, {1}).has_value());
}

TEST_CASE("has_directed_path") {
  ExpandedGraph g = expanded(kSprinkler);
  CHECK(has_directed_path(g, 2, {4}));   // X3 to X5
  CHECK_FALSE(has_directed_path(g, 4, {0}));
  ExpandedGraph pair = expanded("node A B\n");
  CHECK_FALSE(has_directed_path(pair, 0, {1}));
}

TEST_CASE("backdoor_blocked cases") {
  ExpandedGraph root = expanded("node X Y\nX -> Y\n");
  CHECK(backdoor_blocked(root, 0, {1}, {}));

  CausalDiagram ls = parse_diagram(kSprinklerLatent);
  ExpandedGraph e = expand_latents(ls);
  int x3 = ls.index_of("X3");
  CHECK_FALSE(backdoor_blocked(e, x3, {ls.index_of("X4")}, {}));
  CHECK(backdoor_blocked(e, x3, {ls.index_of("X4")}, {ls.index_of("X2")}));

  ExpandedGraph bow = expanded("node X Y\nX -> Y\nX <-> Y\n");
  CHECK_FALSE(backdoor_blocked(bow, 0, {1}, {}));
}

TEST_CASE("minimal blocking set on the latent sprinkler") {
  CausalDiagram g = parse_diagram(kSprinklerLatent);
  auto res = find_minimal_blocking_set(g, g.index_of("X3"), {g.index_of("X4")});
  REQUIRE(res.found);
  CHECK(res.set == NodeSet{g.index_of("X2")});
}

TEST_CASE("bow graph has no blocking set") {
  CausalDiagram g = parse_diagram("node X Y\nX -> Y\nX <-> Y\n");
  auto res = find_minimal_blocking_set(g, 0, {1});
  CHECK_FALSE(res.found);
  CHECK(res.reason == BlockFail::ResidualPath);
}

TEST_CASE("chain needs no conditioning") {
  CausalDiagram g = parse_diagram("node X Z Y\nX -> Z\nZ -> Y\n");
  auto res = find_minimal_blocking_set(g, 0, {2});
  REQUIRE(res.found);
  CHECK(res.set.empty());
}

TEST_CASE("shield reaching the target reports target-hit") {
  // Y is X's parent: the x-side shield contains the target itself.
  CausalDiagram g = parse_diagram("node X Y\nY -> X\nX <-> Y\n");
  auto res = find_minimal_blocking_set(g, 0, {1});
  CHECK_FALSE(res.found);
  CHECK(res.reason == BlockFail::TargetHit);
}

TEST_CASE("forbidden-free restriction degenerates to the plain search") {
  std::mt19937 rng(31);
  for (int t = 0; t < 40; ++t) {
    CausalDiagram g = oracles::random_diagram(rng, 6, 2);
    std::uniform_int_distribution<int> pick(0, g.size() - 1);
    int x = pick(rng), y = pick(rng);
    if (x == y) continue;
    auto plain = find_minimal_blocking_set(g, x, {y});
    auto restricted = find_blocking_set_with_forbidden(g, {x}, {y}, {}, {});
    CHECK(plain.found == restricted.found);
    if (plain.found) CHECK(plain.set == restricted.set);
  }
}

TEST_CASE("front-door inner query blocks with the empty set") {
  CausalDiagram g = parse_diagram("node X Z1 Y\nX -> Z1\nZ1 -> Y\nX <-> Y\n");
  NodeSet forbidden = closure(g, {0}, Direction::Descendants, false);
  forbidden = set_difference(forbidden, {g.index_of("Z1"), g.index_of("Y")});
  auto res = find_blocking_set_with_forbidden(
      g, {g.index_of("Z1")}, {g.index_of("Y")}, forbidden,
      Surgery{{0}, {}});
  REQUIRE(res.found);
  CHECK(res.set.empty());
}

TEST_CASE("non-descendant helper set is found when required") {
  // X -> Z1 -> Y with X <-> Y, plus Z2 -> Z1 and Z2 -> Y: the back-door
  // from Z1 to Y through Z2 must be closed by conditioning on Z2.
  CausalDiagram g = parse_diagram(
      "node X Z1 Z2 Y\nX -> Z1\nZ1 -> Y\nZ2 -> Z1\nZ2 -> Y\nX <-> Y\n");
  NodeSet forbidden = closure(g, {0}, Direction::Descendants, false);
  forbidden = set_difference(forbidden, {g.index_of("Z1"), g.index_of("Y")});
  auto res = find_blocking_set_with_forbidden(
      g, {g.index_of("Z1")}, {g.index_of("Y")}, forbidden, Surgery{{0}, {}});
  REQUIRE(res.found);
  CHECK(res.set == NodeSet{g.index_of("Z2")});
}

TEST_CASE("found sets block and are minimal") {
  std::mt19937 rng(77);
  int found = 0;
  for (int t = 0; t < 150; ++t) {
    CausalDiagram g = oracles::random_diagram(rng, 7, 3);
    ExpandedGraph e = expand_latents(g);
    std::uniform_int_distribution<int> pick(0, g.size() - 1);
    int x = pick(rng), y = pick(rng);
    if (x == y) continue;
    auto res = find_minimal_blocking_set(g, x, {y});
    if (!res.found) continue;
    ++found;
    CHECK(backdoor_blocked(e, x, {y}, res.set));
    for (int v : res.set)
      CHECK_FALSE(backdoor_blocked(e, x, {y}, set_difference(res.set, {v})));
  }
  CHECK(found > 10);
}

TEST_CASE("failures agree with exhaustive subset search on small graphs") {
  std::mt19937 rng(123);
  for (int t = 0; t < 120; ++t) {
    CausalDiagram g = oracles::random_diagram(rng, 6, 2);
    ExpandedGraph e = expand_latents(g);
    std::uniform_int_distribution<int> pick(0, g.size() - 1);
    int x = pick(rng), y = pick(rng);
    if (x == y) continue;
    auto res = find_minimal_blocking_set(g, x, {y});
    if (res.found) continue;
    // brute force over all candidate subsets
    std::vector<int> cands;
    for (int v = 0; v < g.size(); ++v)
      if (v != x && v != y) cands.push_back(v);
    bool any = false;
    for (unsigned mask = 0; mask < (1u << cands.size()); ++mask) {
      NodeSet s;
      for (size_t i = 0; i < cands.size(); ++i)
        if (mask & (1u << i)) s.insert(cands[i]);
      if (backdoor_blocked(e, x, {y}, s)) any = true;
    }
    CHECK_FALSE(any);
  }
}

#include "doctest.h"

#include "synergy/exact_lab.hpp"

using namespace syn;

TEST_CASE("minimax examples") {
  CHECK(minimax_regret(4, 2, Kind::EQ).value == 4);
  CHECK(minimax_regret(4, 2, Kind::XOR).value == 2);
  CHECK(minimax_regret(6, 2, Kind::AND).value == 4);
  auto g = minimax_regret(6, 3, Kind::EQ);
  CHECK(g.first_move.is_perfect(6));
  CHECK(g.nodes > 0);
}

TEST_CASE("closed forms at small n") {
  for (int n = 2; n <= 6; n += 2)
    for (int k = 0; k <= n; ++k) {
      INFO("n=" << n << " k=" << k);
      CHECK(minimax_regret(n, k, Kind::EQ).value == regret_eq(n, k));
      CHECK(minimax_regret(n, k, Kind::XOR).value == regret_xor(n, k));
      auto a = minimax_regret(n, k, Kind::AND).value;
      if (k % 2 == 0 && k >= 2) {
        CHECK(a >= l_and(n, k));
        CHECK(a <= u_and(n, k));
      }
      if (2 * k < n) CHECK(minimax_regret(n, k, Kind::OR).value >= k / 2);
    }
}

TEST_CASE("memoized and plain solves agree") {
  for (int n = 2; n <= 6; n += 2)
    for (int k = 0; k <= n; ++k)
      for (auto kind : {Kind::EQ, Kind::XOR, Kind::OR, Kind::AND}) {
        INFO("n=" << n << " k=" << k << " " << kind_name(kind));
        CHECK(minimax_regret(n, k, kind, kDefaultNodeBudget, true).value ==
              minimax_regret(n, k, kind, kDefaultNodeBudget, false).value);
      }
}

TEST_CASE("value does not depend on agent names") {
  detail::Solver s(6, 2, Synergy::boolean(Kind::AND), kDefaultNodeBudget, true);
  auto root = s.root();
  Matching m({{0, 1}, {2, 3}, {4, 5}});
  auto a = s.child(root, m, {0, 0, 0});
  std::vector<int> perm{3, 5, 0, 4, 1, 2};
  std::vector<Pair> pm;
  for (auto [u, v] : m.pairs) pm.push_back({perm[u], perm[v]});
  auto b = s.child(root, Matching(pm), {0, 0, 0});
  CHECK(a.key == b.key);
  detail::Solver t(6, 2, Synergy::boolean(Kind::AND), kDefaultNodeBudget, false);
  CHECK(t.value(a) == t.value(b));
}

TEST_CASE("node budget") {
  CHECK_THROWS_AS(minimax_regret(8, 2, Kind::AND, 10), BudgetExceeded);
}

TEST_CASE("reduction to Boolean games") {
  auto c = reduction_check(4, 2, Synergy::general(5, 2, 5));
  CHECK(c.boolean_kind == Kind::EQ);
  CHECK(c.scale == 3);
  CHECK(c.general_value == 12);
  CHECK(c.boolean_value == 4);
  CHECK(c.holds);

  auto orr = reduction_check(6, 2, Synergy::general(0, 1, 1));
  CHECK(orr.scale == 1);
  CHECK(orr.general_value == orr.boolean_value);

  // NOR on (6,2) is AND on (6,4) with the labels swapped.
  auto nor = reduction_check(6, 2, Synergy::general(1, 0, 0));
  CHECK(nor.boolean_kind == Kind::AND);
  CHECK(nor.boolean_k == 4);
  CHECK(nor.general_value == minimax_regret(6, 4, Kind::AND).value);
  CHECK(nor.holds);

  CHECK(verify_reduction(4, 2, Synergy::general(Rational(1, 3), Rational(2, 3), Rational(1, 3))));
  CHECK_THROWS(verify_reduction(8, 2, Synergy::general(5, 2, 5)));
}

TEST_CASE("round-3 exploration graphs") {
  // Repeated teams allowed: one matching, a 4-cycle, or K_4.
  CHECK(enumerate_round3_graphs(4).size() == 3);
  CHECK(enumerate_round3_graphs(6).size() == 8);
  auto gs = enumerate_round3_graphs(10);
  CHECK(gs.size() == 102);
  int pairs = 0, hard = 0;
  for (auto& g : gs) {
    if (std::holds_alternative<IndepPair>(classify_104(g))) ++pairs;
    else ++hard;
  }
  CHECK(pairs == 97);
  CHECK(hard == 5);
}

TEST_CASE("classify_104 examples") {
  auto bare = union_graph(10, {lexicographic_matching(10)});
  auto c = classify_104(bare);
  REQUIRE(std::holds_alternative<IndepPair>(c));
  auto& p = std::get<IndepPair>(c);
  CHECK(p.first.size() == 4);
  CHECK(p.second.size() == 4);

  // Two K_4's and a repeated team.
  LabeledGraph two(10);
  for (int base : {2, 6})
    for (int a = base; a < base + 4; ++a)
      for (int b = a + 1; b < base + 4; ++b) two.set(a, b, 1);
  two.set(0, 1, 1);
  CHECK(std::holds_alternative<HardCase>(classify_104(two)));
  auto rep = verify_hardcase_blue_edges(two);
  CHECK(rep.holds);
  CHECK(rep.decompositions == 36);
}

TEST_CASE("blue-edge verification") {
  std::vector<LabeledGraph> hard;
  for (auto& g : enumerate_round3_graphs(10))
    if (std::holds_alternative<HardCase>(classify_104(g))) hard.push_back(g);
  REQUIRE(hard.size() == 5);
  for (auto& g : hard) {
    auto rep = verify_hardcase_blue_edges(g);
    CHECK(rep.holds);
    CHECK(!rep.orbit.empty());
  }
  // A lone edge that some decomposition avoids.
  auto decs = matching_decompositions(hard[0]);
  REQUIRE(!decs.empty());
  Pair avoided{-1, -1};
  for (auto e : hard[0].edges())
    for (auto& d : decs)
      for (auto& m : d)
        if (!m.contains(e.first, e.second)) avoided = e;
  REQUIRE(avoided.first >= 0);
  auto neg = verify_hardcase_blue_edges(hard[0], std::vector<Pair>{avoided});
  CHECK(!neg.holds);
}

TEST_CASE("(10,4) weakest-link certificate") {
  auto c = certify_104();
  CHECK(c.graphs == 102);
  CHECK(c.indep_pair == 97);
  CHECK(c.all_fail_unlocked == 97);
  CHECK(c.hard_verified == 5);
  CHECK(c.holds);
}

#include "doctest.h"

#include <random>
#include <sstream>

#include "synergy/arena.hpp"

using namespace syn;

TEST_CASE("run_game examples") {
  auto eq = run_game(PolicyKind::FormUniformTeams, "eq-bipartite", 10, 4, Kind::EQ);
  CHECK(eq.trace.total_regret == 8);
  CHECK(eq.trace.rounds_to_lock <= 3);
  CHECK(eq.locked.is_perfect(10));

  auto ring = run_game(PolicyKind::RingWeaver, "and-greedy", 10, 4, Kind::AND);
  CHECK(ring.trace.total_regret >= 6);
  CHECK(ring.trace.total_regret <= 7);

  auto me = run_game(PolicyKind::MaxExploit, "greedy:inf", 6, 2, Kind::OR);
  CHECK(me.trace.total_regret == 1);

  for (auto& v : ring.verdicts) CHECK(v.holds);
  CHECK(ring.bounds.lower == 6);
  CHECK(ring.bounds.upper == 7);
}

TEST_CASE("run_game arguments and termination") {
  CHECK_THROWS_AS(run_game(PolicyKind::NaiveFactorization, "and-greedy", 7, 2, Kind::AND), std::invalid_argument);
  CHECK_THROWS_AS(run_game(PolicyKind::NaiveFactorization, "and-greedy", 8, 9, Kind::AND), std::invalid_argument);
  CHECK_THROWS_AS(run_game(PolicyKind::NaiveFactorization, "and-greedy", 8, 2, Kind::AND, 7), std::invalid_argument);

  // A policy that never changes its matching cannot learn anything after round 1.
  ScheduledPolicy stuck(PolicyKind::NaiveFactorization, std::vector<Matching>(64, lexicographic_matching(6)));
  EqBipartite adv;
  CHECK_THROWS_AS(run_game(stuck, adv, 6, 2, Kind::EQ), std::runtime_error);

  // No regret and no rounds when every matching is optimal.
  auto g = run_game(PolicyKind::NaiveFactorization, "and-greedy", 8, 0, Kind::AND);
  CHECK(g.trace.rounds.empty());
  CHECK(g.trace.total_regret == 0);
}

TEST_CASE("matched policy and adversary pairs lock within n rounds") {
  for (int n = 2; n <= 20; n += 2)
    for (int k = 0; k <= n; ++k) {
      INFO("n=" << n << " k=" << k);
      CHECK(run_game(PolicyKind::FormUniformTeams, "eq-bipartite", n, k, Kind::EQ).trace.rounds_to_lock <= n);
      CHECK(run_game(PolicyKind::FormDiverseTeams, "xor-cycle", n, k, Kind::XOR).trace.rounds_to_lock <= n);
      CHECK(run_game(PolicyKind::MaxExploit, "or-best", n, k, Kind::OR).trace.rounds_to_lock <= n);
      if (k % 2 == 0)
        CHECK(run_game(PolicyKind::RingWeaver, "and-greedy", n, k, Kind::AND).trace.rounds_to_lock <= n);
    }
}

TEST_CASE("MaxExploit traces satisfy the invariants") {
  std::mt19937 rng(29);
  const char* advs[] = {"or-lb1", "or-lb2", "or-lb3", "or-lb4", "or-best"};
  for (int trial = 0; trial < 60; ++trial) {
    int n = 2 * (1 + static_cast<int>(rng() % 25));
    int k = static_cast<int>(rng() % (n + 1));
    const char* a = advs[trial % 5];
    auto g = run_game(PolicyKind::MaxExploit, a, n, k, Kind::OR);
    auto v = check_trace_invariants(g.trace);
    INFO(a << " n=" << n << " k=" << k << (v.empty() ? "" : " first: " + v[0]));
    CHECK(v.empty());
  }
  for (int k = 0; k <= 6; ++k) {
    auto g = run_game(PolicyKind::MaxExploit, "greedy:2", 6, k, Kind::OR);
    CHECK(check_trace_invariants(g.trace).empty());
  }
}

TEST_CASE("a trace that pairs two known zeros is flagged once") {
  // Types 1 0 0 0 1 0: round 1 leaves agents 2 and 3 known zeros, round 2 pairs them again.
  Trace t;
  t.n = 6;
  t.k = 3;
  t.kind = Kind::OR;
  t.policy = "hand";
  t.adversary = "none";
  t.locked = true;
  RoundRecord r1{Matching({{0, 1}, {2, 3}, {4, 5}}), {1, 0, 1}, 1, {}, {}, {}};
  RoundRecord r2{Matching({{0, 5}, {1, 4}, {2, 3}}), {1, 1, 0}, 1, {}, {}, {}};
  t.rounds = {r1, r2};
  t.total_regret = 2;
  t.rounds_to_lock = 2;
  auto v = check_trace_invariants(t);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("round 2") == 0);

  t.total_regret = 3;
  CHECK(check_trace_invariants(t).size() == 2);
}

TEST_CASE("AND regret is half the mixed teams") {
  auto g = run_game(PolicyKind::RingWeaver, "and-greedy", 12, 4, Kind::AND);
  CHECK(g.trace.total_regret >= 8);
  CHECK(g.trace.total_regret <= 9);
  long long mixed = 0;
  for (auto& r : g.trace.rounds) mixed += r.counters.at("zo");
  CHECK(mixed == 2 * g.trace.total_regret);
  CHECK(check_trace_invariants(g.trace).empty());
}

TEST_CASE("traces are deterministic") {
  for (auto [pk, adv, kind] : {std::tuple{PolicyKind::RingWeaver, "greedy:1", Kind::AND},
                               std::tuple{PolicyKind::MaxExploit, "or-lb1", Kind::OR},
                               std::tuple{PolicyKind::FormDiverseTeams, "xor-cycle", Kind::XOR}}) {
    auto a = trace_json(run_game(pk, adv, 12, 4, kind).trace).dump();
    auto b = trace_json(run_game(pk, adv, 12, 4, kind).trace).dump();
    CHECK(a == b);
  }
  auto j = trace_json(run_game(PolicyKind::FormUniformTeams, "eq-bipartite", 10, 4, Kind::EQ).trace);
  CHECK(j["meta"]["synergy"] == "eq");
  CHECK(j["meta"]["policy"] == "uniform");
  CHECK(j["totals"]["regret"] == 8);
  CHECK(j["rounds"].size() == j["totals"]["rounds_to_lock"].get<size_t>());
  CHECK(j["witness"].size() == 10);
}

TEST_CASE("sweeps") {
  auto even_k = [](int n) {
    std::vector<int> ks;
    for (int k = 2; k <= n; k += 2) ks.push_back(k);
    return ks;
  };
  std::vector<int> ns;
  for (int n = 6; n <= 20; n += 2) ns.push_back(n);

  SUBCASE("AND rows sit inside the bounds") {
    auto rows = sweep(PolicyKind::RingWeaver, "and-greedy", ns, even_k, Kind::AND, 2);
    size_t cells = 0;
    for (int n : ns) cells += n / 2;
    CHECK(rows.size() == cells);
    for (auto& r : rows) {
      INFO("n=" << r.n << " k=" << r.k);
      CHECK(r.error.empty());
      CHECK(r.regret >= r.n - r.k);
      CHECK(r.regret <= u_and(r.n, r.k));
      CHECK(r.violations.empty());
    }
  }
  SUBCASE("OR rows against LB2") {
    auto half = [](int n) {
      std::vector<int> ks;
      for (int k = 0; 2 * k <= n; ++k) ks.push_back(k);
      return ks;
    };
    for (auto& r : sweep(PolicyKind::MaxExploit, "or-lb2", ns, half, Kind::OR, 2)) {
      INFO("n=" << r.n << " k=" << r.k);
      CHECK(r.error.empty());
      CHECK(r.regret >= r.k / 2);
    }
  }
  SUBCASE("EQ rows against the exact adversary") {
    auto all = [](int n) {
      std::vector<int> ks(n + 1);
      std::iota(ks.begin(), ks.end(), 0);
      return ks;
    };
    for (auto& r : sweep(PolicyKind::FormUniformTeams, "greedy:inf", {2, 4, 6, 8}, all, Kind::EQ, 2)) {
      INFO("n=" << r.n << " k=" << r.k);
      CHECK(r.regret == regret_eq(r.n, r.k));
    }
  }
  SUBCASE("thread count does not change rows, failed cells stay in the table") {
    auto one = sweep(PolicyKind::MaxExploit, "or-best", {10, 12, 40}, [](int n) { return std::vector<int>{n / 4, n / 2}; },
                     Kind::OR, 1);
    auto four = sweep(PolicyKind::MaxExploit, "or-best", {10, 12, 40}, [](int n) { return std::vector<int>{n / 4, n / 2}; },
                      Kind::OR, 4);
    std::ostringstream a, b;
    write_csv(a, one);
    write_csv(b, four);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind(std::string(kCsvHeader) + "\n", 0) == 0);

    auto rows = sweep(PolicyKind::FormUniformTeams, "greedy:0", {4, 40}, [](int n) { return std::vector<int>{n / 2}; },
                      Kind::EQ, 2);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].error.empty());
    CHECK(!rows[1].error.empty());
    CHECK(csv_line(rows[1]).find("error") != std::string::npos);
  }
}

TEST_CASE("csv formatting") {
  SweepRow r;
  r.n = 10;
  r.k = 4;
  r.alpha = 0.6;
  r.kind = Kind::AND;
  r.policy = "ring";
  r.adversary = "and-greedy";
  r.regret = 6;
  r.lower = 6;
  r.upper = 7;
  r.rounds_to_lock = 5;
  CHECK(csv_line(r) == "10,4,0.6,and,ring,and-greedy,6,6,7,5");
}

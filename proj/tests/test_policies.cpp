#include "doctest.h"

#include <random>

#include "synergy/arena.hpp"

using namespace syn;

namespace {

// Each edge of K_n exactly once over n-1 perfect matchings.
bool is_one_factorization(int n, const std::vector<Matching>& f) {
  if (static_cast<int>(f.size()) != n - 1) return false;
  std::vector<int> seen(n * n, 0);
  for (auto& m : f) {
    if (!m.is_perfect(n)) return false;
    for (auto [a, b] : m.pairs)
      if (seen[a * n + b]++) return false;
  }
  return true;
}

bool covers_kn(int n, const std::vector<Matching>& f) {
  std::vector<int> seen(n * n, 0);
  for (auto& m : f) {
    if (!m.is_perfect(n)) return false;
    for (auto [a, b] : m.pairs) seen[a * n + b] = 1;
  }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (!seen[a * n + b]) return false;
  return true;
}

// Plays fixed outcomes through a policy: outcomes come from a hidden labeling.
std::vector<Matching> drive(Policy& p, int n, Kind kind, const TypeVector& t, int rounds) {
  ExplorationGraph g(n);
  std::vector<Matching> out;
  for (int r = 0; r < rounds; ++r) {
    auto m = p.next_matching(make_view(g, kind));
    REQUIRE(m.is_perfect(n));
    g.record(m, outcomes(m, t, Synergy::boolean(kind)));
    out.push_back(m);
  }
  return out;
}

}  // namespace

TEST_CASE("ring factorization is a 1-factorization with the phase layout") {
  CHECK(ring_factorization(4).size() == 3);
  CHECK(ring_factorization(10).size() == 9);
  CHECK(ring_factorization(12).size() == 11);
  for (int n = 2; n <= 64; n += 2) {
    INFO("n=" << n);
    CHECK(is_one_factorization(n, ring_factorization(n)));
    int m = n / 2;
    for (auto& r : ring_schedule(n)) {
      for (auto [a, b] : r.m.pairs) {
        int d = ((a / 2 - b / 2) % m + m) % m;
        CHECK(std::min(d, m - d) == r.phase);
      }
    }
  }
  auto s = ring_schedule(12);
  std::vector<int> per_phase(4, 0);
  for (auto& r : s) per_phase[r.phase]++;
  CHECK(per_phase == std::vector<int>{1, 4, 4, 2});
  CHECK_THROWS(ring_factorization(7));
}

TEST_CASE("baseline factorizations") {
  CHECK(naive_factorization(6).size() == 5);
  for (int n = 2; n <= 40; n += 2) {
    INFO("n=" << n);
    CHECK(is_one_factorization(n, naive_factorization(n)));
    CHECK(covers_kn(n, clique_first_factorization(n)));
  }
  CHECK_THROWS(naive_factorization(5));
  CHECK_THROWS(clique_first_factorization(9));
}

TEST_CASE("FormUniformTeams swaps failed teams in pairs") {
  // Round 1 is (0,1),(2,3),(4,5),(6,7); types 0,1 | 0,1 | 1,1 | 0,0 under EQ.
  FormUniformTeams p;
  auto ms = drive(p, 8, Kind::EQ, TypeVector::from_string("01011100"), 2);
  CHECK(ms[0] == lexicographic_matching(8));
  CHECK(ms[1].contains(0, 2));
  CHECK(ms[1].contains(1, 3));
  CHECK(ms[1].contains(4, 5));
  CHECK(ms[1].contains(6, 7));
}

TEST_CASE("FormDiverseTeams builds one cycle over failed teams") {
  // XOR failures: (0,1),(2,3),(4,5) same-typed; (6,7) mixed.
  FormDiverseTeams p;
  auto ms = drive(p, 8, Kind::XOR, TypeVector::from_string("00111101"), 2);
  CHECK(ms[1].contains(6, 7));
  CHECK(ms[1].contains(5, 0));  // (x_l, x_1)
  CHECK(ms[1].contains(1, 2));
  CHECK(ms[1].contains(3, 4));
}

TEST_CASE("RingWeaver round 1 pairs the ring columns") {
  RingWeaver p;
  auto ms = drive(p, 10, Kind::AND, TypeVector::from_string("0000000000"), 1);
  std::vector<Pair> want;
  for (int c = 0; c < 5; ++c) want.push_back({ring_u(c), ring_v(c)});
  CHECK(ms[0] == Matching(want));
}

TEST_CASE("RingWeaver repair removal counts") {
  SUBCASE("phase 0 discovery removes the column") {
    RingWeaver p;
    // ones at u_2 = 4 and v_2 = 5
    drive(p, 10, Kind::AND, TypeVector::from_string("0000110000"), 2);
    REQUIRE(!p.repairs().empty());
    auto& r = p.repairs().front();
    CHECK(r.case_label == "1");
    CHECK(r.z == 0);
    CHECK(r.w == 2);
    CHECK(r.x == 0);
  }
  SUBCASE("round-4 discovery in phase 1") {
    // ones at u_3 = 6 and u_4 = 8; meet in phase 1 round 4 (U(3),U(4) with odd t = 3).
    RingWeaver p;
    auto t = TypeVector::from_string("0000001010");
    auto sched = ring_schedule(10);
    int meet = -1;
    for (size_t i = 0; i < sched.size(); ++i)
      if (sched[i].m.contains(6, 8)) meet = static_cast<int>(i);
    REQUIRE(meet == 4);
    drive(p, 10, Kind::AND, t, meet + 2);
    REQUIRE(!p.repairs().empty());
    auto& r = p.repairs().front();
    CHECK(r.case_label == "2");
    CHECK(r.z == 4);
    CHECK(r.w == 2);
    CHECK(r.removed.size() == 6);
  }
}

TEST_CASE("policies produce perfect matchings and ignore K") {
  // Identical observations under different K must give identical matchings.
  std::mt19937 rng(7);
  for (auto pk : {PolicyKind::FormUniformTeams, PolicyKind::FormDiverseTeams, PolicyKind::MaxExploit,
                  PolicyKind::RingWeaver, PolicyKind::NaiveFactorization, PolicyKind::CliqueFirstFactorization}) {
    Kind kind = pk == PolicyKind::FormUniformTeams ? Kind::EQ
                : pk == PolicyKind::FormDiverseTeams ? Kind::XOR
                : pk == PolicyKind::MaxExploit ? Kind::OR
                                               : Kind::AND;
    for (int trial = 0; trial < 20; ++trial) {
      int n = 2 * (2 + trial % 8);
      std::vector<uint8_t> ty(n);
      for (auto& x : ty) x = rng() % 2;
      TypeVector t(ty);
      auto a = make_policy(pk, n), b = make_policy(pk, n);
      ExplorationGraph g(n);
      for (int r = 0; r < n; ++r) {
        auto ma = a->next_matching(make_view(g, kind));
        auto mb = b->next_matching(make_view(g, kind));
        INFO(policy_name(pk) << " n=" << n << " round " << r + 1);
        REQUIRE(ma.is_perfect(n));
        CHECK(ma == mb);
        g.record(ma, outcomes(ma, t, Synergy::boolean(kind)));
      }
    }
  }
}

TEST_CASE("K-agnostic under adversaries with different K") {
  // Same first-round outcomes, consistent with both K=2 and K=4 on n=8.
  for (auto pk : {PolicyKind::FormUniformTeams, PolicyKind::RingWeaver, PolicyKind::NaiveFactorization}) {
    auto a = make_policy(pk, 8), b = make_policy(pk, 8);
    Kind kind = pk == PolicyKind::FormUniformTeams ? Kind::EQ : Kind::AND;
    auto ka = make_knowledge(8, 2, kind), kb = make_knowledge(8, 4, kind);
    auto ma = a->next_matching(make_view(ka.graph, kind));
    auto mb = b->next_matching(make_view(kb.graph, kind));
    CHECK(ma == mb);
    OutcomeVector o = kind == Kind::EQ ? OutcomeVector{0, 0, 1, 1} : OutcomeVector{0, 0, 0, 0};
    ka = observe(ka, ma, o);
    kb = observe(kb, mb, o);
    CHECK(a->next_matching(make_view(ka.graph, kind)) == b->next_matching(make_view(kb.graph, kind)));
  }
}

TEST_CASE("policies reject the wrong synergy") {
  ExplorationGraph g(6);
  MaxExploit me;
  CHECK_THROWS(me.next_matching(make_view(g, Kind::AND)));
  RingWeaver rw;
  CHECK_THROWS(rw.next_matching(make_view(g, Kind::OR)));
}

TEST_CASE("MaxExploit delta recurrence on fixed labelings") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    int n = 2 * (3 + trial % 14);
    int k = static_cast<int>(rng() % (n + 1));
    std::vector<uint8_t> ty(n, 0);
    for (int i = 0; i < k; ++i) ty[i] = 1;
    std::shuffle(ty.begin(), ty.end(), rng);
    MaxExploit p;
    ExplorationGraph g(n);
    long long prev = 0;
    for (int r = 0; r < n; ++r) {
      auto m = p.next_matching(make_view(g, Kind::OR));
      if (r >= 1) {
        auto d = p.diagnostics();
        INFO("n=" << n << " k=" << k << " round " << r);
        if (r == 1) CHECK(d["delta"] == d["d"]);
        if (r >= 2 && d["loop"]) {
          CHECK(d["delta"] <= prev);
          if (d["zero_pairs_with_unknown"] == 0) CHECK(d["delta"] == 2 * d["e"]);
        }
        prev = d["delta"];
      }
      g.record(m, outcomes(m, TypeVector(ty), Synergy::boolean(Kind::OR)));
    }
  }
}

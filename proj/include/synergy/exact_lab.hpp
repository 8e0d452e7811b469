#pragma once

// Exact minimax solver for small games and the (10,4) AND round-3 pipeline.

#include <algorithm>
#include <array>
#include <bit>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "synergy/core.hpp"
#include "synergy/graph.hpp"

namespace syn {

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr long long kDefaultNodeBudget = 100000000;

// All perfect matchings of K_n, pairs sorted.
inline std::vector<Matching> all_perfect_matchings(int n) {
  check_even(n);
  std::vector<Matching> out;
  std::vector<Pair> cur;
  std::vector<char> used(n, 0);
  std::function<void()> rec = [&] {
    int a = 0;
    while (a < n && used[a]) ++a;
    if (a == n) {
      out.push_back(Matching(cur));
      return;
    }
    used[a] = 1;
    for (int b = a + 1; b < n; ++b) {
      if (used[b]) continue;
      used[b] = 1;
      cur.push_back({a, b});
      rec();
      cur.pop_back();
      used[b] = 0;
    }
    used[a] = 0;
  };
  rec();
  return out;
}

// Knowledge of a game position: the labeled exploration graph (label = outcome class + 1) and the
// labelings still consistent with it.
struct GameState {
  int n = 0, k = 0;
  LabeledGraph graph;
  std::vector<uint64_t> viable;
  std::string key;
};

struct GameValue {
  Rational value = 0;
  Matching first_move;
  long long nodes = 0;
};

namespace detail {

inline std::vector<uint64_t> popcount_masks(int n, int k) {
  std::vector<uint64_t> out;
  for (uint64_t m = 0; m < (uint64_t{1} << n); ++m)
    if (std::popcount(m) == k) out.push_back(m);
  return out;
}

class Solver {
 public:
  Solver(int n, int k, const Synergy& f, long long budget, bool memo)
      : n_(n), k_(k), f_(f), budget_(budget), memo_on_(memo), matchings_(all_perfect_matchings(n)) {
    if (n > 12) throw std::invalid_argument("exact solver limited to n <= 12");
    check_nk(n, k);
    opt_ = optimal_score(n, k, f);
    std::vector<Rational> vals{f.v00, f.v01, f.v11};
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    values_ = vals;
    for (int s = 0; s < 3; ++s) {
      Rational v = s == 0 ? f.v00 : s == 1 ? f.v01 : f.v11;
      cls_[s] = static_cast<int>(std::find(vals.begin(), vals.end(), v) - vals.begin());
    }
  }

  GameState root() const {
    GameState s;
    s.n = n_;
    s.k = k_;
    s.graph = LabeledGraph(n_);
    s.viable = popcount_masks(n_, k_);
    s.key = key_of(s.graph);
    return s;
  }

  int outcome_class(uint64_t mask, Pair p) const { return cls_[(mask >> p.first & 1) + (mask >> p.second & 1)]; }

  // Play m and keep the labelings that produce class vector `cls`.
  GameState child(const GameState& s, const Matching& m, const std::vector<int>& cls) const {
    GameState c;
    c.n = s.n;
    c.k = s.k;
    c.graph = s.graph;
    for (size_t i = 0; i < m.size(); ++i) c.graph.set(m.pairs[i].first, m.pairs[i].second, static_cast<uint8_t>(cls[i] + 1));
    for (auto mask : s.viable) {
      bool ok = true;
      for (size_t i = 0; i < m.size() && ok; ++i) ok = outcome_class(mask, m.pairs[i]) == cls[i];
      if (ok) c.viable.push_back(mask);
    }
    c.key = key_of(c.graph);
    return c;
  }

  struct Branch {
    std::vector<int> cls;
    Rational regret;
  };

  // Outcome classes of m over the viable set, largest regret first.
  std::vector<Branch> branches(const GameState& s, const Matching& m) const {
    std::map<std::vector<int>, Rational> seen;
    for (auto mask : s.viable) {
      std::vector<int> cls(m.size());
      Rational score = 0;
      for (size_t i = 0; i < m.size(); ++i) {
        cls[i] = outcome_class(mask, m.pairs[i]);
        score += values_[cls[i]];
      }
      seen.emplace(std::move(cls), opt_ - score);
    }
    std::vector<Branch> out;
    for (auto& [c, r] : seen) out.push_back({c, r});
    std::stable_sort(out.begin(), out.end(), [](const Branch& a, const Branch& b) { return a.regret > b.regret; });
    return out;
  }

  bool terminal(const GameState& s) const {
    for (auto& m : matchings_) {
      bool ok = true;
      for (auto mask : s.viable) {
        Rational score = 0;
        for (auto p : m.pairs) score += values_[outcome_class(mask, p)];
        if (score != opt_) { ok = false; break; }
      }
      if (ok) return true;
    }
    return false;
  }

  // One representative per orbit of matchings under the automorphisms of the labeled graph.
  std::vector<const Matching*> moves(const GameState& s) const {
    std::set<std::string> seen;
    std::vector<const Matching*> out;
    for (auto& m : matchings_) {
      LabeledGraph h = s.graph;
      for (auto [a, b] : m.pairs) h.set(a, b, static_cast<uint8_t>(h.get(a, b) + 8));
      if (seen.insert(canonical_form(h)).second) out.push_back(&m);
    }
    return out;
  }

  Rational value(const GameState& s, Matching* best_move = nullptr) {
    if (memo_on_ && !best_move) {
      auto it = memo_.find(s.key);
      if (it != memo_.end()) return it->second;
    }
    if (++nodes_ > budget_) throw BudgetExceeded("node budget exhausted after " + std::to_string(budget_) + " nodes");
    Rational result = 0;
    if (!terminal(s)) {
      struct Cand {
        const Matching* m;
        std::vector<Branch> br;
      };
      std::vector<Cand> cands;
      for (auto* m : moves(s)) {
        auto br = branches(s, *m);
        if (br.size() > 1) cands.push_back({m, std::move(br)});
      }
      if (cands.empty()) throw std::logic_error("non-terminal state with no informative matching");
      // Cheapest immediate worst case first.
      std::stable_sort(cands.begin(), cands.end(),
                       [](const Cand& a, const Cand& b) { return a.br[0].regret < b.br[0].regret; });
      bool have = false;
      Rational best = 0;
      for (auto& c : cands) {
        if (have && c.br[0].regret >= best) break;
        Rational cur = 0;
        bool cut = false;
        for (auto& b : c.br) {
          Rational v = b.regret + value(child(s, *c.m, b.cls));
          if (v > cur) cur = v;
          if (have && cur >= best) { cut = true; break; }
        }
        if (!cut && (!have || cur < best)) {
          best = cur;
          have = true;
          if (best_move) *best_move = *c.m;
        }
      }
      result = best;
    }
    if (memo_on_) memo_[s.key] = result;
    return result;
  }

  // True iff the minimizer cannot keep the remaining regret below t.
  bool at_least(const GameState& s, const Rational& t) {
    if (t <= 0) return true;
    auto key = s.key + "|" + std::to_string(t.numerator()) + "/" + std::to_string(t.denominator());
    auto it = at_memo_.find(key);
    if (it != at_memo_.end()) return it->second;
    if (++nodes_ > budget_) throw BudgetExceeded("node budget exhausted after " + std::to_string(budget_) + " nodes");
    bool res = !terminal(s);
    if (res)
      for (auto* m : moves(s)) {
        auto br = branches(s, *m);
        if (br.size() == 1) continue;  // the same position again, never useful to the minimizer
        bool forced = false;
        for (auto& b : br)
          if (b.regret >= t || at_least(child(s, *m, b.cls), t - b.regret)) {
            forced = true;
            break;
          }
        if (!forced) {
          res = false;
          break;
        }
      }
    at_memo_[key] = res;
    return res;
  }

  std::string key_of(const LabeledGraph& g) const { return canonical_form(g) + static_cast<char>(k_); }
  long long nodes() const { return nodes_; }

 private:
  int n_, k_;
  Synergy f_;
  long long budget_;
  bool memo_on_;
  std::vector<Matching> matchings_;
  Rational opt_;
  std::vector<Rational> values_;
  int cls_[3] = {0, 0, 0};
  long long nodes_ = 0;
  std::unordered_map<std::string, Rational> memo_;
  std::unordered_map<std::string, bool> at_memo_;
};

}  // namespace detail

inline GameValue minimax_regret(int n, int k, const Synergy& f, long long budget = kDefaultNodeBudget, bool memo = true) {
  detail::Solver s(n, k, f, budget, memo);
  GameValue g;
  g.value = s.value(s.root(), &g.first_move);
  g.nodes = s.nodes();
  return g;
}

inline GameValue minimax_regret(int n, int k, Kind kind, long long budget = kDefaultNodeBudget, bool memo = true) {
  return minimax_regret(n, k, Synergy::boolean(kind), budget, memo);
}

struct ReductionCheck {
  bool holds = false;
  Rational general_value, boolean_value, scale;
  Kind boolean_kind = Kind::EQ;
  int boolean_k = 0;
};

// Solve f and its Boolean reduction, and compare r^f against scale * r^g.
inline ReductionCheck reduction_check(int n, int k, const Synergy& f, long long budget = kDefaultNodeBudget) {
  if (n > 6) throw std::invalid_argument("verify_reduction takes n <= 6");
  auto r = reduce_synergy(f);
  ReductionCheck c;
  c.boolean_kind = r.boolean_kind();
  c.boolean_k = r.labels_swapped ? n - k : k;
  c.scale = r.scale;
  Synergy general = Synergy::general(f.v00, f.v01, f.v11);
  c.general_value = minimax_regret(n, k, general, budget).value;
  c.boolean_value = minimax_regret(n, c.boolean_k, c.boolean_kind, budget).value;
  c.holds = c.general_value == c.scale * c.boolean_value;
  return c;
}

inline bool verify_reduction(int n, int k, const Synergy& f) { return reduction_check(n, k, f).holds; }

// ---- round-3 exploration graphs ----

inline LabeledGraph union_graph(int n, const std::vector<Matching>& ms) {
  LabeledGraph g(n);
  for (auto& m : ms)
    for (auto [a, b] : m.pairs) g.set(a, b, 1);
  return g;
}

// Non-isomorphic unions of three perfect matchings (repeated edges allowed), in key order.
inline std::vector<LabeledGraph> enumerate_round3_graphs(int n = 10) {
  auto all = all_perfect_matchings(n);
  std::map<std::string, LabeledGraph> stage{{canonical_form(union_graph(n, {all[0]})), union_graph(n, {all[0]})}};
  for (int round = 2; round <= 3; ++round) {
    std::map<std::string, LabeledGraph> next;
    for (auto& [key, g] : stage)
      for (auto& m : all) {
        LabeledGraph h = g;
        for (auto [a, b] : m.pairs) h.set(a, b, 1);
        next.emplace(canonical_form(h), h);
      }
    stage.swap(next);
  }
  std::vector<LabeledGraph> out;
  for (auto& [key, g] : stage) out.push_back(g);
  return out;
}

inline std::vector<uint32_t> independent_sets_of_size(const LabeledGraph& g, int size) {
  std::vector<uint32_t> out;
  for (uint32_t s = 0; s < (1u << g.n); ++s) {
    if (std::popcount(s) != size) continue;
    bool ok = true;
    for (int a = 0; a < g.n && ok; ++a)
      if (s >> a & 1)
        for (int b = a + 1; b < g.n; ++b)
          if ((s >> b & 1) && g.get(a, b)) { ok = false; break; }
    if (ok) out.push_back(s);
  }
  return out;
}

struct IndepPair {
  std::vector<int> first, second;
};
struct HardCase {};
using Classification = std::variant<IndepPair, HardCase>;

inline std::vector<int> mask_vertices(uint32_t s) {
  std::vector<int> v;
  for (int i = 0; s; ++i, s >>= 1)
    if (s & 1) v.push_back(i);
  return v;
}

// Two independent 4-sets with an odd union, if any.
inline Classification classify_104(const LabeledGraph& g) {
  auto sets = independent_sets_of_size(g, 4);
  for (size_t i = 0; i < sets.size(); ++i)
    for (size_t j = i; j < sets.size(); ++j)
      if (std::popcount(sets[i] | sets[j]) % 2 == 1) return IndepPair{mask_vertices(sets[i]), mask_vertices(sets[j])};
  return HardCase{};
}

// Ordered triples of perfect matchings whose union is exactly g.
inline std::vector<std::array<Matching, 3>> matching_decompositions(const LabeledGraph& g, size_t cap = 1u << 22) {
  std::vector<Matching> inside;
  for (auto& m : all_perfect_matchings(g.n)) {
    bool ok = true;
    for (auto [a, b] : m.pairs) ok = ok && g.get(a, b);
    if (ok) inside.push_back(m);
  }
  int edges = g.edge_count();
  std::vector<std::array<Matching, 3>> out;
  for (auto& a : inside)
    for (auto& b : inside)
      for (auto& c : inside)
        if (union_graph(g.n, {a, b, c}).edge_count() == edges) {
          if (out.size() >= cap) throw BudgetExceeded("decomposition enumeration exceeds budget");
          out.push_back({a, b, c});
        }
  return out;
}

// Orbits of edges under the automorphism group of g, each orbit sorted.
inline std::vector<std::vector<Pair>> edge_orbits(const LabeledGraph& g) {
  auto autos = automorphism_group(g);
  std::set<Pair> done;
  std::vector<std::vector<Pair>> out;
  for (auto e : g.edges()) {
    if (done.count(e)) continue;
    std::set<Pair> orb;
    for (auto& p : autos) orb.insert({std::min(p[e.first], p[e.second]), std::max(p[e.first], p[e.second])});
    done.insert(orb.begin(), orb.end());
    out.push_back({orb.begin(), orb.end()});
  }
  return out;
}

struct BlueEdgeReport {
  bool holds = false;
  std::vector<Pair> orbit;  // designated edges
  size_t decompositions = 0;
  std::string failure;
};

namespace detail {

inline bool hits(const Matching& m, const std::vector<Pair>& edges) {
  for (auto& e : edges)
    if (m.contains(e.first, e.second)) return true;
  return false;
}

}  // namespace detail

// Checks both claims for a hard case against the designated edge set: every matching of every
// decomposition contains a designated edge, and revealing that edge as the only success of round 3
// leaves the algorithm at least 2 more regret after rounds 1-2 failed (2 + 2 + 1 + 2 = 7).
inline BlueEdgeReport verify_hardcase_blue_edges(const LabeledGraph& g, const std::vector<Pair>& designated,
                                                 long long budget = kDefaultNodeBudget) {
  BlueEdgeReport rep;
  rep.orbit = designated;
  auto decs = matching_decompositions(g);
  rep.decompositions = decs.size();
  for (auto& d : decs)
    for (auto& m : d)
      if (!detail::hits(m, designated)) {
        rep.failure = "a decomposition matching avoids the designated edges";
        return rep;
      }
  const int n = g.n, k = 4;
  detail::Solver s(n, k, Synergy::boolean(Kind::AND), budget, true);
  for (auto& d : decs)
    for (int last = 0; last < 3; ++last) {
      GameState st = s.root();
      for (int r = 0; r < 3; ++r)
        if (r != last) st = s.child(st, d[r], std::vector<int>(n / 2, 0));
      const Matching& m3 = d[last];
      bool forced = false;
      for (size_t i = 0; i < m3.size() && !forced; ++i) {
        if (std::find(designated.begin(), designated.end(), m3.pairs[i]) == designated.end()) continue;
        std::vector<int> cls(n / 2, 0);
        cls[i] = 1;
        GameState c = s.child(st, m3, cls);
        forced = !c.viable.empty() && s.at_least(c, 2);
      }
      if (!forced) {
        rep.failure = "revealing a designated edge does not force two more regret";
        return rep;
      }
    }
  rep.holds = true;
  return rep;
}

// Recomputes the designated edges: the union of edge orbits with fewest edges that passes both checks.
inline BlueEdgeReport verify_hardcase_blue_edges(const LabeledGraph& g, long long budget = kDefaultNodeBudget) {
  auto decs = matching_decompositions(g);
  auto orbits = edge_orbits(g);
  BlueEdgeReport last;
  last.decompositions = decs.size();
  last.failure = "no union of edge orbits meets every matching";
  if (orbits.size() > 20) throw BudgetExceeded("too many edge orbits");
  std::vector<uint32_t> subsets(uint32_t{1} << orbits.size());
  std::iota(subsets.begin(), subsets.end(), 0u);
  auto weight = [&](uint32_t sub) {
    size_t w = 0;
    for (size_t i = 0; i < orbits.size(); ++i)
      if (sub >> i & 1) w += orbits[i].size();
    return w;
  };
  std::stable_sort(subsets.begin(), subsets.end(), [&](uint32_t a, uint32_t b) { return weight(a) < weight(b); });
  for (uint32_t sub : subsets) {
    if (!sub) continue;
    std::vector<Pair> edges;
    for (size_t i = 0; i < orbits.size(); ++i)
      if (sub >> i & 1) edges.insert(edges.end(), orbits[i].begin(), orbits[i].end());
    std::sort(edges.begin(), edges.end());
    bool all = true;
    for (auto& d : decs)
      for (auto& m : d) all = all && detail::hits(m, edges);
    if (!all) continue;
    auto rep = verify_hardcase_blue_edges(g, edges, budget);
    if (rep.holds) return rep;
    last = rep;
  }
  return last;
}

struct Certificate104 {
  size_t graphs = 0, indep_pair = 0, hard = 0, hard_verified = 0, all_fail_unlocked = 0;
  bool holds = false;
};

// Regret >= 7 for (10,4) AND: rounds 1-2 fail (regret 4); each round-3 graph either allows a third
// failed round with no lock yet (regret >= 7) or is a hard case settled by the blue-edge check.
inline Certificate104 certify_104(long long budget = kDefaultNodeBudget) {
  Certificate104 c;
  auto graphs = enumerate_round3_graphs(10);
  c.graphs = graphs.size();
  detail::Solver s(10, 4, Synergy::boolean(Kind::AND), budget, true);
  for (auto& g : graphs) {
    if (std::holds_alternative<IndepPair>(classify_104(g))) {
      ++c.indep_pair;
      GameState st = s.root();
      st.graph = g;
      for (auto& e : g.edges()) st.graph.set(e.first, e.second, 1);  // label 1 = class 0 = failure
      std::vector<uint64_t> keep;
      for (auto m : st.viable) {
        bool ok = true;
        for (auto e : g.edges()) ok = ok && !((m >> e.first & 1) && (m >> e.second & 1));
        if (ok) keep.push_back(m);
      }
      st.viable = keep;
      st.key = s.key_of(st.graph);
      if (!st.viable.empty() && s.at_least(st, 1)) ++c.all_fail_unlocked;
    } else {
      ++c.hard;
      if (verify_hardcase_blue_edges(g, budget).holds) ++c.hard_verified;
    }
  }
  c.holds = c.hard == c.hard_verified && c.indep_pair == c.all_fail_unlocked;
  return c;
}

}  // namespace syn

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/max_cardinality_matching.hpp>

#include "synergy/core.hpp"
#include "synergy/graph.hpp"

namespace syn {

enum class Known : uint8_t { Zero, One, Unknown };

struct LabeledEdge {
  int u, v, label;
};

// Outcome-labeled exploration graph. Labels are fixed the first time an edge is played.
class ExplorationGraph {
 public:
  ExplorationGraph() = default;
  explicit ExplorationGraph(int n) : n_(n), label_(size_t(n) * n, -1), round_(size_t(n) * n, 0) {}

  int n() const { return n_; }
  int label(int u, int v) const { return label_[idx(u, v)]; }
  bool played(int u, int v) const { return label_[idx(u, v)] >= 0; }
  int first_round(int u, int v) const { return round_[idx(u, v)]; }
  int num_rounds() const { return static_cast<int>(rounds_.size()); }
  const std::vector<Matching>& rounds() const { return rounds_; }
  const std::vector<OutcomeVector>& outcomes() const { return outcomes_; }

  // Throws when a replayed edge would change label; the graph is untouched then.
  std::vector<LabeledEdge> record(const Matching& m, const OutcomeVector& o) {
    m.validate(n_);
    if (o.size() != m.size()) throw std::invalid_argument("outcome length mismatch");
    for (size_t i = 0; i < m.size(); ++i) {
      auto [a, b] = m.pairs[i];
      if (o[i] != 0 && o[i] != 1) throw std::invalid_argument("outcomes must be 0/1");
      int l = label(a, b);
      if (l >= 0 && l != o[i])
        throw std::runtime_error("edge (" + std::to_string(a) + "," + std::to_string(b) + ") relabeled from " +
                                 std::to_string(l) + " to " + std::to_string(o[i]) + "; first played in round " +
                                 std::to_string(first_round(a, b)));
    }
    rounds_.push_back(m);
    outcomes_.push_back(o);
    std::vector<LabeledEdge> fresh;
    for (size_t i = 0; i < m.size(); ++i) {
      auto [a, b] = m.pairs[i];
      if (played(a, b)) continue;
      label_[idx(a, b)] = label_[idx(b, a)] = static_cast<int8_t>(o[i]);
      round_[idx(a, b)] = round_[idx(b, a)] = static_cast<int16_t>(rounds_.size());
      fresh.push_back({a, b, o[i]});
    }
    return fresh;
  }

  // (u, v, label, first round) with u < v, ordered by round then pair.
  std::vector<std::tuple<int, int, int, int>> edge_list() const {
    std::vector<std::tuple<int, int, int, int>> out;
    for (int u = 0; u < n_; ++u)
      for (int v = u + 1; v < n_; ++v)
        if (played(u, v)) out.emplace_back(u, v, label(u, v), first_round(u, v));
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& x, const auto& y) { return std::get<3>(x) < std::get<3>(y); });
    return out;
  }

  std::vector<LabeledEdge> labeled_edges() const {
    std::vector<LabeledEdge> out;
    for (auto& [u, v, l, r] : edge_list()) out.push_back({u, v, l});
    return out;
  }

  size_t edge_count() const {
    size_t c = 0;
    for (auto l : label_) c += l >= 0;
    return c / 2;
  }

  void dump(std::ostream& os) const {
    for (auto& [u, v, l, r] : edge_list()) os << u << ' ' << v << ' ' << l << ' ' << r << '\n';
  }

 private:
  size_t idx(int u, int v) const { return size_t(u) * n_ + v; }
  int n_ = 0;
  std::vector<int8_t> label_;
  std::vector<int16_t> round_;
  std::vector<Matching> rounds_;
  std::vector<OutcomeVector> outcomes_;
};

using Partial = std::vector<std::pair<int, int>>;  // (agent, forced type)

inline bool edge_consistent(Kind kind, int a, int b, int label) {
  return Synergy::boolean(kind).bit(a, b) == label;
}

// ---- structural viability ----
//
// OR and AND are "monotone": one type (the rare value r) is pinned by a single failing
// (OR) or succeeding (AND) edge, and every other labeled edge says "not both r".
// EQ and XOR are parity constraints.

class ViabilityOracle {
 public:
  ViabilityOracle(const ExplorationGraph& g, Kind kind, int k, const std::vector<LabeledEdge>& extra = {},
                  const Partial& base = {})
      : n_(g.n()), k_(k), kind_(kind) {
    if (kind == Kind::GENERAL) throw std::invalid_argument("viability is defined for Boolean kinds");
    auto edges = g.labeled_edges();
    edges.insert(edges.end(), extra.begin(), extra.end());
    if (kind == Kind::OR || kind == Kind::AND)
      build_monotone(edges, base);
    else
      build_parity(edges, base);
  }

  bool feasible(const Partial& p = {}) const { return kind_ == Kind::OR || kind_ == Kind::AND ? mono_feasible(p) : par_feasible(p); }

  std::optional<TypeVector> witness(const Partial& p = {}) const {
    return kind_ == Kind::OR || kind_ == Kind::AND ? mono_witness(p) : par_witness(p);
  }

  // Exact per-agent forced types.
  std::vector<Known> forced() const {
    std::vector<Known> out(n_, Known::Unknown);
    if (!feasible()) return out;
    for (int v = 0; v < n_; ++v) {
      bool z = feasible({{v, 0}}), o = feasible({{v, 1}});
      if (z && !o) out[v] = Known::Zero;
      if (o && !z) out[v] = Known::One;
    }
    return out;
  }

 private:
  int n_, k_;
  Kind kind_;
  bool bad_ = false;

  // monotone part
  int rare_ = 0, rare_count_ = 0, need_ = 0, total_alpha_ = 0;
  std::vector<int> fixed_;  // -1 free, else type
  Graph nb_{0};
  std::vector<int> comp_of_;
  std::vector<Bits> comps_;
  std::vector<int> comp_alpha_;

  void build_monotone(const std::vector<LabeledEdge>& edges, const Partial& base) {
    rare_ = kind_ == Kind::OR ? 0 : 1;
    int both_rare_label = kind_ == Kind::OR ? 0 : 1;
    rare_count_ = kind_ == Kind::OR ? n_ - k_ : k_;
    fixed_.assign(n_, -1);
    nb_ = Graph(n_);
    auto fix = [&](int v, int t) {
      if (fixed_[v] >= 0 && fixed_[v] != t) bad_ = true;
      fixed_[v] = t;
    };
    for (auto& e : edges) {
      if (e.label == both_rare_label) {
        fix(e.u, rare_);
        fix(e.v, rare_);
      } else {
        nb_.add_edge(e.u, e.v);
      }
    }
    for (auto [v, t] : base) fix(v, t);
    for (int u = 0; u < n_; ++u) {
      if (fixed_[u] != rare_) continue;
      for (auto w = nb_.adj[u].find_first(); w != Bits::npos; w = nb_.adj[u].find_next(w)) {
        if (fixed_[w] == rare_) bad_ = true;
        fixed_[w] = 1 - rare_;
      }
    }
    int fixed_rare = 0;
    Bits free(n_);
    for (int v = 0; v < n_; ++v) {
      if (fixed_[v] == rare_) ++fixed_rare;
      if (fixed_[v] < 0) free.set(v);
    }
    need_ = rare_count_ - fixed_rare;
    comp_of_.assign(n_, -1);
    for (auto& c : components(nb_, free)) {
      Bits b(n_);
      for (int v : c) {
        b.set(v);
        comp_of_[v] = static_cast<int>(comps_.size());
      }
      comps_.push_back(b);
      comp_alpha_.push_back(independence_number(nb_, b));
      total_alpha_ += comp_alpha_.back();
    }
  }

  // Returns false on immediate conflict; fills per-component reduced vertex sets and the new need.
  bool mono_apply(const Partial& p, std::map<int, Bits>& reduced, int& need) const {
    if (bad_) return false;
    need = need_;
    std::map<int, int> want;
    for (auto [v, t] : p) {
      auto it = want.find(v);
      if (it != want.end() && it->second != t) return false;
      want[v] = t;
    }
    std::vector<int> rare_free;
    for (auto [v, t] : want) {
      if (fixed_[v] >= 0) {
        if (fixed_[v] != t) return false;
        continue;
      }
      if (t != rare_) continue;
      for (int u : rare_free)
        if (nb_.has_edge(u, v)) return false;
      rare_free.push_back(v);
      --need;
    }
    for (auto [v, t] : want) {
      if (fixed_[v] >= 0) continue;
      int c = comp_of_[v];
      if (!reduced.count(c)) reduced[c] = comps_[c];
      Bits& b = reduced[c];
      if (t == rare_) b -= nb_.adj[v];
      b.reset(v);
    }
    return true;
  }

  bool mono_feasible(const Partial& p) const {
    std::map<int, Bits> reduced;
    int need;
    if (!mono_apply(p, reduced, need) || need < 0) return false;
    int avail = total_alpha_;
    for (auto& [c, b] : reduced) avail += independence_number(nb_, b) - comp_alpha_[c];
    return need <= avail;
  }

  std::optional<TypeVector> mono_witness(const Partial& p) const {
    std::map<int, Bits> reduced;
    int need;
    if (!mono_apply(p, reduced, need) || need < 0) return std::nullopt;
    std::vector<uint8_t> t(n_, static_cast<uint8_t>(1 - rare_));
    for (int v = 0; v < n_; ++v)
      if (fixed_[v] == rare_) t[v] = static_cast<uint8_t>(rare_);
    for (auto [v, ty] : p)
      if (ty == rare_) t[v] = static_cast<uint8_t>(rare_);
    for (size_t c = 0; c < comps_.size() && need > 0; ++c) {
      Bits b = reduced.count(static_cast<int>(c)) ? reduced.at(static_cast<int>(c)) : comps_[c];
      auto s = maximum_independent_set(nb_, b);
      int take = std::min<int>(need, static_cast<int>(s.size()));
      for (int i = 0; i < take; ++i) t[s[i]] = static_cast<uint8_t>(rare_);
      need -= take;
    }
    if (need > 0) return std::nullopt;
    return TypeVector(t);
  }

  // parity part
  std::vector<int> pcomp_, ppar_;
  std::vector<int> csize_, cones0_, corient_;  // ones when orientation 0; forced orientation or -1
  std::vector<Bits> prefix_;                   // prefix_[c]: reachable one-counts using comps < c

  void build_parity(const std::vector<LabeledEdge>& edges, const Partial& base) {
    std::vector<std::vector<std::pair<int, int>>> adj(n_);
    for (auto& e : edges) {
      int rel = kind_ == Kind::EQ ? (e.label == 1 ? 0 : 1) : (e.label == 1 ? 1 : 0);
      adj[e.u].push_back({e.v, rel});
      adj[e.v].push_back({e.u, rel});
    }
    pcomp_.assign(n_, -1);
    ppar_.assign(n_, 0);
    for (int s = 0; s < n_; ++s) {
      if (pcomp_[s] >= 0) continue;
      int c = static_cast<int>(csize_.size());
      csize_.push_back(0);
      cones0_.push_back(0);
      corient_.push_back(-1);
      std::vector<int> st{s};
      pcomp_[s] = c;
      while (!st.empty()) {
        int v = st.back();
        st.pop_back();
        ++csize_[c];
        cones0_[c] += ppar_[v];
        for (auto [w, rel] : adj[v]) {
          if (pcomp_[w] < 0) {
            pcomp_[w] = c;
            ppar_[w] = ppar_[v] ^ rel;
            st.push_back(w);
          } else if (ppar_[w] != (ppar_[v] ^ rel)) {
            bad_ = true;
          }
        }
      }
    }
    for (auto [v, t] : base) {
      int o = t ^ ppar_[v];
      int& co = corient_[pcomp_[v]];
      if (co >= 0 && co != o) bad_ = true;
      co = o;
    }
    size_t C = csize_.size();
    prefix_.assign(C + 1, Bits(n_ + 1));
    prefix_[0].set(0);
    for (size_t c = 0; c < C; ++c) prefix_[c + 1] = step(prefix_[c], static_cast<int>(c), corient_[c]);
  }

  int comp_ones(int c, int o) const { return o == 0 ? cones0_[c] : csize_[c] - cones0_[c]; }

  Bits step(const Bits& dp, int c, int orient) const {
    Bits out(n_ + 1);
    if (orient != 1) out |= dp << comp_ones(c, 0);
    if (orient != 0) out |= dp << comp_ones(c, 1);
    return out;
  }

  // Orientation overrides for a partial assignment; false on conflict.
  bool par_overrides(const Partial& p, std::map<int, int>& ov) const {
    if (bad_ || k_ < 0 || k_ > n_) return false;
    for (auto [v, t] : p) {
      int c = pcomp_[v], o = t ^ ppar_[v];
      if (corient_[c] >= 0 && corient_[c] != o) return false;
      auto it = ov.find(c);
      if (it != ov.end() && it->second != o) return false;
      ov[c] = o;
    }
    return true;
  }

  bool par_feasible(const Partial& p) const {
    std::map<int, int> ov;
    if (!par_overrides(p, ov)) return false;
    size_t C = csize_.size();
    if (ov.empty()) return prefix_[C].test(k_);
    int first = ov.begin()->first;
    Bits dp = prefix_[first];
    for (size_t c = first; c < C; ++c) {
      auto it = ov.find(static_cast<int>(c));
      dp = step(dp, static_cast<int>(c), it != ov.end() ? it->second : corient_[c]);
    }
    return dp.test(k_);
  }

  std::optional<TypeVector> par_witness(const Partial& p) const {
    std::map<int, int> ov;
    if (!par_overrides(p, ov)) return std::nullopt;
    size_t C = csize_.size();
    std::vector<int> orient(C);
    for (size_t c = 0; c < C; ++c) {
      auto it = ov.find(static_cast<int>(c));
      orient[c] = it != ov.end() ? it->second : corient_[c];
    }
    std::vector<Bits> dp(C + 1, Bits(n_ + 1));
    dp[0].set(0);
    for (size_t c = 0; c < C; ++c) dp[c + 1] = step(dp[c], static_cast<int>(c), orient[c]);
    if (!dp[C].test(k_)) return std::nullopt;
    std::vector<int> chosen(C);
    int rem = k_;
    for (size_t c = C; c-- > 0;) {
      for (int o = 0; o < 2; ++o) {
        if (orient[c] >= 0 && orient[c] != o) continue;
        int w = comp_ones(static_cast<int>(c), o);
        if (rem >= w && dp[c].test(rem - w)) {
          chosen[c] = o;
          rem -= w;
          break;
        }
      }
    }
    std::vector<uint8_t> t(n_);
    for (int v = 0; v < n_; ++v) t[v] = static_cast<uint8_t>(chosen[pcomp_[v]] ^ ppar_[v]);
    return TypeVector(t);
  }
};

// Relative parity classes for EQ/XOR: component id and parity of every agent.
struct ParityClasses {
  std::vector<int> comp, parity;
};

inline ParityClasses parity_classes(const ExplorationGraph& g, Kind kind) {
  int n = g.n();
  ParityClasses pc{std::vector<int>(n, -1), std::vector<int>(n, 0)};
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (auto& e : g.labeled_edges()) {
    int rel = kind == Kind::EQ ? (e.label == 1 ? 0 : 1) : (e.label == 1 ? 1 : 0);
    adj[e.u].push_back({e.v, rel});
    adj[e.v].push_back({e.u, rel});
  }
  int next = 0;
  for (int s = 0; s < n; ++s) {
    if (pc.comp[s] >= 0) continue;
    std::vector<int> st{s};
    pc.comp[s] = next;
    while (!st.empty()) {
      int v = st.back();
      st.pop_back();
      for (auto [w, rel] : adj[v]) {
        if (pc.comp[w] < 0) {
          pc.comp[w] = next;
          pc.parity[w] = pc.parity[v] ^ rel;
          st.push_back(w);
        } else if (pc.parity[w] != (pc.parity[v] ^ rel)) {
          throw std::runtime_error("contradictory parity labels");
        }
      }
    }
    ++next;
  }
  return pc;
}

// ---- rule-based deduction ----

// Fixed point of the local rules. With a count k the global counting rule is applied too
// (and, for EQ/XOR, a component is resolved when the count forces its orientation).
inline std::vector<Known> deduce_rules(const ExplorationGraph& g, Kind kind, std::optional<int> k = std::nullopt) {
  int n = g.n();
  std::vector<Known> known(n, Known::Unknown);
  auto set = [&](int v, int t, std::vector<int>& queue) {
    Known want = t ? Known::One : Known::Zero;
    if (known[v] == want) return;
    if (known[v] != Known::Unknown)
      throw std::runtime_error("contradiction while deducing agent " + std::to_string(v));
    known[v] = want;
    queue.push_back(v);
  };
  std::vector<int> queue;
  auto edges = g.labeled_edges();
  if (kind == Kind::EQ || kind == Kind::XOR) {
    auto pc = parity_classes(g, kind);
    auto spread = [&]() {
      while (!queue.empty()) {
        int v = queue.back();
        queue.pop_back();
        int t = known[v] == Known::One;
        for (int w = 0; w < n; ++w)
          if (pc.comp[w] == pc.comp[v]) set(w, t ^ pc.parity[v] ^ pc.parity[w], queue);
      }
    };
    if (k) {
      ViabilityOracle oracle(g, kind, *k);
      if (!oracle.feasible()) throw std::runtime_error("no viable labeling");
      for (int v = 0; v < n; ++v) {
        bool z = oracle.feasible({{v, 0}}), o = oracle.feasible({{v, 1}});
        if (z != o) set(v, o ? 1 : 0, queue);
      }
      spread();
    }
    return known;
  }
  if (kind == Kind::GENERAL) throw std::invalid_argument("deduction is defined for Boolean kinds");
  int pin_label = kind == Kind::OR ? 0 : 1;  // label that pins both endpoints
  int revealer = kind == Kind::OR ? 0 : 1;   // endpoint type that reveals the partner
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (auto& e : edges) {
    adj[e.u].push_back({e.v, e.label});
    adj[e.v].push_back({e.u, e.label});
    if (e.label == pin_label) {
      set(e.u, pin_label, queue);
      set(e.v, pin_label, queue);
    }
  }
  for (;;) {
    while (!queue.empty()) {
      int v = queue.back();
      queue.pop_back();
      int t = known[v] == Known::One;
      for (auto [w, l] : adj[v]) {
        if (t == revealer) {
          set(w, l, queue);
        } else if (l == pin_label) {
          throw std::runtime_error("contradiction on edge (" + std::to_string(v) + "," + std::to_string(w) + ")");
        }
      }
    }
    if (!k) break;
    int ones = 0, zeros = 0;
    for (auto x : known) {
      ones += x == Known::One;
      zeros += x == Known::Zero;
    }
    if (ones > *k || zeros > n - *k) throw std::runtime_error("counting contradiction");
    int fill = ones == *k ? 0 : zeros == n - *k ? 1 : -1;
    if (fill < 0) break;
    for (int v = 0; v < n; ++v)
      if (known[v] == Known::Unknown) set(v, fill, queue);
    if (queue.empty()) break;
  }
  return known;
}

// ---- knowledge state ----

struct KnowledgeState {
  int n = 0, k = 0;
  Kind kind = Kind::EQ;
  ExplorationGraph graph;
  std::vector<Known> known;
  bool counting = false;             // counting rule in the rule backend
  bool explicit_active = false;
  std::vector<uint64_t> viable;      // popcount-k masks, bit i = type of agent i
};

constexpr long long kDefaultExplicitCap = 200000;

inline void refresh_known(KnowledgeState& ks) {
  if (ks.explicit_active) {
    uint64_t all_and = ~uint64_t{0}, all_or = 0;
    for (auto m : ks.viable) {
      all_and &= m;
      all_or |= m;
    }
    for (int i = 0; i < ks.n; ++i) {
      uint64_t b = uint64_t{1} << i;
      ks.known[i] = (all_and & b) ? Known::One : !(all_or & b) ? Known::Zero : Known::Unknown;
    }
  } else {
    ks.known = deduce_rules(ks.graph, ks.kind, ks.counting ? std::optional<int>(ks.k) : std::nullopt);
  }
}

inline KnowledgeState make_knowledge(int n, int k, Kind kind, long long explicit_cap = kDefaultExplicitCap,
                                     bool counting = false) {
  check_nk(n, k);
  if (kind == Kind::GENERAL) throw std::invalid_argument("knowledge states are built for Boolean kinds");
  KnowledgeState ks;
  ks.n = n;
  ks.k = k;
  ks.kind = kind;
  ks.graph = ExplorationGraph(n);
  ks.known.assign(n, Known::Unknown);
  ks.counting = counting;
  ks.explicit_active = n <= 64 && binomial(n, k) <= explicit_cap;
  if (ks.explicit_active) {
    ks.viable.reserve(static_cast<size_t>(binomial(n, k)));
    if (k == 0) {
      ks.viable.push_back(0);
    } else {
      uint64_t m = (k == 64) ? ~uint64_t{0} : (uint64_t{1} << k) - 1;
      uint64_t limit = n == 64 ? 0 : uint64_t{1} << n;
      for (;;) {
        ks.viable.push_back(m);
        uint64_t c = m & (~m + 1), r = m + c;
        if (r == 0 || (limit && r >= limit)) break;
        m = (((r ^ m) >> 2) / c) | r;
        if (limit && m >= limit) break;
      }
    }
  }
  refresh_known(ks);
  return ks;
}

inline bool mask_consistent(uint64_t m, const std::vector<LabeledEdge>& edges, Kind kind) {
  for (auto& e : edges)
    if (!edge_consistent(kind, (m >> e.u) & 1, (m >> e.v) & 1, e.label)) return false;
  return true;
}

// New state after playing m and seeing o. Throws on relabeling or when nothing stays viable.
inline KnowledgeState observe(const KnowledgeState& ks, const Matching& m, const OutcomeVector& o) {
  KnowledgeState next = ks;
  auto fresh = next.graph.record(m, o);
  if (next.explicit_active) {
    std::vector<uint64_t> kept;
    kept.reserve(next.viable.size());
    for (auto x : next.viable)
      if (mask_consistent(x, fresh, next.kind)) kept.push_back(x);
    if (kept.empty()) throw std::runtime_error("no viable labeling remains after round " +
                                               std::to_string(next.graph.num_rounds()));
    next.viable.swap(kept);
  } else if (!ViabilityOracle(next.graph, next.kind, next.k).feasible()) {
    throw std::runtime_error("no viable labeling remains after round " + std::to_string(next.graph.num_rounds()));
  }
  refresh_known(next);
  return next;
}

inline bool mask_matches(uint64_t m, const Partial& p) {
  for (auto [v, t] : p)
    if (static_cast<int>((m >> v) & 1) != t) return false;
  return true;
}

inline bool viable_exists(const KnowledgeState& ks, const Partial& partial = {}) {
  if (ks.explicit_active) {
    for (auto m : ks.viable)
      if (mask_matches(m, partial)) return true;
    return false;
  }
  return ViabilityOracle(ks.graph, ks.kind, ks.k).feasible(partial);
}

// Viability under tentative extra edge labels (used by adversaries composing a response).
inline std::optional<TypeVector> viable_witness(const KnowledgeState& ks, const std::vector<LabeledEdge>& extra,
                                                const Partial& partial = {}) {
  if (ks.explicit_active) {
    for (auto m : ks.viable)
      if (mask_matches(m, partial) && mask_consistent(m, extra, ks.kind)) return TypeVector::from_mask(m, ks.n);
    return std::nullopt;
  }
  return ViabilityOracle(ks.graph, ks.kind, ks.k, extra).witness(partial);
}

// Exact per-agent forced types, whatever backend is active.
inline std::vector<Known> exact_known(const KnowledgeState& ks) {
  if (ks.explicit_active) return ks.known;
  return ViabilityOracle(ks.graph, ks.kind, ks.k).forced();
}

struct UnresolvedSubgraph {
  std::vector<int> vertices;
  std::vector<LabeledEdge> edges;
};

inline UnresolvedSubgraph unresolved_subgraph(const ExplorationGraph& g, const std::vector<Known>& known) {
  UnresolvedSubgraph s;
  for (int v = 0; v < g.n(); ++v)
    if (known[v] == Known::Unknown) s.vertices.push_back(v);
  for (auto& e : g.labeled_edges())
    if (known[e.u] == Known::Unknown && known[e.v] == Known::Unknown) s.edges.push_back(e);
  return s;
}

inline std::optional<std::vector<int>> independent_set_exists(const UnresolvedSubgraph& s, int n, int size) {
  Graph g(n);
  Bits verts(n);
  for (int v : s.vertices) verts.set(v);
  for (auto& e : s.edges) g.add_edge(e.u, e.v);
  return independent_set_of_size(g, verts, size);
}

// ---- lock detection ----

namespace detail {

using UGraph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS>;

inline std::optional<Matching> perfect_matching_in(int n, const std::vector<std::vector<char>>& allowed,
                                                   const std::vector<char>& skip = {}) {
  UGraph g(n);
  int active = 0;
  for (int u = 0; u < n; ++u) {
    if (!skip.empty() && skip[u]) continue;
    ++active;
    for (int v = u + 1; v < n; ++v)
      if (allowed[u][v] && (skip.empty() || !skip[v])) boost::add_edge(u, v, g);
  }
  std::vector<boost::graph_traits<UGraph>::vertex_descriptor> mate(n);
  boost::edmonds_maximum_cardinality_matching(g, &mate[0]);
  std::vector<Pair> pairs;
  for (int u = 0; u < n; ++u) {
    if (!skip.empty() && skip[u]) continue;
    auto w = mate[u];
    if (w == boost::graph_traits<UGraph>::null_vertex()) return std::nullopt;
    if (u < static_cast<int>(w)) pairs.push_back({u, static_cast<int>(w)});
  }
  if (static_cast<int>(pairs.size()) * 2 != active) return std::nullopt;
  return Matching(pairs);
}

// Per-pair type patterns that occur in some viable labeling: bit (2a+b) set when (type u, type v) = (a, b).
inline std::vector<std::vector<uint8_t>> pair_patterns_explicit(const KnowledgeState& ks) {
  int n = ks.n;
  long long T = static_cast<long long>(ks.viable.size());
  std::vector<long long> c1(n, 0);
  std::vector<std::vector<long long>> c11(n, std::vector<long long>(n, 0));
  std::vector<int> bits;
  for (auto m : ks.viable) {
    bits.clear();
    for (uint64_t x = m; x; x &= x - 1) bits.push_back(__builtin_ctzll(x));
    for (size_t i = 0; i < bits.size(); ++i) {
      ++c1[bits[i]];
      for (size_t j = i + 1; j < bits.size(); ++j) ++c11[bits[i]][bits[j]];
    }
  }
  std::vector<std::vector<uint8_t>> pat(n, std::vector<uint8_t>(n, 0));
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      long long both = c11[u][v], u1 = c1[u] - both, v1 = c1[v] - both, none = T - both - u1 - v1;
      uint8_t p = static_cast<uint8_t>((none > 0) | ((v1 > 0) << 1) | ((u1 > 0) << 2) | ((both > 0) << 3));
      pat[u][v] = p;
      pat[v][u] = static_cast<uint8_t>((p & 9) | ((p & 2) << 1) | ((p & 4) >> 1));
    }
  return pat;
}

inline std::vector<std::vector<uint8_t>> pair_patterns_structural(const KnowledgeState& ks) {
  int n = ks.n;
  ViabilityOracle oracle(ks.graph, ks.kind, ks.k);
  std::vector<std::vector<uint8_t>> pat(n, std::vector<uint8_t>(n, 0));
  std::vector<char> can0(n), can1(n);
  for (int v = 0; v < n; ++v) {
    can0[v] = oracle.feasible({{v, 0}});
    can1[v] = oracle.feasible({{v, 1}});
  }
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      uint8_t p = 0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          if (!(a ? can1[u] : can0[u]) || !(b ? can1[v] : can0[v])) continue;
          if (oracle.feasible({{u, a}, {v, b}})) p |= static_cast<uint8_t>(1 << (2 * a + b));
        }
      pat[u][v] = p;
      pat[v][u] = static_cast<uint8_t>((p & 9) | ((p & 2) << 1) | ((p & 4) >> 1));
    }
  return pat;
}

// Largest n for the exact odd-k lock search below (2^n table).
constexpr int kWeightedLockMaxN = 20;

// Max-weight perfect matching where an edge weighs the number of viable labelings under which it
// scores. Exact subset DP: Boost 1.74's maximum_weighted_matching can loop forever on these graphs.
inline std::optional<Matching> weighted_lock(const KnowledgeState& ks) {
  int n = ks.n;
  if (n > kWeightedLockMaxN || n % 2) return std::nullopt;
  long long T = static_cast<long long>(ks.viable.size());
  std::vector<long long> c1(n, 0);
  std::vector<std::vector<long long>> c11(n, std::vector<long long>(n, 0));
  std::vector<int> bits;
  for (auto m : ks.viable) {
    bits.clear();
    for (uint64_t x = m; x; x &= x - 1) bits.push_back(__builtin_ctzll(x));
    for (size_t i = 0; i < bits.size(); ++i) {
      c1[bits[i]] += 1;
      for (size_t j = i + 1; j < bits.size(); ++j) c11[bits[i]][bits[j]] += 1;
    }
  }
  std::vector<std::vector<long long>> w(n, std::vector<long long>(n, 0));
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      long long b = c11[u][v], x = 0;
      switch (ks.kind) {
        case Kind::EQ: x = b + (T - c1[u] - c1[v] + b); break;
        case Kind::XOR: x = c1[u] + c1[v] - 2 * b; break;
        case Kind::OR: x = c1[u] + c1[v] - b; break;
        case Kind::AND: x = b; break;
        case Kind::GENERAL: break;
      }
      w[u][v] = w[v][u] = x;
    }
  // best[S]: max weight of a perfect matching on the agent set S (even-sized S only).
  size_t full = (size_t(1) << n) - 1;
  std::vector<long long> best(full + 1, -1);
  best[0] = 0;
  for (size_t S = 1; S <= full; ++S) {
    if (__builtin_popcountll(S) % 2) continue;
    int u = __builtin_ctzll(S);
    long long top = -1;
    for (size_t R = S & (S - 1); R; R &= R - 1) {
      int v = __builtin_ctzll(R);
      long long sub = best[S & ~(size_t(1) << u) & ~(size_t(1) << v)];
      if (sub >= 0) top = std::max(top, sub + w[u][v]);
    }
    best[S] = top;
  }
  std::vector<Pair> pairs;
  for (size_t S = full; S;) {
    int u = __builtin_ctzll(S);
    for (size_t R = S & (S - 1); R; R &= R - 1) {
      int v = __builtin_ctzll(R);
      size_t rest = S & ~(size_t(1) << u) & ~(size_t(1) << v);
      if (best[rest] >= 0 && best[rest] + w[u][v] == best[S]) {
        pairs.push_back({u, v});
        S = rest;
        break;
      }
    }
  }
  if (static_cast<int>(pairs.size()) * 2 != n) return std::nullopt;
  Matching m(pairs);
  Synergy f = Synergy::boolean(ks.kind);
  Rational target = optimal_score(n, ks.k, f);
  for (auto x : ks.viable)
    if (score(m, TypeVector::from_mask(x, n), f) != target) return std::nullopt;
  return m;
}

}  // namespace detail

// A matching that is optimal under every viable labeling, if one exists.
inline std::optional<Matching> optimal_matching_known(const KnowledgeState& ks) {
  int n = ks.n, k = ks.k;
  if (n == 0) return Matching{};
  Synergy f = Synergy::boolean(ks.kind);
  long long target = optimal_score(n, k, f).numerator();
  const auto& rounds = ks.graph.rounds();
  for (size_t t = 0; t < rounds.size(); ++t) {
    long long s = 0;
    for (int x : ks.graph.outcomes()[t]) s += x;
    if (s == target) return rounds[t];
  }
  bool odd_special = (ks.kind == Kind::EQ || ks.kind == Kind::AND) && k % 2 == 1;
  if (ks.explicit_active && odd_special && n <= detail::kWeightedLockMaxN) return detail::weighted_lock(ks);

  // Pair types (a, b) that an optimal matching may never contain.
  std::vector<std::pair<int, int>> forbidden;
  switch (ks.kind) {
    case Kind::XOR:
      if (k <= n - k) forbidden.push_back({1, 1});
      if (k >= n - k) forbidden.push_back({0, 0});
      break;
    case Kind::OR:
      if (2 * k < n) forbidden.push_back({1, 1});
      else forbidden.push_back({0, 0});
      break;
    case Kind::EQ:
    case Kind::AND:
      forbidden.push_back({0, 1});
      break;
    case Kind::GENERAL: return std::nullopt;
  }
  auto pat = ks.explicit_active ? detail::pair_patterns_explicit(ks) : detail::pair_patterns_structural(ks);
  auto bit = [](int a, int b) { return 1 << (2 * a + b); };
  std::vector<std::vector<char>> allowed(n, std::vector<char>(n, 0));
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      if (u == v) continue;
      bool ok = true;
      for (auto [a, b] : forbidden)
        if (pat[u][v] & (bit(a, b) | bit(b, a))) ok = false;
      allowed[u][v] = ok;
    }
  if (!odd_special) return detail::perfect_matching_in(n, allowed);

  // Odd k for EQ/AND without the explicit set: same-typed pairs around one certainly mixed pair.
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      if (pat[u][v] & (bit(0, 0) | bit(1, 1))) continue;
      std::vector<char> skip(n, 0);
      skip[u] = skip[v] = 1;
      if (auto m = detail::perfect_matching_in(n, allowed, skip)) {
        auto pairs = m->pairs;
        pairs.push_back({u, v});
        return Matching(pairs);
      }
    }
  return std::nullopt;
}

}  // namespace syn

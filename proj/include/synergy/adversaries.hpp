#pragma once

#include <algorithm>
#include <climits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "synergy/core.hpp"
#include "synergy/exploration.hpp"
#include "synergy/policies.hpp"

namespace syn {

enum class AdversaryKind { EqBipartite, XorCycle, OrScripted, AndGreedy, GreedyMaxRegret };
enum class OrLemma { LB1, LB2, LB3, LB4, BEST };

inline const char* or_lemma_name(OrLemma l) {
  switch (l) {
    case OrLemma::LB1: return "lb1";
    case OrLemma::LB2: return "lb2";
    case OrLemma::LB3: return "lb3";
    case OrLemma::LB4: return "lb4";
    case OrLemma::BEST: return "best";
  }
  return "?";
}

// Scripted strategy with the largest bound at alpha = (n-k)/n.
inline OrLemma best_or_lemma(int n, int k) {
  double a = n ? double(n - k) / n : 0.0;
  if (a <= 0.5) return OrLemma::LB1;
  double b2 = (1 - a) / 2, b3 = (3 - 4 * a) / 3, b4 = (6 - 9 * a) / 4;
  if (b4 >= b3 && b4 >= b2) return OrLemma::LB4;
  if (b3 >= b2) return OrLemma::LB3;
  return OrLemma::LB2;
}

class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual AdversaryKind kind() const = 0;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<Adversary> clone() const = 0;
  // `policy` is the policy right after it produced m; only lookahead adversaries use it.
  virtual OutcomeVector respond(const KnowledgeState& ks, const Matching& m, const Policy* policy) = 0;
  virtual Diagnostics diagnostics() const { return {}; }
};

inline int pair_bit(Kind kind, uint64_t mask, int a, int b) {
  return Synergy::boolean(kind).bit((mask >> a) & 1, (mask >> b) & 1);
}

inline uint64_t outcome_key(Kind kind, uint64_t mask, const Matching& m) {
  uint64_t key = 0;
  for (size_t i = 0; i < m.size(); ++i)
    if (pair_bit(kind, mask, m.pairs[i].first, m.pairs[i].second)) key |= uint64_t{1} << i;
  return key;
}

inline OutcomeVector key_outcomes(uint64_t key, size_t pairs) {
  OutcomeVector o(pairs);
  for (size_t i = 0; i < pairs; ++i) o[i] = (key >> i) & 1;
  return o;
}

inline std::vector<LabeledEdge> as_edges(const Matching& m, const OutcomeVector& o) {
  std::vector<LabeledEdge> e;
  for (size_t i = 0; i < m.size(); ++i) e.push_back({m.pairs[i].first, m.pairs[i].second, o[i]});
  return e;
}

// Outcome vector of a viable labeling with the most failures. Explicit: exact, first mask on
// ties. Structural: failures fixed greedily in pair order.
inline OutcomeVector most_failures(const KnowledgeState& ks, const Matching& m) {
  if (ks.explicit_active) {
    int best = -1;
    uint64_t best_key = 0;
    for (auto mask : ks.viable) {
      uint64_t key = outcome_key(ks.kind, mask, m);
      int fails = static_cast<int>(m.size()) - __builtin_popcountll(key);
      if (fails > best) {
        best = fails;
        best_key = key;
      }
    }
    return key_outcomes(best_key, m.size());
  }
  std::vector<LabeledEdge> fixed;
  for (size_t i = 0; i < m.size(); ++i) {
    fixed.push_back({m.pairs[i].first, m.pairs[i].second, 0});
    if (!viable_witness(ks, fixed)) fixed.back().label = 1;
  }
  auto w = viable_witness(ks, fixed);
  if (!w) throw std::logic_error("no consistent response");
  return outcomes(m, *w, Synergy::boolean(ks.kind));
}

// ---- EQ and XOR ----

class EqBipartite : public Adversary {
 public:
  AdversaryKind kind() const override { return AdversaryKind::EqBipartite; }
  std::string name() const override { return "eq-bipartite"; }
  std::unique_ptr<Adversary> clone() const override { return std::make_unique<EqBipartite>(*this); }
  // Rounds 1-2 form a bipartite graph; placing the minority type on one side keeps every
  // mixed pair failing. Later rounds keep maximizing failures.
  OutcomeVector respond(const KnowledgeState& ks, const Matching& m, const Policy*) override {
    return most_failures(ks, m);
  }
};

class XorCycle : public Adversary {
 public:
  AdversaryKind kind() const override { return AdversaryKind::XorCycle; }
  std::string name() const override { return "xor-cycle"; }
  std::unique_ptr<Adversary> clone() const override { return std::make_unique<XorCycle>(*this); }
  // Failures (same-type pairs) are maximal when the 0-agents fill cycles contiguously.
  OutcomeVector respond(const KnowledgeState& ks, const Matching& m, const Policy*) override {
    return most_failures(ks, m);
  }
};

// ---- OR: scripted lower-bound adversaries ----

class OrScripted : public Adversary {
 public:
  explicit OrScripted(OrLemma lemma) : requested_(lemma) {}
  AdversaryKind kind() const override { return AdversaryKind::OrScripted; }
  std::string name() const override { return std::string("or-") + or_lemma_name(requested_); }
  std::unique_ptr<Adversary> clone() const override { return std::make_unique<OrScripted>(*this); }
  OrLemma lemma() const { return active_; }

  Diagnostics diagnostics() const override {
    return {{"q00", q00_}, {"q01", q01_}, {"q11", q11_}, {"shortfall", shortfall_},
            {"beta", beta_}, {"gamma", gamma_}, {"lemma", static_cast<long long>(active_)}};
  }

  OutcomeVector respond(const KnowledgeState& ks, const Matching& m, const Policy*) override {
    if (ks.kind != Kind::OR) throw std::invalid_argument("OrScripted needs OR synergy");
    int n = ks.n, k = ks.k, zeros = n - k;
    int t = ks.graph.num_rounds() + 1;
    if (t == 1) {
      active_ = requested_ == OrLemma::BEST ? best_or_lemma(n, k) : requested_;
      int teams = n / 2;
      long long want00 = 0;
      switch (active_) {
        case OrLemma::LB1: want00 = 4LL * zeros / 17; break;  // 4 alpha N / 17
        case OrLemma::LB3: want00 = zeros / 3; break;
        case OrLemma::LB4: want00 = zeros / 4; break;
        default: break;
      }
      if (active_ == OrLemma::LB2) {
        q11_ = k / 2;
        q01_ = k % 2;
        q00_ = teams - q11_ - q01_;
        if (q00_ < 0) {  // more 1-agents than teams: no (0,0) team at all
          shortfall_ = -q00_;
          q00_ = 0;
          q01_ = std::min(zeros, teams);
          q11_ = teams - q01_;
        }
      } else {
        q00_ = want00;
        // Remaining 0-agents sit one per team.
        q01_ = zeros - 2 * q00_;
        while (q01_ > teams - q00_) {
          ++q00_;
          q01_ = zeros - 2 * q00_;
        }
        shortfall_ = q00_ - want00;
        q11_ = teams - q00_ - q01_;
      }
      std::vector<uint8_t> types(n, 1);
      for (long long i = 0; i < teams; ++i) {
        auto [a, b] = m.pairs[i];
        if (i < q00_) types[a] = types[b] = 0;
        else if (i < q00_ + q01_) types[a] = 0;
      }
      TypeVector tv(types);
      if (tv.ones() != k) throw std::logic_error("round-1 quota does not add up");
      return outcomes(m, tv, Synergy::boolean(Kind::OR));
    }
    auto o = explore_zeros(ks, m);
    if (t == 2) {
      // beta: successful round-1 teams touched by exploration beyond the quota.
      const auto& m1 = ks.graph.rounds()[0];
      const auto& o1 = ks.graph.outcomes()[0];
      auto part = m.partner(n);
      long long touched = 0;
      for (size_t i = 0; i < m1.size(); ++i) {
        if (!o1[i]) continue;
        auto [a, b] = m1.pairs[i];
        if (ks.known[part[a]] == Known::Zero || ks.known[part[b]] == Known::Zero) ++touched;
      }
      beta_ = touched - q00_;
    }
    if (t == 3) {
      long long revealed = 0;
      for (size_t i = 0; i < m.size(); ++i) revealed += o[i] == 0;
      gamma_ = revealed - q00_;
    }
    return o;
  }

  // Scripted rounds after the first: 0-agents come out through exploration by known
  // 0-agents, as many as stay consistent (explored agents with the fewest unknown neighbours
  // first, i.e. max-degree-removal greedy). Two unknowns paired together succeed whenever
  // possible, so undiscovered 0-agents stay available for later exploration. Since
  // zz - oo is fixed by k, this never trades away (1,1)-teams within the round.
  static OutcomeVector explore_zeros(const KnowledgeState& ks, const Matching& m) {
    int n = ks.n;
    auto part = m.partner(n);
    std::vector<int> explored;
    for (int u = 0; u < n; ++u)
      if (ks.known[u] == Known::Unknown && ks.known[part[u]] == Known::Zero) explored.push_back(u);
    auto sub = unresolved_subgraph(ks.graph, ks.known);
    std::vector<int> deg(n, 0);
    for (auto& e : sub.edges) {
      ++deg[e.u];
      ++deg[e.v];
    }
    std::stable_sort(explored.begin(), explored.end(), [&](int a, int b) { return deg[a] < deg[b]; });
    Partial p;
    auto try_fix = [&](std::initializer_list<std::pair<int, int>> fix) {
      Partial q = p;
      for (auto f : fix) q.push_back(f);
      if (!viable_exists(ks, q)) return false;
      p = q;
      return true;
    };
    for (int u : explored) try_fix({{u, 0}});
    std::vector<LabeledEdge> extra;
    for (auto [a, b] : m.pairs) {
      if (ks.known[a] != Known::Unknown || ks.known[b] != Known::Unknown) continue;
      extra.push_back({a, b, 1});
      if (!viable_witness(ks, extra, p)) extra.back().label = 0;
    }
    auto w = viable_witness(ks, extra, p);
    if (!w) throw std::logic_error("no consistent response");
    return outcomes(m, *w, Synergy::boolean(Kind::OR));
  }

  // Most bad teams consistent with the history: (1,1) when k <= n/2, else (0,0).
  static OutcomeVector greedy_or(const KnowledgeState& ks, const Matching& m) {
    int bad = 2 * ks.k <= ks.n ? 1 : 0;
    std::vector<size_t> order(m.size());
    for (size_t i = 0; i < m.size(); ++i) order[i] = i;
    auto known_bad = [&](size_t i) {
      auto [a, b] = m.pairs[i];
      Known kb = bad ? Known::One : Known::Zero;
      return (ks.known[a] == kb) + (ks.known[b] == kb);
    };
    std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) { return known_bad(x) > known_bad(y); });
    Partial p;
    for (size_t i : order) {
      auto [a, b] = m.pairs[i];
      Partial q = p;
      q.push_back({a, bad});
      q.push_back({b, bad});
      if (viable_exists(ks, q)) p = q;
    }
    auto w = viable_witness(ks, {}, p);
    if (!w) throw std::logic_error("no consistent response");
    return outcomes(m, *w, Synergy::boolean(Kind::OR));
  }

 private:
  OrLemma requested_, active_ = OrLemma::LB1;
  long long q00_ = 0, q01_ = 0, q11_ = 0, shortfall_ = 0, beta_ = 0, gamma_ = 0;
};

// ---- AND: two-step greedy ----

struct RevealableSet {
  std::vector<size_t> edges;  // indices into the matching
  TypeVector witness;
};

// Smallest revealable subset of `free_edges` (indices into m), lexicographic among equal sizes.
// Edges outside free_edges keep the labels given in `fixed`.
inline std::optional<RevealableSet> minimal_revealable_set(const KnowledgeState& ks, const Matching& m,
                                                           const std::vector<size_t>& free_edges,
                                                           const std::vector<LabeledEdge>& fixed,
                                                           const Partial& base = {}) {
  int f = static_cast<int>(free_edges.size());
  for (int size = 0; size <= f; ++size) {
    std::vector<int> idx(size);
    for (int i = 0; i < size; ++i) idx[i] = i;
    for (;;) {
      std::vector<char> in(m.size(), 0);
      for (int i : idx) in[free_edges[i]] = 1;
      std::vector<LabeledEdge> extra = fixed;
      for (size_t e : free_edges) extra.push_back({m.pairs[e].first, m.pairs[e].second, in[e] ? 1 : 0});
      if (auto w = viable_witness(ks, extra, base)) {
        RevealableSet s;
        for (int i : idx) s.edges.push_back(free_edges[i]);
        s.witness = *w;
        return s;
      }
      int i = size - 1;
      while (i >= 0 && idx[i] == f - size + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return std::nullopt;
}

// Convenience form over the whole matching.
inline std::optional<RevealableSet> minimal_revealable_set(const KnowledgeState& ks, const Matching& m) {
  std::vector<size_t> all(m.size());
  for (size_t i = 0; i < m.size(); ++i) all[i] = i;
  return minimal_revealable_set(ks, m, all, {});
}

class AndGreedy : public Adversary {
 public:
  AdversaryKind kind() const override { return AdversaryKind::AndGreedy; }
  std::string name() const override { return "and-greedy"; }
  std::unique_ptr<Adversary> clone() const override { return std::make_unique<AndGreedy>(*this); }

  OutcomeVector respond(const KnowledgeState& ks, const Matching& m, const Policy*) override {
    if (ks.kind != Kind::AND) throw std::invalid_argument("AndGreedy needs AND synergy");
    return and_greedy_step(ks, m);
  }

  static OutcomeVector and_greedy_step(const KnowledgeState& ks, const Matching& m) {
    int n = ks.n;
    auto part = m.partner(n);
    // Step 1: agents paired with a known 1-agent, in index order.
    Partial p;
    std::vector<char> settled(m.size(), 0);
    std::vector<int> explored;
    for (int u = 0; u < n; ++u)
      if (ks.known[u] == Known::Unknown && ks.known[part[u]] == Known::One) explored.push_back(u);
    for (int u : explored) {
      Partial q = p;
      q.push_back({u, 0});
      if (viable_exists(ks, q)) {
        p = q;
      } else {
        p.push_back({u, 1});
      }
    }
    std::vector<LabeledEdge> fixed;
    std::vector<size_t> free_edges;
    for (size_t i = 0; i < m.size(); ++i) {
      auto [a, b] = m.pairs[i];
      auto type_of = [&](int v) -> int {
        if (ks.known[v] == Known::One) return 1;
        if (ks.known[v] == Known::Zero) return 0;
        for (auto [x, t] : p)
          if (x == v) return t;
        return -1;
      };
      int ta = type_of(a), tb = type_of(b);
      if (ta == 0 || tb == 0) fixed.push_back({a, b, 0});
      else if (ta == 1 && tb == 1) fixed.push_back({a, b, 1});
      else free_edges.push_back(i);
    }
    // Step 2: a minimal revealable set among the rest.
    auto s = minimal_revealable_set(ks, m, free_edges, fixed, p);
    if (!s) throw std::logic_error("no consistent response");
    return outcomes(m, s->witness, Synergy::boolean(Kind::AND));
  }
};

// ---- generic lookahead adversary ----

class GreedyMaxRegret : public Adversary {
 public:
  static constexpr int kInfinite = -1;
  explicit GreedyMaxRegret(int depth, int max_rounds = 0) : depth_(depth), max_rounds_(max_rounds) {}
  AdversaryKind kind() const override { return AdversaryKind::GreedyMaxRegret; }
  std::string name() const override { return depth_ < 0 ? "greedy:inf" : "greedy:" + std::to_string(depth_); }
  std::unique_ptr<Adversary> clone() const override { return std::make_unique<GreedyMaxRegret>(*this); }
  Diagnostics diagnostics() const override { return {{"nodes", nodes_}}; }

  OutcomeVector respond(const KnowledgeState& ks, const Matching& m, const Policy* policy) override {
    if (!ks.explicit_active) throw std::invalid_argument("GreedyMaxRegret needs the explicit viability backend");
    int cap = max_rounds_ > 0 ? max_rounds_ : 2 * ks.n + 2;
    int depth = depth_ < 0 ? cap : depth_;
    Rational best_val;
    auto o = choose(ks, m, policy, depth, &best_val);
    return o;
  }

 private:
  struct Bucket {
    uint64_t key;
    std::vector<uint64_t> masks;
  };

  static std::vector<Bucket> buckets(const KnowledgeState& ks, const Matching& m) {
    std::unordered_map<uint64_t, size_t> at;
    std::vector<Bucket> out;
    for (auto mask : ks.viable) {
      uint64_t key = outcome_key(ks.kind, mask, m);
      auto it = at.find(key);
      if (it == at.end()) {
        at.emplace(key, out.size());
        out.push_back({key, {mask}});
      } else {
        out[it->second].masks.push_back(mask);
      }
    }
    return out;
  }

  // Child state after outcome bucket b, without re-filtering the masks.
  static KnowledgeState child(const KnowledgeState& ks, const Matching& m, const Bucket& b) {
    KnowledgeState c = ks;
    c.graph.record(m, key_outcomes(b.key, m.size()));
    c.viable = b.masks;
    refresh_known(c);
    return c;
  }

  // Best total regret over this round and `depth` more rounds; returns the outcome achieving it.
  OutcomeVector choose(const KnowledgeState& ks, const Matching& m, const Policy* policy, int depth, Rational* value) {
    ++nodes_;
    Synergy f = Synergy::boolean(ks.kind);
    Rational opt = optimal_score(ks.n, ks.k, f);
    auto bs = buckets(ks, m);
    auto imm = [&](const Bucket& b) { return opt - Rational(__builtin_popcountll(b.key)); };
    std::stable_sort(bs.begin(), bs.end(), [&](const Bucket& x, const Bucket& y) {
      Rational rx = imm(x), ry = imm(y);
      if (rx != ry) return rx > ry;
      return key_outcomes(x.key, m.size()) < key_outcomes(y.key, m.size());
    });
    Rational best = -1, best_imm = -1;
    const Bucket* pick = nullptr;
    for (auto& b : bs) {
      Rational r = imm(b);
      if (pick && r + opt * depth < best) break;  // per-round regret never exceeds the optimum
      Rational total = r;
      if (depth > 0 && policy) {
        KnowledgeState c = child(ks, m, b);
        if (!optimal_matching_known(c)) {
          auto p = policy->clone();
          auto view = make_view(c.graph, c.kind);
          Matching next = p->next_matching(view);
          Rational sub;
          choose(c, next, p.get(), depth - 1, &sub);
          total += sub;
        }
      }
      if (!pick || total > best || (total == best && r > best_imm)) {
        best = total;
        best_imm = r;
        pick = &b;
      }
    }
    *value = best;
    return key_outcomes(pick->key, m.size());
  }

  int depth_, max_rounds_;
  long long nodes_ = 0;
};

}  // namespace syn

#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "synergy/core.hpp"
#include "synergy/exploration.hpp"

namespace syn {

// ---- factorizations ----

struct RingRound {
  int phase = 0, round_in_phase = 0;  // round_in_phase is 1-based
  Matching m;
};

// Slots: u_c = 2c, v_c = 2c + 1.
inline int ring_u(int c) { return 2 * c; }
inline int ring_v(int c) { return 2 * c + 1; }

inline std::vector<RingRound> ring_schedule(int n) {
  if (n < 2 || n % 2) throw std::invalid_argument("ring factorization needs an even n >= 2");
  int m = n / 2;
  std::vector<RingRound> out;
  std::vector<Pair> p0;
  for (int c = 0; c < m; ++c) p0.push_back({ring_u(c), ring_v(c)});
  out.push_back({0, 1, Matching(p0)});
  for (int i = 1; 2 * i < m; ++i) {
    std::array<std::vector<Pair>, 4> rounds;
    int g = std::gcd(m, i), j = m / g;
    for (int q = 0; q < g; ++q) {
      auto U = [&](int t) { return ring_u((q + ((t % j + j) % j) * i) % m); };
      auto V = [&](int t) { return ring_v((q + ((t % j + j) % j) * i) % m); };
      auto& r1 = rounds[0];
      auto& r2 = rounds[1];
      auto& r3 = rounds[2];
      auto& r4 = rounds[3];
      for (int t = 0; t < j; ++t) r1.push_back({U(t), V(t + 1)});
      if (j % 2 == 0) {
        for (int t = 0; t < j; t += 2) r2.push_back({U(t), U(t + 1)});
        for (int t = 1; t < j; t += 2) r2.push_back({V(t), V(t + 1)});
        for (int t = 0; t < j; ++t) r3.push_back({V(t), U(t + 1)});
        for (int t = 1; t < j; t += 2) r4.push_back({U(t), U(t + 1)});
        for (int t = 0; t < j; t += 2) r4.push_back({V(t), V(t + 1)});
      } else {
        r2.push_back({V(0), U(1)});
        for (int t = 2; t < j; t += 2) r2.push_back({U(t), U(t + 1)});
        for (int t = 1; t + 1 < j; t += 2) r2.push_back({V(t), V(t + 1)});
        r3.push_back({V(0), V(1)});
        r3.push_back({U(1), U(2)});
        for (int t = 2; t < j; ++t) r3.push_back({V(t), U(t + 1)});
        r4.push_back({V(1), U(2)});
        r4.push_back({U(0), U(1)});
        for (int t = 3; t + 1 < j; t += 2) r4.push_back({U(t), U(t + 1)});
        for (int t = 2; t < j; t += 2) r4.push_back({V(t), V(t + 1)});
      }
    }
    for (int r = 0; r < 4; ++r) out.push_back({i, r + 1, Matching(rounds[r])});
  }
  if (m % 2 == 0 && m >= 2) {
    int h = m / 2;
    std::vector<Pair> a, b;
    for (int c = 0; c < h; ++c) {
      a.push_back({ring_u(c), ring_u(c + h)});
      a.push_back({ring_v(c), ring_v(c + h)});
      b.push_back({ring_u(c), ring_v(c + h)});
      b.push_back({ring_v(c), ring_u(c + h)});
    }
    out.push_back({h, 1, Matching(a)});
    out.push_back({h, 2, Matching(b)});
  }
  return out;
}

inline std::vector<Matching> ring_factorization(int n) {
  std::vector<Matching> out;
  for (auto& r : ring_schedule(n)) out.push_back(r.m);
  return out;
}

// Circle method: agent n-1 stays put, the rest rotate.
inline std::vector<Matching> naive_factorization(int n) {
  if (n < 2 || n % 2) throw std::invalid_argument("factorization needs an even n >= 2");
  int q = n - 1;
  std::vector<Matching> out;
  for (int r = 0; r < q; ++r) {
    std::vector<Pair> p{{r, n - 1}};
    for (int i = 1; i < n / 2; ++i) p.push_back({(r + i) % q, (r - i + q) % q});
    out.push_back(Matching(p));
  }
  return out;
}

// Clique-doubling schedule in the spirit of Exponential Cliques. The first p agents (largest
// power of two with p <= n - 2, or all of them when n is a power of two) pair as i ^ s, which
// completes cliques of size 2, 4, 8, ... in order, while the rest keep a fixed pairing. The
// leftover agents then sweep across the clique and finally meet each other. Every edge of K_n
// is covered, but the spare teams are repeated, so this is not a 1-factorization.
inline std::vector<Matching> clique_first_factorization(int n) {
  if (n < 2 || n % 2) throw std::invalid_argument("factorization needs an even n >= 2");
  int p = 1;
  while (p * 2 <= n) p *= 2;
  if (p != n) {
    p = 1;
    while (p * 2 <= n - 2) p *= 2;
  }
  int r = n - p;
  std::vector<Matching> out;
  std::vector<Pair> spare;
  for (int i = p; i < n; i += 2) spare.push_back({i, i + 1});
  for (int s = 1; s < p; ++s) {
    std::vector<Pair> m = spare;
    for (int i = 0; i < p; ++i)
      if (i < (i ^ s)) m.push_back({i, i ^ s});
    out.push_back(Matching(m));
  }
  if (r == 0) return out;
  // Sweep: spare agent p + t meets clique agent (t + s) mod p.
  for (int s = 0; s < p; ++s) {
    std::vector<Pair> m;
    std::vector<char> used(p, 0);
    for (int t = 0; t < r; ++t) {
      int a = (t + s) % p;
      used[a] = 1;
      m.push_back({p + t, a});
    }
    std::vector<int> rest;
    for (int i = 0; i < p; ++i)
      if (!used[i]) rest.push_back(i);
    for (size_t i = 0; i + 1 < rest.size(); i += 2) m.push_back({rest[i], rest[i + 1]});
    out.push_back(Matching(m));
  }
  if (r > 2) {
    for (auto& sub : naive_factorization(r)) {
      std::vector<Pair> m;
      for (auto [a, b] : sub.pairs) m.push_back({p + a, p + b});
      for (int i = 0; i < p; i += 2) m.push_back({i, i + 1});
      out.push_back(Matching(m));
    }
  }
  return out;
}

// ---- policy interface ----

// What a policy may look at: the exploration graph and K-free rule deductions.
struct PolicyView {
  int n = 0;
  Kind kind = Kind::EQ;
  const ExplorationGraph* graph = nullptr;
  std::vector<Known> known;

  int rounds() const { return graph->num_rounds(); }
};

inline PolicyView make_view(const ExplorationGraph& g, Kind kind) {
  return PolicyView{g.n(), kind, &g, deduce_rules(g, kind)};
}

using Diagnostics = std::map<std::string, long long>;

enum class PolicyKind { FormUniformTeams, FormDiverseTeams, MaxExploit, RingWeaver, NaiveFactorization,
                        CliqueFirstFactorization };

inline const char* policy_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::FormUniformTeams: return "uniform";
    case PolicyKind::FormDiverseTeams: return "diverse";
    case PolicyKind::MaxExploit: return "maxexploit";
    case PolicyKind::RingWeaver: return "ring";
    case PolicyKind::NaiveFactorization: return "naive";
    case PolicyKind::CliqueFirstFactorization: return "clique-first";
  }
  return "?";
}

class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyKind kind() const = 0;
  virtual std::unique_ptr<Policy> clone() const = 0;

  // Once the policy's own schedule is exhausted it replays the circle method, so every policy
  // keeps producing perfect matchings.
  Matching next_matching(const PolicyView& v) {
    auto m = propose(v);
    if (!m) {
      if (fallback_.empty()) fallback_ = v.n >= 2 ? naive_factorization(v.n) : std::vector<Matching>{Matching{}};
      m = fallback_[fallback_next_++ % fallback_.size()];
      ++fallback_rounds_;
    }
    m->validate(v.n);
    return *m;
  }

  // Counters describing the most recent observed round, for traces.
  virtual Diagnostics diagnostics() const { return {}; }
  int fallback_rounds() const { return fallback_rounds_; }

 protected:
  virtual std::optional<Matching> propose(const PolicyView& v) = 0;

 private:
  std::vector<Matching> fallback_;
  size_t fallback_next_ = 0;
  int fallback_rounds_ = 0;
};

// Plays a fixed list of matchings.
class ScheduledPolicy : public Policy {
 public:
  ScheduledPolicy(PolicyKind k, std::vector<Matching> s) : kind_(k), schedule_(std::move(s)) {}
  PolicyKind kind() const override { return kind_; }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<ScheduledPolicy>(*this); }

 protected:
  std::optional<Matching> propose(const PolicyView& v) override {
    size_t t = v.rounds();
    if (t < schedule_.size()) return schedule_[t];
    return std::nullopt;
  }

 private:
  PolicyKind kind_;
  std::vector<Matching> schedule_;
};

inline std::unique_ptr<Policy> make_naive(int n) {
  return std::make_unique<ScheduledPolicy>(PolicyKind::NaiveFactorization, naive_factorization(n));
}
inline std::unique_ptr<Policy> make_clique_first(int n) {
  return std::make_unique<ScheduledPolicy>(PolicyKind::CliqueFirstFactorization, clique_first_factorization(n));
}

// ---- EQ: Form Uniform Teams ----

class FormUniformTeams : public Policy {
 public:
  PolicyKind kind() const override { return PolicyKind::FormUniformTeams; }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<FormUniformTeams>(*this); }

 protected:
  std::optional<Matching> propose(const PolicyView& v) override {
    const auto& g = *v.graph;
    int t = g.num_rounds();
    if (t == 0) return lexicographic_matching(v.n);
    const auto& m1 = g.rounds()[0];
    const auto& o1 = g.outcomes()[0];
    std::vector<Pair> ok, failed;
    for (size_t i = 0; i < m1.size(); ++i) (o1[i] ? ok : failed).push_back(m1.pairs[i]);
    std::vector<Pair> out = ok;
    for (size_t i = 0; i < failed.size(); i += 2) {
      if (i + 1 == failed.size()) {
        out.push_back(failed[i]);
        break;
      }
      auto [a, b] = failed[i];
      auto [c, d] = failed[i + 1];
      if (t == 1 || g.label(a, c) == 1) {
        out.push_back({a, c});
        out.push_back({b, d});
      } else {
        out.push_back({a, d});
        out.push_back({b, c});
      }
    }
    return Matching(out);
  }
};

// ---- XOR: Form Diverse Teams ----

class FormDiverseTeams : public Policy {
 public:
  PolicyKind kind() const override { return PolicyKind::FormDiverseTeams; }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<FormDiverseTeams>(*this); }

 protected:
  std::optional<Matching> propose(const PolicyView& v) override {
    const auto& g = *v.graph;
    int t = g.num_rounds();
    if (t == 0) return lexicographic_matching(v.n);
    const auto& m1 = g.rounds()[0];
    const auto& o1 = g.outcomes()[0];
    std::vector<Pair> ok;
    std::vector<int> x;  // x_1..x_l in team order
    for (size_t i = 0; i < m1.size(); ++i) {
      if (o1[i]) {
        ok.push_back(m1.pairs[i]);
      } else {
        x.push_back(m1.pairs[i].first);
        x.push_back(m1.pairs[i].second);
      }
    }
    std::vector<Pair> out = ok;
    if (t == 1) {
      int l = static_cast<int>(x.size());
      if (l > 0) out.push_back({x[l - 1], x[0]});
      for (int i = 1; i + 1 < l; i += 2) out.push_back({x[i], x[i + 1]});
      return Matching(out);
    }
    // Round 3 on: split the failed agents by relative parity and pair across.
    auto pc = parity_classes(g, Kind::XOR);
    std::map<int, std::array<std::vector<int>, 2>> cls;
    for (int a : x) cls[pc.comp[a]][pc.parity[a]].push_back(a);
    std::vector<int> left;
    for (auto& [c, s] : cls) {
      size_t q = std::min(s[0].size(), s[1].size());
      for (size_t i = 0; i < q; ++i) out.push_back({s[0][i], s[1][i]});
      for (int side = 0; side < 2; ++side)
        for (size_t i = q; i < s[side].size(); ++i) left.push_back(s[side][i]);
    }
    for (size_t i = 0; i + 1 < left.size(); i += 2) out.push_back({left[i], left[i + 1]});
    return Matching(out);
  }
};

// ---- OR: MaxExploit ----
//
// Keeps its own account of known agents, as in the analysis: agents become known through
// failures, exploration by a known 0-agent, or the partner rule inside a 4-cycle/4-clique that
// failed. Agents of a structure explored only in part stay unknown even when deducible.

class MaxExploit : public Policy {
 public:
  PolicyKind kind() const override { return PolicyKind::MaxExploit; }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<MaxExploit>(*this); }

  Diagnostics diagnostics() const override {
    return {{"d", last_.d}, {"e", last_.e}, {"delta", last_.delta}, {"zero_pairs_with_unknown", last_.zz_unknown},
            {"loop", last_.loop}};
  }
  const std::vector<Known>& status() const { return st_; }

 protected:
  enum Role { Exploit, Explore, Structure, Replay, Idle };
  struct Played {
    Pair p;
    Role role;
  };
  struct Unit {
    std::vector<int> a;  // team {a,b}; cycle {a,b,c,d}: teams (a,b),(c,d), cycle (a,c),(b,d), clique (a,d),(b,c)
  };
  struct Counters {
    long long d = 0, e = 0, delta = 0, zz_unknown = 0, loop = 0;
  };

  std::optional<Matching> propose(const PolicyView& v) override {
    if (v.kind != Kind::OR) throw std::invalid_argument("MaxExploit runs on OR synergy");
    sync(v);
    int t = v.rounds();
    std::vector<Played> plan;
    if (t == 0) {
      st_.assign(v.n, Known::Unknown);
      for (auto p : lexicographic_matching(v.n).pairs) plan.push_back({p, Structure});
    } else {
      plan = loop_guard() ? loop_round(t + 1) : endgame();
      last_plan_loop_ = loop_guard();
    }
    planned_ = plan;
    std::vector<Pair> pairs;
    for (auto& x : plan) pairs.push_back(x.p);
    return Matching(pairs);
  }

 private:
  bool loop_guard() const {
    int z = count(Known::Zero), o = count(Known::One), u = count(Known::Unknown);
    return z > o && u > 0;
  }
  int count(Known k) const { return static_cast<int>(std::count(st_.begin(), st_.end(), k)); }

  // Fold in every round observed since the last call.
  void sync(const PolicyView& v) {
    const auto& g = *v.graph;
    while (processed_ < g.num_rounds()) {
      int t = processed_ + 1;
      const auto& m = g.rounds()[processed_];
      const auto& o = g.outcomes()[processed_];
      Counters c;
      c.loop = t >= 2 && last_plan_loop_;
      int unknown_before = count(Known::Unknown);
      auto outcome = [&](Pair p) {
        for (size_t i = 0; i < m.size(); ++i)
          if (m.pairs[i] == Pair(std::min(p.first, p.second), std::max(p.first, p.second))) return o[i];
        throw std::logic_error("planned pair missing from played round");
      };
      if (t == 1) {
        for (size_t i = 0; i < m.size(); ++i) {
          auto [a, b] = m.pairs[i];
          if (o[i] == 0) {
            st_[a] = st_[b] = Known::Zero;
            c.d += 2;
          } else {
            units_.push_back({{a, b}});
          }
        }
      } else {
        for (auto& x : planned_) {
          int out = outcome(x.p);
          if (x.role == Explore) {
            int target = st_[x.p.first] == Known::Zero ? x.p.second : x.p.first;
            if (st_[target] == Known::Unknown) {
              st_[target] = out ? Known::One : Known::Zero;
              c.e += out == 0;
            }
          }
        }
        for (auto& u : units_) {
          if (u.a.size() != 4 || t > 3) continue;
          std::vector<Pair> edges = t == 2 ? std::vector<Pair>{{u.a[0], u.a[2]}, {u.a[1], u.a[3]}}
                                           : std::vector<Pair>{{u.a[0], u.a[3]}, {u.a[1], u.a[2]}};
          bool played = false;
          for (auto& x : planned_)
            if (x.role == Structure && x.p == Pair(std::min(edges[0].first, edges[0].second), std::max(edges[0].first, edges[0].second))) played = true;
          if (!played) continue;
          for (auto [a, b] : edges) {
            if (outcome({a, b}) == 0) {
              for (int q : {a, b}) {
                if (st_[q] == Known::Unknown) c.d += 1;
                st_[q] = Known::Zero;
              }
            }
          }
          // Partner rule through the round-1 teams of the structure.
          for (int s = 0; s < 4; s += 2) {
            int a = u.a[s], b = u.a[s + 1];
            if (st_[a] == Known::Zero && st_[b] == Known::Unknown) st_[b] = Known::One;
            if (st_[b] == Known::Zero && st_[a] == Known::Unknown) st_[a] = Known::One;
          }
        }
        for (auto& x : planned_)
          if (x.role == Idle && unknown_before > 0) ++c.zz_unknown;
      }
      advance_units(t);
      c.delta = count(Known::Zero) - count(Known::One);
      last_ = c;
      ++processed_;
    }
  }

  // Drop resolved units; after round 3 everything unresolved is handled as round-1 teams.
  void advance_units(int t) {
    std::vector<Unit> next;
    for (auto& u : units_) {
      std::vector<Pair> teams;
      for (size_t s = 0; s < u.a.size(); s += 2) teams.push_back({u.a[s], u.a[s + 1]});
      bool all_unknown = true, any_unknown = false;
      for (int a : u.a) {
        bool unk = st_[a] == Known::Unknown;
        all_unknown &= unk;
        any_unknown |= unk;
      }
      if (!any_unknown) continue;
      if (u.a.size() == 4 && (!all_unknown || t >= 3)) {
        for (auto [a, b] : teams)
          if (st_[a] == Known::Unknown && st_[b] == Known::Unknown) next.push_back({{a, b}});
        continue;
      }
      next.push_back(u);
    }
    std::sort(next.begin(), next.end(), [](const Unit& x, const Unit& y) { return x.a < y.a; });
    units_ = next;
  }

  std::vector<Played> loop_round(int round) {
    std::vector<Played> plan;
    std::vector<int> zeros, ones;
    for (int v = 0; v < static_cast<int>(st_.size()); ++v) {
      if (st_[v] == Known::Zero) zeros.push_back(v);
      if (st_[v] == Known::One) ones.push_back(v);
    }
    size_t zi = 0;
    for (int o : ones) plan.push_back({{o, zeros[zi++]}, Exploit});
    std::vector<int> explorers(zeros.begin() + zi, zeros.end());
    size_t ei = 0;
    auto explore = [&](int a) { plan.push_back({{explorers[ei++], a}, Explore}); };
    auto avail = [&]() { return explorers.size() - ei; };

    std::vector<Unit> rest;
    if (round == 2) {
      std::vector<Unit> teams;
      for (auto& u : units_) {
        if (avail() >= 2) {
          explore(u.a[0]);
          explore(u.a[1]);
        } else {
          teams.push_back(u);
        }
      }
      size_t start = 0;
      if (teams.size() % 2 == 1) {
        plan.push_back({{teams[0].a[0], teams[0].a[1]}, Replay});
        start = 1;
      }
      for (size_t i = start; i + 1 < teams.size(); i += 2) {
        int a = teams[i].a[0], b = teams[i].a[1], c = teams[i + 1].a[0], d = teams[i + 1].a[1];
        plan.push_back({{a, c}, Structure});
        plan.push_back({{b, d}, Structure});
        pending_cycles_.push_back({{a, b, c, d}});
      }
    } else {
      std::vector<char> done(units_.size(), 0);
      if (round == 3) {
        for (size_t i = 0; i < units_.size(); ++i)
          if (units_[i].a.size() == 4 && avail() >= 4) {
            for (int a : units_[i].a) explore(a);
            done[i] = 1;
          }
      }
      for (size_t i = 0; i < units_.size(); ++i)
        if (!done[i] && units_[i].a.size() == 2 && avail() >= 2) {
          explore(units_[i].a[0]);
          explore(units_[i].a[1]);
          done[i] = 1;
        }
      for (size_t i = 0; i < units_.size(); ++i) {
        if (done[i]) continue;
        auto& u = units_[i];
        if (u.a.size() == 4 && avail() >= 2) {
          explore(u.a[0]);
          explore(u.a[1]);
          plan.push_back({{u.a[2], u.a[3]}, Replay});
        } else if (u.a.size() == 4 && round == 3) {
          plan.push_back({{u.a[0], u.a[3]}, Structure});
          plan.push_back({{u.a[1], u.a[2]}, Structure});
        } else {
          for (size_t s = 0; s < u.a.size(); s += 2) plan.push_back({{u.a[s], u.a[s + 1]}, Replay});
        }
      }
    }
    for (; ei + 1 < explorers.size(); ei += 2) plan.push_back({{explorers[ei], explorers[ei + 1]}, Idle});
    if (ei < explorers.size()) throw std::logic_error("odd number of spare explorers");
    if (round == 2) {
      for (auto& c : pending_cycles_) units_.push_back(c);
      pending_cycles_.clear();
      // Teams that joined a cycle are now tracked by the cycle.
      std::vector<Unit> keep;
      for (auto& u : units_) {
        bool absorbed = false;
        if (u.a.size() == 2)
          for (auto& w : units_)
            if (w.a.size() == 4 && (w.a[0] == u.a[0] || w.a[2] == u.a[0])) absorbed = true;
        if (!absorbed) keep.push_back(u);
      }
      units_ = keep;
    }
    return plan;
  }

  std::vector<Played> endgame() {
    std::vector<Played> plan;
    std::vector<int> zeros, ones;
    std::vector<char> used(st_.size(), 0);
    for (int v = 0; v < static_cast<int>(st_.size()); ++v) {
      if (st_[v] == Known::Zero) zeros.push_back(v);
      if (st_[v] == Known::One) ones.push_back(v);
    }
    size_t q = std::min(zeros.size(), ones.size());
    for (size_t i = 0; i < q; ++i) plan.push_back({{ones[i], zeros[i]}, Exploit});
    std::vector<int> left;
    for (size_t i = q; i < zeros.size(); ++i) left.push_back(zeros[i]);
    for (size_t i = q; i < ones.size(); ++i) left.push_back(ones[i]);
    for (size_t i = 0; i + 1 < left.size(); i += 2) plan.push_back({{left[i], left[i + 1]}, Idle});
    if (left.size() % 2) throw std::logic_error("odd number of known agents in the endgame");
    for (auto& u : units_)
      for (size_t s = 0; s < u.a.size(); s += 2) plan.push_back({{u.a[s], u.a[s + 1]}, Replay});
    return plan;
  }

  std::vector<Known> st_;
  std::vector<Unit> units_, pending_cycles_;
  std::vector<Played> planned_;
  int processed_ = 0;
  bool last_plan_loop_ = false;
  Counters last_;
};

// ---- AND: RingWeaver ----

// One accepted repair. Counts are per removal.
struct RepairPlan {
  std::string case_label;  // "1", "2", "3", "4", "5", "6" by discovery round; "catch-up" after probing
  int z = 0, w = 0, x = 0;
  int removed_cost2 = 0;   // twice the (0,1)-pairings of the removed 1-agents
  int slack2 = 0;          // twice (z + floor(w/4) + x/2 - removed cost)
  int stage = 0;           // covered prefix of the smaller factorization
  int survivors = 0;
  int probes = 0;
  bool fallback = false;
  std::vector<int> removed;
};

class RingWeaver : public Policy {
 public:
  PolicyKind kind() const override { return PolicyKind::RingWeaver; }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<RingWeaver>(*this); }

  const std::vector<RepairPlan>& repairs() const { return repairs_; }
  const std::vector<int>& layout() const { return slots_; }
  int stage() const { return stage_; }

  Diagnostics diagnostics() const override {
    long long fb = 0;
    for (auto& r : repairs_) fb += r.fallback;
    return {{"repairs", static_cast<long long>(repairs_.size())}, {"repair_fallbacks", fb},
            {"survivors", static_cast<long long>(slots_.size())}, {"stage", stage_}};
  }

 protected:
  std::optional<Matching> propose(const PolicyView& v) override {
    if (v.kind != Kind::AND) throw std::invalid_argument("RingWeaver runs on AND synergy");
    int t = v.rounds();
    if (!started_) {
      started_ = true;
      slots_.resize(v.n);
      std::iota(slots_.begin(), slots_.end(), 0);
      stage_ = 0;
    }
    if (t > seen_) {
      if (!last_was_probe_) ++stage_;
      bool probe = last_was_probe_;
      last_was_probe_ = false;
      seen_ = t;
      repair(v, probe);
    }
    return build();
  }

 private:
  struct Candidate {
    std::vector<int> slots;  // surviving layout
    std::vector<int> removed;
    int len = 0, stage = 0, defects = 0, ones_left = 0, z = 0, w = 0, x = 0, cost2 = 0, slack2 = 0;
    std::vector<Pair> defect_edges;
  };

  static const std::vector<RingRound>& schedule(int n) {
    thread_local std::map<int, std::vector<RingRound>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, ring_schedule(n)).first;
    return it->second;
  }

  std::optional<Matching> build() {
    if (probe_pending_) {
      probe_pending_ = false;
      last_was_probe_ = true;
      return probe_full_;
    }
    std::vector<Pair> out = pool_pairs();
    int ns = static_cast<int>(slots_.size());
    if (ns > 0) {
      const auto& sch = schedule(ns);
      if (stage_ >= static_cast<int>(sch.size())) return std::nullopt;
      for (auto [a, b] : sch[stage_].m.pairs) out.push_back({slots_[a], slots_[b]});
    }
    return Matching(out);
  }

  std::vector<Pair> pool_pairs() const {
    std::vector<Pair> out;
    std::vector<int> o = pool_ones_, z = pool_zeros_;
    std::sort(o.begin(), o.end());
    std::sort(z.begin(), z.end());
    if (o.size() % 2) {
      z.push_back(o.back());
      o.pop_back();
      std::sort(z.begin(), z.end());
    }
    for (size_t i = 0; i + 1 < o.size(); i += 2) out.push_back({o[i], o[i + 1]});
    for (size_t i = 0; i + 1 < z.size(); i += 2) out.push_back({z[i], z[i + 1]});
    return out;
  }

  // Rounds in which agent a was paired with a known 0-agent.
  static int zero_pairings(const PolicyView& v, int a) {
    int c = 0;
    for (auto& m : v.graph->rounds())
      for (auto [x, y] : m.pairs) {
        if (x == a && v.known[y] == Known::Zero) ++c;
        if (y == a && v.known[x] == Known::Zero) ++c;
      }
    return c;
  }

  std::string case_for_last_round() const {
    if (last_phase_ < 0) return "catch-up";
    if (last_phase_ == 0) return "1";
    if (last_final_phase_) return "6";
    switch (last_rip_) {
      case 4: return "2";
      case 3: return "3";
      case 2: return "4";
      default: return "5";
    }
  }

  void repair(const PolicyView& v, bool after_probe) {
    // Where in the schedule the last round sat (for the case label).
    int ns = static_cast<int>(slots_.size());
    last_phase_ = -1;
    if (!after_probe && ns > 0 && stage_ - 1 < static_cast<int>(schedule(ns).size())) {
      const auto& rr = schedule(ns)[stage_ - 1];
      last_phase_ = rr.phase;
      last_rip_ = rr.round_in_phase;
      last_final_phase_ = (ns / 2) % 2 == 0 && rr.phase == ns / 4 && rr.phase > 0;
    }
    int r = v.rounds();
    for (int iter = 0; iter < 4 * v.n + 4; ++iter) {
      int ones_in = 0;
      for (int a : slots_) ones_in += v.known[a] == Known::One;
      if (ones_in <= 1 && !after_probe) return;
      after_probe = false;
      auto cands = candidates(v, r);
      const Candidate* best = nullptr;
      auto better_final = [](const Candidate& a, const Candidate& b) {
        if (a.len != b.len) return a.len < b.len;
        if (a.slack2 != b.slack2) return a.slack2 > b.slack2;
        return a.stage > b.stage;
      };
      for (auto& c : cands)
        if (c.defects == 0 && c.ones_left <= 1 && c.slack2 >= 0 && (!best || better_final(c, *best))) best = &c;
      if (!best && ones_in >= 2) {
        for (auto& c : cands)
          if (c.defects == 0 && c.w >= 2 && c.slack2 >= 0 &&
              (!best || c.w > best->w || (c.w == best->w && better_final(c, *best))))
            best = &c;
      }
      if (best) {
        if (best->len == 0 && best->slots == slots_ && best->stage == stage_) return;
        apply(v, *best, false, 0);
        continue;
      }
      if (plan_probe(v, cands, r)) return;
      // Nothing clean: keep the covered prefix with the most slack.
      for (auto& c : cands)
        if (c.ones_left <= 1 || c.w >= 2)
          if (!best || c.defects < best->defects || (c.defects == best->defects && better_final(c, *best)))
            best = &c;
      if (best && !(best->len == 0 && best->slots == slots_)) {
        apply(v, *best, true, 0);
        continue;
      }
      return;
    }
  }

  void apply(const PolicyView& v, const Candidate& c, bool fallback, int probes) {
    RepairPlan p;
    p.case_label = case_for_last_round();
    p.z = c.z;
    p.w = c.w;
    p.x = c.x;
    p.removed_cost2 = c.cost2;
    p.slack2 = c.slack2;
    p.stage = c.stage;
    p.survivors = static_cast<int>(c.slots.size());
    p.probes = probes;
    p.fallback = fallback;
    p.removed = c.removed;
    repairs_.push_back(p);
    for (int a : c.removed) (v.known[a] == Known::One ? pool_ones_ : pool_zeros_).push_back(a);
    slots_ = c.slots;
    stage_ = c.stage;
    last_phase_ = -1;
  }

  // Structured search: drop a contiguous block of known columns, then try every rotation,
  // reflection and ring swap of the surviving columns; measure how much of the smaller
  // factorization is already covered (played, or with a known 0 endpoint).
  std::vector<Candidate> candidates(const PolicyView& v, int r) const {
    std::vector<Candidate> out;
    int m = static_cast<int>(slots_.size()) / 2;
    auto covered = [&](int a, int b) {
      return v.graph->played(a, b) || v.known[a] == Known::Zero || v.known[b] == Known::Zero;
    };
    for (int len = 0; len < m || (len == m && m > 0); ++len) {
      for (int start = 0; start < (len == 0 ? 1 : m); ++start) {
        std::vector<int> removed;
        int z = 0, w = 0;
        bool ok = true;
        for (int q = 0; q < len && ok; ++q) {
          int c = (start + q) % m;
          for (int a : {slots_[2 * c], slots_[2 * c + 1]}) {
            if (v.known[a] == Known::Unknown) ok = false;
            removed.push_back(a);
            (v.known[a] == Known::One ? w : z)++;
          }
        }
        if (!ok || w % 2 || z % 2) continue;
        std::vector<std::array<int, 2>> cols;
        for (int q = len; q < m; ++q) {
          int c = (start + q) % m;
          cols.push_back({slots_[2 * c], slots_[2 * c + 1]});
        }
        int mm = static_cast<int>(cols.size());
        int cost2 = 0;
        for (int a : removed)
          if (v.known[a] == Known::One) cost2 += zero_pairings(v, a);
        std::vector<int> known_ones;
        for (auto& col : cols)
          for (int a : col)
            if (v.known[a] == Known::One) known_ones.push_back(a);
        int rot_n = std::max(mm, 1);
        for (int refl = 0; refl < 2; ++refl)
          for (int swp = 0; swp < 2; ++swp)
            for (int rot = 0; rot < rot_n; ++rot) {
              if (mm <= 1 && (refl || rot)) continue;
              Candidate cd;
              cd.len = len;
              cd.removed = removed;
              cd.z = z;
              cd.w = w;
              cd.cost2 = cost2;
              cd.slots.resize(2 * mm);
              for (int c = 0; c < mm; ++c) {
                int src = refl ? ((rot - c) % mm + mm) % mm : (rot + c) % mm;
                cd.slots[2 * c] = cols[src][swp];
                cd.slots[2 * c + 1] = cols[src][1 - swp];
              }
              int ns = 2 * mm;
              int target = 0, stage = 0;
              if (ns > 0) {
                const auto& sch = schedule(ns);
                target = std::min<int>(r, static_cast<int>(sch.size()));
                bool prefix = true;
                for (size_t t = 0; t < sch.size(); ++t) {
                  bool all = true;
                  for (auto [a, b] : sch[t].m.pairs) {
                    int x = cd.slots[a], y = cd.slots[b];
                    if (!covered(x, y)) {
                      all = false;
                      if (static_cast<int>(t) < target) cd.defect_edges.push_back({x, y});
                    }
                  }
                  if (all && prefix) stage = static_cast<int>(t) + 1;
                  else prefix = false;
                  if (!prefix && static_cast<int>(t) >= target) break;
                }
              }
              cd.defects = static_cast<int>(cd.defect_edges.size());
              cd.stage = std::max(stage, target > 0 && cd.defects == 0 ? target : stage);
              cd.ones_left = static_cast<int>(known_ones.size());
              int extra2 = 0;
              for (int a : known_ones) {
                int p = zero_pairings(v, a);
                extra2 += p - cd.stage;
                if (p < r) cd.x += r - p;
              }
              cd.x = std::min(cd.x, 1);
              cd.slack2 = 2 * z + 2 * (w / 4) - cost2 - extra2;
              out.push_back(std::move(cd));
            }
      }
    }
    return out;
  }

  // Catch-up: use removed 1-agents to explore agents that cover the missing edges, while the
  // other survivors play the next round of the smaller factorization.
  bool plan_probe(const PolicyView& v, const std::vector<Candidate>& cands, int r) {
    const Candidate* best = nullptr;
    std::vector<int> best_probe;
    bool best_full = false;
    std::vector<Pair> best_direct;
    for (auto& c : cands) {
      if (c.defects == 0 || c.ones_left > 1 || c.slack2 < 0) continue;
      int ns = static_cast<int>(c.slots.size());
      if (ns == 0) continue;
      const auto& sch = schedule(ns);
      if (std::min<int>(r, sch.size()) >= static_cast<int>(sch.size())) continue;
      int probers = static_cast<int>(pool_ones_.size()) + c.w;
      // A missing edge at a known 1-agent is simply played again.
      std::vector<Pair> direct;
      std::vector<std::pair<int, int>> rest_edges;
      {
        std::vector<char> used(v.n, 0);
        for (auto [a, b] : c.defect_edges) {
          int one = v.known[a] == Known::One ? a : v.known[b] == Known::One ? b : -1;
          int other = one == a ? b : a;
          if (one >= 0 && v.known[other] == Known::Unknown && !used[one] && !used[other]) {
            used[one] = used[other] = 1;
            direct.push_back({std::min(one, other), std::max(one, other)});
          }
        }
        for (auto [a, b] : c.defect_edges) {
          bool hit = false;
          for (auto [x, y] : direct)
            if ((x == a && y == b) || (x == b && y == a)) hit = true;
          if (!hit) rest_edges.push_back({a, b});
        }
      }
      // Smallest set of unknown agents touching every missing edge (greedy, then exact for tiny sets).
      std::vector<int> cand_agents;
      for (auto [a, b] : rest_edges)
        for (int q : {a, b})
          if (v.known[q] == Known::Unknown &&
              std::find(cand_agents.begin(), cand_agents.end(), q) == cand_agents.end())
            cand_agents.push_back(q);
      std::sort(cand_agents.begin(), cand_agents.end());
      std::optional<std::vector<int>> cover;
      int na = static_cast<int>(cand_agents.size());
      if (na > 16) continue;
      // Probing every endpoint settles each missing edge whatever the answers are.
      bool full = na + na % 2 <= probers;
      if (full) cover = cand_agents;
      for (int size = 1; size <= std::min(na, probers) && !cover; ++size) {
        std::vector<int> idx(size);
        std::iota(idx.begin(), idx.end(), 0);
        for (;;) {
          std::vector<int> set;
          for (int i : idx) set.push_back(cand_agents[i]);
          bool hits = true;
          for (auto [a, b] : rest_edges)
            if (std::find(set.begin(), set.end(), a) == set.end() && std::find(set.begin(), set.end(), b) == set.end())
              hits = false;
          if (hits) {
            cover = set;
            break;
          }
          int i = size - 1;
          while (i >= 0 && idx[i] == na - size + i) --i;
          if (i < 0) break;
          ++idx[i];
          for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
        }
      }
      if (!cover && rest_edges.empty()) cover = std::vector<int>{};
      if (!cover) continue;
      int need = static_cast<int>(cover->size());
      {
        // Partners left behind pair up among themselves; an odd one out is probed too.
        const auto& nx = sch[std::min<int>(r, sch.size())].m;
        std::vector<int> partner(v.n, -1);
        for (auto [a, b] : nx.pairs) {
          partner[c.slots[a]] = c.slots[b];
          partner[c.slots[b]] = c.slots[a];
        }
        std::vector<char> taken(v.n, 0);
        for (int a : *cover) taken[a] = 1;
        for (auto [a, b] : direct) taken[a] = taken[b] = 1;
        int left = 0;
        for (int a : *cover) left += !taken[partner[a]];
        for (auto [a, b] : direct) left += !taken[partner[a]] + !taken[partner[b]];
        need += left % 2;
      }
      if (need > probers) continue;
      if (!best || full > best_full || (full == best_full && (cover->size() < best_probe.size() ||
          (cover->size() == best_probe.size() && (c.len < best->len ||
          (c.len == best->len && c.slack2 > best->slack2)))))) {
        best = &c;
        best_probe = *cover;
        best_full = full;
        best_direct = direct;
      }
    }
    if (!best) return false;
    Candidate c = *best;
    int target = std::min<int>(r, schedule(c.slots.size()).size());
    c.stage = target;
    apply(v, c, false, static_cast<int>(best_probe.size()));
    // Probe round: round target+1 of the smaller factorization with probed agents pulled out.
    const auto& next = schedule(slots_.size())[target].m;
    std::vector<int> partner(v.n, -1);
    for (auto [a, b] : next.pairs) {
      partner[slots_[a]] = slots_[b];
      partner[slots_[b]] = slots_[a];
    }
    std::vector<char> probed(v.n, 0), moved(v.n, 0);
    for (int a : best_probe) probed[a] = moved[a] = 1;
    for (auto [a, b] : best_direct) probed[a] = probed[b] = moved[a] = moved[b] = 1;
    std::vector<int> q;
    for (int a : best_probe)
      if (!probed[partner[a]]) q.push_back(partner[a]);
    for (auto [a, b] : best_direct)
      for (int x : {a, b})
        if (!probed[partner[x]]) q.push_back(partner[x]);
    std::sort(q.begin(), q.end());
    std::vector<int> probe_list = best_probe;
    if (q.size() % 2) {
      probe_list.push_back(q.back());
      q.pop_back();
    }
    for (int a : q) moved[a] = 1;
    for (int a : probe_list) moved[a] = 1;
    std::vector<int> ones = pool_ones_;
    std::sort(ones.begin(), ones.end());
    std::vector<Pair> pairs = best_direct;
    for (size_t i = 0; i < probe_list.size(); ++i) pairs.push_back({ones[i], probe_list[i]});
    for (size_t i = 0; i + 1 < q.size(); i += 2) pairs.push_back({q[i], q[i + 1]});
    for (auto [a, b] : next.pairs) {
      int x = slots_[a], y = slots_[b];
      if (!moved[x] && !moved[y]) pairs.push_back({x, y});
    }
    // The probing 1-agents leave the pool for this round only.
    std::vector<int> rest_ones(ones.begin() + probe_list.size(), ones.end());
    std::vector<int> zs = pool_zeros_;
    std::sort(zs.begin(), zs.end());
    if (rest_ones.size() % 2) {
      zs.push_back(rest_ones.back());
      rest_ones.pop_back();
    }
    for (size_t i = 0; i + 1 < rest_ones.size(); i += 2) pairs.push_back({rest_ones[i], rest_ones[i + 1]});
    for (size_t i = 0; i + 1 < zs.size(); i += 2) pairs.push_back({zs[i], zs[i + 1]});
    probe_full_ = Matching(pairs);
    probe_pending_ = true;
    return true;
  }

  std::vector<int> slots_, pool_ones_, pool_zeros_;
  Matching probe_full_;
  bool probe_pending_ = false;
  int stage_ = 0, seen_ = 0;
  bool started_ = false, last_was_probe_ = false;
  int last_phase_ = -1, last_rip_ = 0;
  bool last_final_phase_ = false;
  std::vector<RepairPlan> repairs_;
};

}  // namespace syn

#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "synergy/adversaries.hpp"
#include "synergy/core.hpp"
#include "synergy/exploration.hpp"
#include "synergy/policies.hpp"

namespace syn {

inline Kind parse_kind(const std::string& s) {
  std::string u;
  for (char c : s) u += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (u == "EQ") return Kind::EQ;
  if (u == "XOR") return Kind::XOR;
  if (u == "OR") return Kind::OR;
  if (u == "AND") return Kind::AND;
  throw std::invalid_argument("unknown synergy: " + s);
}

inline std::unique_ptr<Policy> make_policy(PolicyKind k, int n) {
  switch (k) {
    case PolicyKind::FormUniformTeams: return std::make_unique<FormUniformTeams>();
    case PolicyKind::FormDiverseTeams: return std::make_unique<FormDiverseTeams>();
    case PolicyKind::MaxExploit: return std::make_unique<MaxExploit>();
    case PolicyKind::RingWeaver: return std::make_unique<RingWeaver>();
    case PolicyKind::NaiveFactorization: return make_naive(n);
    case PolicyKind::CliqueFirstFactorization: return make_clique_first(n);
  }
  throw std::invalid_argument("unknown policy");
}

inline PolicyKind parse_policy(const std::string& s) {
  for (auto k : {PolicyKind::FormUniformTeams, PolicyKind::FormDiverseTeams, PolicyKind::MaxExploit,
                 PolicyKind::RingWeaver, PolicyKind::NaiveFactorization, PolicyKind::CliqueFirstFactorization})
    if (s == policy_name(k)) return k;
  throw std::invalid_argument("unknown policy: " + s);
}

// Names: eq-bipartite, xor-cycle, and-greedy, or-lb1..or-lb4, or-best, greedy:<depth>, greedy:inf.
inline std::unique_ptr<Adversary> make_adversary(const std::string& s) {
  if (s == "eq-bipartite") return std::make_unique<EqBipartite>();
  if (s == "xor-cycle") return std::make_unique<XorCycle>();
  if (s == "and-greedy") return std::make_unique<AndGreedy>();
  for (auto l : {OrLemma::LB1, OrLemma::LB2, OrLemma::LB3, OrLemma::LB4, OrLemma::BEST})
    if (s == std::string("or-") + or_lemma_name(l)) return std::make_unique<OrScripted>(l);
  if (s.rfind("greedy:", 0) == 0) {
    std::string d = s.substr(7);
    if (d == "inf") return std::make_unique<GreedyMaxRegret>(GreedyMaxRegret::kInfinite);
    size_t pos = 0;
    int depth = std::stoi(d, &pos);
    if (pos != d.size() || depth < 0) throw std::invalid_argument("bad greedy depth: " + d);
    return std::make_unique<GreedyMaxRegret>(depth);
  }
  throw std::invalid_argument("unknown adversary: " + s);
}

// ---- trace ----

struct RoundRecord {
  Matching matching;
  OutcomeVector outcomes;
  long long regret = 0;
  std::vector<int> zeros, ones;  // deductions after the round
  Diagnostics counters;          // d, e, delta (MaxExploit) and zz, zo, oo
};

struct Trace {
  int n = 0, k = 0;
  Kind kind = Kind::EQ;
  std::string policy, adversary;
  int max_rounds = 0;
  std::vector<RoundRecord> rounds;
  long long total_regret = 0;
  int rounds_to_lock = 0;
  bool locked = false;
  TypeVector witness;  // a labeling viable at the end, used for the team-type counters
  Diagnostics policy_diag, adversary_diag;
};

struct Verdict {
  std::string bound;
  double value = 0;
  bool holds = false;
};

struct GameResult {
  Trace trace;
  Matching locked;
  BoundsReport bounds;
  std::vector<Verdict> verdicts;
};

inline void team_counters(const Matching& m, const TypeVector& w, Diagnostics& c) {
  long long zz = 0, zo = 0, oo = 0;
  for (auto [a, b] : m.pairs) {
    int s = w[a] + w[b];
    (s == 0 ? zz : s == 1 ? zo : oo)++;
  }
  c["zz"] = zz;
  c["zo"] = zo;
  c["oo"] = oo;
}

inline GameResult run_game(Policy& policy, Adversary& adversary, int n, int k, Kind kind, int max_rounds = 0,
                           long long explicit_cap = kDefaultExplicitCap) {
  check_nk(n, k);
  if (max_rounds <= 0) max_rounds = 2 * n;
  if (max_rounds < n) throw std::invalid_argument("max_rounds must be at least n");
  GameResult res;
  Trace& tr = res.trace;
  tr.n = n;
  tr.k = k;
  tr.kind = kind;
  tr.policy = policy_name(policy.kind());
  tr.adversary = adversary.name();
  tr.max_rounds = max_rounds;
  res.bounds = bounds_report(kind, n, k);
  Synergy f = Synergy::boolean(kind);
  long long target = optimal_score(n, k, f).numerator();

  auto ks = make_knowledge(n, k, kind, explicit_cap);
  auto take_counters = [&](const Diagnostics& d) {
    if (policy.kind() != PolicyKind::MaxExploit || tr.rounds.empty()) return;
    for (const char* key : {"d", "e", "delta", "zero_pairs_with_unknown", "loop"})
      if (auto it = d.find(key); it != d.end()) tr.rounds.back().counters[key] = it->second;
  };
  std::optional<Matching> lock;
  for (;;) {
    lock = optimal_matching_known(ks);
    if (lock) break;
    if (tr.rounds.size() >= static_cast<size_t>(max_rounds))
      throw std::runtime_error("no lock within " + std::to_string(max_rounds) + " rounds");
    Matching m = policy.next_matching(make_view(ks.graph, kind));
    take_counters(policy.diagnostics());
    m.validate(n);
    OutcomeVector o = adversary.respond(ks, m, &policy);
    ks = observe(ks, m, o);
    RoundRecord r;
    r.matching = m;
    r.outcomes = o;
    long long s = 0;
    for (int x : o) s += x;
    r.regret = target - s;
    if (r.regret < 0) throw std::logic_error("round scored above the optimum");
    for (int v = 0; v < n; ++v) {
      if (ks.known[v] == Known::Zero) r.zeros.push_back(v);
      if (ks.known[v] == Known::One) r.ones.push_back(v);
    }
    tr.total_regret += r.regret;
    tr.rounds.push_back(std::move(r));
  }
  // Flush the policy's view of the final round.
  if (!tr.rounds.empty() && policy.kind() == PolicyKind::MaxExploit) {
    auto c = policy.clone();
    try {
      c->next_matching(make_view(ks.graph, kind));
      take_counters(c->diagnostics());
    } catch (const std::exception&) {
    }
  }
  tr.locked = true;
  tr.rounds_to_lock = static_cast<int>(tr.rounds.size());
  res.locked = *lock;
  auto w = viable_witness(ks, {});
  if (!w) throw std::logic_error("no viable labeling at the end of the game");
  tr.witness = *w;
  for (auto& r : tr.rounds) team_counters(r.matching, tr.witness, r.counters);
  tr.policy_diag = policy.diagnostics();
  tr.policy_diag["fallback_rounds"] = policy.fallback_rounds();
  tr.adversary_diag = adversary.diagnostics();
  res.verdicts.push_back({"lower", res.bounds.lower, tr.total_regret + 1e-9 >= res.bounds.lower});
  res.verdicts.push_back({"upper", res.bounds.upper, tr.total_regret <= res.bounds.upper + 1e-9});
  return res;
}

inline GameResult run_game(PolicyKind pk, const std::string& adversary, int n, int k, Kind kind, int max_rounds = 0) {
  auto p = make_policy(pk, n);
  auto a = make_adversary(adversary);
  return run_game(*p, *a, n, k, kind, max_rounds);
}

// ---- invariant checks ----

inline std::vector<std::string> check_trace_invariants(const Trace& t) {
  std::vector<std::string> bad;
  auto flag = [&](int round, const std::string& what) {
    bad.push_back((round ? "round " + std::to_string(round) + ": " : std::string()) + what);
  };
  long long sum = 0;
  for (size_t i = 0; i < t.rounds.size(); ++i) {
    if (t.rounds[i].regret < 0) flag(int(i) + 1, "negative regret");
    sum += t.rounds[i].regret;
  }
  if (sum != t.total_regret) flag(0, "total regret differs from the sum of rounds");
  if (!t.locked) flag(0, "game did not lock");

  bool have_witness = t.witness.n() == t.n;
  auto counter = [](const RoundRecord& r, const char* key) -> std::optional<long long> {
    auto it = r.counters.find(key);
    if (it == r.counters.end()) return std::nullopt;
    return it->second;
  };

  if (t.kind == Kind::OR) {
    bool low_alpha = 2 * t.k >= t.n;  // alpha <= 1/2
    // Never pair two known 0-agents while unknown agents remain. Known here means inferable
    // from edge labels alone, which is what a K-agnostic policy can see.
    if (low_alpha) {
      ExplorationGraph g(t.n);
      for (size_t i = 0; i < t.rounds.size(); ++i) {
        const auto& r = t.rounds[i];
        auto known = deduce_rules(g, Kind::OR);
        bool any_unknown = std::count(known.begin(), known.end(), Known::Unknown) > 0;
        if (any_unknown)
          for (auto [a, b] : r.matching.pairs)
            if (known[a] == Known::Zero && known[b] == Known::Zero) {
              flag(int(i) + 1, "two known 0-agents paired while unknown agents remain");
              break;
            }
        g.record(r.matching, r.outcomes);
      }
    }
    if (have_witness) {
      for (size_t i = 0; i < t.rounds.size(); ++i) {
        const auto& r = t.rounds[i];
        auto zz = counter(r, "zz"), zo = counter(r, "zo"), oo = counter(r, "oo");
        if (!zz || !zo || !oo) continue;
        long long bad_teams = low_alpha ? *zz : *oo;
        if (2 * t.k == t.n) bad_teams = *zz;
        if (r.regret != bad_teams) flag(int(i) + 1, "regret differs from the count of wasted teams");
        if (*zo != t.k - 2 * *oo) flag(int(i) + 1, "zo != (1-alpha)N - 2 oo");
        if (2 * *zz != 2 * *oo + 2 * (t.n - t.k) - t.n) flag(int(i) + 1, "zz != oo + (alpha-1/2)N");
      }
    }
    // zz_1 > (alpha/5) N when alpha > 1/2, rounds 2 and 3 ran the exploration loop, and every
    // 0-agent after round 1 was explored.
    auto looped = [&](size_t i) {
      auto l = i < t.rounds.size() ? counter(t.rounds[i], "loop") : std::nullopt;
      return l && *l;
    };
    if (t.policy == "maxexploit" && 2 * t.k < t.n && looped(1) && looped(2)) {
      ExplorationGraph g(t.n);
      bool only_exploration = true;
      for (size_t i = 0; i < t.rounds.size(); ++i) {
        const auto& r = t.rounds[i];
        if (i > 0) {
          auto known = deduce_rules(g, Kind::OR);
          for (size_t j = 0; j < r.matching.size(); ++j) {
            auto [a, b] = r.matching.pairs[j];
            if (r.outcomes[j] == 0 && known[a] == Known::Unknown && known[b] == Known::Unknown) only_exploration = false;
          }
        }
        g.record(r.matching, r.outcomes);
      }
      long long zz1 = 0;
      for (int x : t.rounds[0].outcomes) zz1 += x == 0;
      if (only_exploration && 5 * zz1 <= t.n - t.k) flag(1, "zz_1 <= (alpha/5) N");
    }
    if (t.policy == "maxexploit") {
      for (size_t i = 0; i < t.rounds.size(); ++i) {
        const auto& r = t.rounds[i];
        auto d = counter(r, "d"), e = counter(r, "e"), delta = counter(r, "delta");
        if (!d || !e || !delta) continue;
        if (i == 0) {
          if (*delta != *d) flag(1, "Delta_1 != d_1");
          continue;
        }
        auto loop = counter(r, "loop");
        if (!loop || !*loop) continue;
        auto prev = counter(t.rounds[i - 1], "delta");
        auto idle = counter(r, "zero_pairs_with_unknown");
        if (prev && *delta > *prev) flag(int(i) + 1, "Delta_t > Delta_{t-1}");
        if (idle && *idle == 0 && *delta != 2 * *e) flag(int(i) + 1, "2 e_t != Delta_t");
      }
    }
  }
  if (t.kind == Kind::AND && have_witness) {
    long long mixed = 0;
    for (auto& r : t.rounds) {
      auto zo = counter(r, "zo");
      if (zo) mixed += *zo - t.k % 2;
    }
    if (mixed != 2 * t.total_regret) flag(0, "regret differs from half the (0,1)-teams");
  }
  return bad;
}

// ---- serialization ----

inline nlohmann::json trace_json(const Trace& t) {
  using nlohmann::json;
  json j;
  j["meta"] = {{"n", t.n},
               {"k", t.k},
               {"alpha", t.n ? double(t.n - t.k) / t.n : 0.0},
               {"synergy", kind_name(t.kind)},
               {"policy", t.policy},
               {"adversary", t.adversary},
               {"max_rounds", t.max_rounds}};
  j["rounds"] = json::array();
  for (auto& r : t.rounds) {
    json jr;
    jr["matching"] = json::array();
    for (auto [a, b] : r.matching.pairs) jr["matching"].push_back({a, b});
    jr["outcomes"] = r.outcomes;
    jr["regret"] = r.regret;
    jr["known"] = {{"zeros", r.zeros}, {"ones", r.ones}};
    jr["counters"] = json::object();
    for (auto& [k, v] : r.counters) jr["counters"][k] = v;
    j["rounds"].push_back(jr);
  }
  j["totals"] = {{"regret", t.total_regret}, {"rounds_to_lock", t.rounds_to_lock}, {"locked", t.locked}};
  std::vector<int> w(t.witness.types.begin(), t.witness.types.end());
  j["witness"] = w;
  j["diagnostics"] = {{"policy", t.policy_diag}, {"adversary", t.adversary_diag}};
  return j;
}

inline const char* kCsvHeader = "n,k,alpha,synergy,policy,adversary,regret,lower,upper,rounds_to_lock";

struct SweepRow {
  int n = 0, k = 0;
  double alpha = 0;
  Kind kind = Kind::EQ;
  std::string policy, adversary;
  long long regret = 0;
  double lower = 0, upper = 0;
  int rounds_to_lock = 0;
  std::string error;  // nonempty when the game failed
  std::vector<std::string> violations;
};

inline std::string csv_line(const SweepRow& r) {
  std::ostringstream os;
  os << r.n << ',' << r.k << ',' << r.alpha << ',' << kind_name(r.kind) << ',' << r.policy << ',' << r.adversary
     << ',';
  if (r.error.empty())
    os << r.regret << ',' << r.lower << ',' << r.upper << ',' << r.rounds_to_lock;
  else
    os << "error,,," << '"' << r.error << '"';
  return os.str();
}

inline void write_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kCsvHeader << '\n';
  for (auto& r : rows) os << csv_line(r) << '\n';
}

// One game per (n, k) cell; cells run on `threads` workers, rows come back in cell order.
inline std::vector<SweepRow> sweep(PolicyKind pk, const std::string& adversary, const std::vector<int>& ns,
                                   const std::function<std::vector<int>(int)>& k_rule, Kind kind, int threads = 1,
                                   int max_rounds = 0) {
  std::vector<std::pair<int, int>> cells;
  for (int n : ns)
    for (int k : k_rule(n)) cells.push_back({n, k});
  std::vector<SweepRow> rows(cells.size());
  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (size_t i; (i = next++) < cells.size();) {
      auto [n, k] = cells[i];
      SweepRow& r = rows[i];
      r.n = n;
      r.k = k;
      r.alpha = n ? double(n - k) / n : 0.0;
      r.kind = kind;
      r.policy = policy_name(pk);
      r.adversary = adversary;
      try {
        auto g = run_game(pk, adversary, n, k, kind, max_rounds);
        r.regret = g.trace.total_regret;
        r.lower = g.bounds.lower;
        r.upper = g.bounds.upper;
        r.rounds_to_lock = g.trace.rounds_to_lock;
        r.violations = check_trace_invariants(g.trace);
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  threads = std::max(1, threads);
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

}  // namespace syn

// synergy_arena: games, sweeps, bound tables, factorizations, exact solves and the (10,4) checks.
//
// Exit codes: 2 for flag errors, 1 for invariant violations or exhausted budgets, 0 otherwise.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "synergy/arena.hpp"
#include "synergy/bound_table.hpp"
#include "synergy/exact_lab.hpp"

using namespace syn;

namespace {

struct FlagError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

Synergy parse_synergy(const std::string& s) {
  if (s.rfind("general:", 0) == 0) {
    std::vector<Rational> v;
    std::stringstream ss(s.substr(8));
    for (std::string part; std::getline(ss, part, ',');) v.push_back(parse_rational(part));
    if (v.size() != 3) throw FlagError("general synergy takes v00,v01,v11");
    return Synergy::general(v[0], v[1], v[2]);
  }
  return Synergy::boolean(parse_kind(s));
}

// The Boolean game a synergy is played as, with the regret scale.
struct Played {
  Kind kind = Kind::EQ;
  int k = 0;
  Rational scale = 1;
  bool swapped = false;
};

Played played_as(const Synergy& f, int n, int k) {
  Played p;
  if (f.is_boolean()) {
    p.kind = f.kind;
    p.k = k;
    return p;
  }
  auto r = reduce_synergy(f);
  if (r.kind == ReducedKind::CONSTANT || r.kind == ReducedKind::THREE_VALUED)
    throw FlagError(std::string("no Boolean game for a ") + reduced_name(r.kind) + " synergy; use solve");
  p.kind = r.boolean_kind();
  p.swapped = r.labels_swapped;
  p.k = r.labels_swapped ? n - k : k;
  p.scale = r.scale;
  return p;
}

const char* default_policy(Kind k) {
  switch (k) {
    case Kind::EQ: return "uniform";
    case Kind::XOR: return "diverse";
    case Kind::OR: return "maxexploit";
    default: return "ring";
  }
}

const char* default_adversary(Kind k) {
  switch (k) {
    case Kind::EQ: return "eq-bipartite";
    case Kind::XOR: return "xor-cycle";
    case Kind::OR: return "or-best";
    default: return "and-greedy";
  }
}

int thread_count() {
  int t = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* e = std::getenv("SYNERGY_ARENA_THREADS")) {
    int cap = std::atoi(e);
    if (cap >= 1) t = std::min(t, cap);
  }
  return t;
}

std::string fmt(const Rational& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != 1) os << '/' << r.denominator();
  return os.str();
}

std::string fmt_matching(const Matching& m) {
  std::ostringstream os;
  for (size_t i = 0; i < m.size(); ++i) os << (i ? " " : "") << m.pairs[i].first << '-' << m.pairs[i].second;
  return os.str();
}

void check_n(int n) {
  if (n < 0 || n % 2) throw FlagError("--n must be a non-negative even number");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw FlagError("cannot write " + path);
  return f;
}

struct Options {
  std::string synergy = "and", policy, adversary, trace, csv, format = "text";
  int n = -1, k = -1, max_rounds = 0;
  long long budget = kDefaultNodeBudget;
  std::vector<int> ns, ks;
  std::vector<std::string> alphas;
  std::string alpha, step = "1/100", factorization = "ring";
};

int cmd_simulate(const Options& o) {
  check_n(o.n);
  if (o.k < 0 || o.k > o.n) throw FlagError("--k must lie in [0, n]");
  auto f = parse_synergy(o.synergy);
  auto p = played_as(f, o.n, o.k);
  auto pk = parse_policy(o.policy.empty() ? default_policy(p.kind) : o.policy);
  auto adv = make_adversary(o.adversary.empty() ? default_adversary(p.kind) : o.adversary);
  auto pol = make_policy(pk, o.n);
  auto g = run_game(*pol, *adv, o.n, p.k, p.kind, o.max_rounds);
  auto violations = check_trace_invariants(g.trace);
  if (!o.trace.empty()) open_out(o.trace) << trace_json(g.trace).dump(2) << '\n';
  if (o.format == "json") {
    std::cout << trace_json(g.trace).dump(2) << '\n';
  } else {
    std::cout << "synergy " << o.synergy << " n " << o.n << " k " << o.k << " policy " << g.trace.policy
              << " adversary " << g.trace.adversary << '\n';
    if (!f.is_boolean())
      std::cout << "played as " << kind_name(p.kind) << " with k " << p.k << ", scale " << fmt(p.scale) << '\n';
    std::cout << "regret " << fmt(p.scale * Rational(g.trace.total_regret)) << '\n';
    std::cout << "rounds_to_lock " << g.trace.rounds_to_lock << '\n';
    std::cout << "lower " << g.bounds.lower << " upper " << g.bounds.upper << '\n';
    for (auto& v : g.verdicts) std::cout << v.bound << ' ' << v.value << ' ' << (v.holds ? "holds" : "violated") << '\n';
    std::cout << "locked " << fmt_matching(g.locked) << '\n';
  }
  for (auto& v : violations) std::cerr << "violation: " << v << '\n';
  return violations.empty() ? 0 : 1;
}

int cmd_sweep(const Options& o) {
  if (o.ns.empty()) throw FlagError("sweep needs --n");
  for (int n : o.ns) check_n(n);
  Kind kind = parse_kind(o.synergy);
  auto pk = parse_policy(o.policy.empty() ? default_policy(kind) : o.policy);
  std::string adv = o.adversary.empty() ? default_adversary(kind) : o.adversary;
  make_adversary(adv);  // validate the name before any work
  std::vector<Rational> alphas;
  for (auto& a : o.alphas) {
    auto r = parse_rational(a);
    if (r < 0 || r > 1) throw FlagError("--alpha must lie in [0,1]");
    alphas.push_back(r);
  }
  auto rule = [&](int n) {
    std::vector<int> ks;
    if (!o.ks.empty()) {
      for (int k : o.ks)
        if (k >= 0 && k <= n) ks.push_back(k);
    } else if (!alphas.empty()) {
      for (auto a : alphas) {
        Rational z = a * n;
        int k = n - static_cast<int>(z.numerator() / z.denominator());
        if (ks.empty() || ks.back() != k) ks.push_back(k);
      }
    } else {
      for (int k = 0; k <= n; ++k) ks.push_back(k);
    }
    return ks;
  };
  auto rows = sweep(pk, adv, o.ns, rule, kind, thread_count(), o.max_rounds);
  if (o.csv.empty()) {
    write_csv(std::cout, rows);
  } else {
    auto f = open_out(o.csv);
    write_csv(f, rows);
  }
  int bad = 0;
  for (auto& r : rows) {
    for (auto& v : r.violations) std::cerr << "n=" << r.n << " k=" << r.k << " violation: " << v << '\n';
    if (!r.error.empty()) std::cerr << "n=" << r.n << " k=" << r.k << " error: " << r.error << '\n';
    bad += !r.violations.empty() || !r.error.empty();
  }
  return bad ? 1 : 0;
}

int cmd_bounds(const Options& o) {
  if (!o.alpha.empty()) {
    auto a = parse_rational(o.alpha);
    if (a < 0 || a > 1) throw FlagError("--alpha must lie in [0,1]");
    if (parse_kind(o.synergy) != Kind::OR) throw FlagError("--alpha bounds are for --synergy or");
    std::cout << std::setprecision(10) << "alpha " << to_double(a) << " lower " << to_double(l_or_exact(a)) << " upper "
              << to_double(u_or_exact(a)) << '\n';
    return 0;
  }
  if (o.n >= 0) {
    check_n(o.n);
    std::vector<int> ks;
    if (o.k >= 0) ks.push_back(o.k);
    else
      for (int k = 0; k <= o.n; ++k) ks.push_back(k);
    std::cout << "synergy,n,k,alpha,s_opt,lower,upper\n" << std::setprecision(10);
    for (int k : ks) {
      if (k > o.n) throw FlagError("--k must lie in [0, n]");
      for (auto kind : {Kind::EQ, Kind::XOR, Kind::OR, Kind::AND}) {
        auto b = bounds_report(kind, o.n, k);
        std::cout << kind_name(kind) << ',' << o.n << ',' << k << ',' << b.alpha << ',' << b.s_opt << ',' << b.lower
                  << ',' << b.upper << '\n';
      }
    }
    return 0;
  }
  auto rows = bound_table(parse_rational(o.step));
  if (o.csv.empty()) {
    write_bound_table(std::cout, rows);
  } else {
    auto f = open_out(o.csv);
    write_bound_table(f, rows);
  }
  return 0;
}

int cmd_factorize(const Options& o) {
  check_n(o.n);
  if (o.n < 2) throw FlagError("--n must be at least 2");
  std::vector<Matching> f;
  if (o.factorization == "ring") f = ring_factorization(o.n);
  else if (o.factorization == "naive") f = naive_factorization(o.n);
  else if (o.factorization == "clique-first") f = clique_first_factorization(o.n);
  else throw FlagError("--factorization takes ring, naive or clique-first");
  for (auto& m : f) std::cout << fmt_matching(m) << '\n';
  return 0;
}

int cmd_solve(const Options& o) {
  check_n(o.n);
  if (o.k < 0 || o.k > o.n) throw FlagError("--k must lie in [0, n]");
  if (o.n > 12) throw FlagError("solve takes n <= 12");
  auto f = parse_synergy(o.synergy);
  try {
    auto g = minimax_regret(o.n, o.k, f, o.budget);
    std::cout << "value " << fmt(g.value) << '\n';
    std::cout << "first_move " << fmt_matching(g.first_move) << '\n';
    std::cout << "nodes " << g.nodes << '\n';
  } catch (const BudgetExceeded& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}

std::string hex(const std::string& s) {
  std::ostringstream os;
  for (unsigned char c : s) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(c);
  return os.str();
}

nlohmann::json graph_json(const LabeledGraph& g) {
  nlohmann::json j;
  j["key"] = hex(canonical_form(g));
  j["edges"] = nlohmann::json::array();
  for (auto [a, b] : g.edges()) j["edges"].push_back({a, b});
  return j;
}

int cmd_enumerate(const Options& o) {
  int n = o.n < 0 ? 10 : o.n;
  check_n(n);
  if (n > kMaxCanonVertices) throw FlagError("enumerate-r3 takes n <= 16");
  auto gs = enumerate_round3_graphs(n);
  nlohmann::json j;
  j["n"] = n;
  j["count"] = gs.size();
  j["graphs"] = nlohmann::json::array();
  for (auto& g : gs) {
    auto gj = graph_json(g);
    if (n == 10) gj["class"] = std::holds_alternative<IndepPair>(classify_104(g)) ? "indep-pair" : "hard";
    j["graphs"].push_back(gj);
  }
  std::cout << j.dump(1) << '\n';
  return 0;
}

int cmd_verify104(const Options& o) {
  try {
    auto gs = enumerate_round3_graphs(10);
    int pairs = 0, hard = 0, verified = 0;
    for (auto& g : gs) {
      if (std::holds_alternative<IndepPair>(classify_104(g))) {
        ++pairs;
        continue;
      }
      ++hard;
      auto rep = verify_hardcase_blue_edges(g, o.budget);
      verified += rep.holds;
      std::cout << "hard case " << hard << ": edges " << g.edge_count() << ", decompositions " << rep.decompositions
                << ", designated";
      for (auto [a, b] : rep.orbit) std::cout << ' ' << a << '-' << b;
      std::cout << ", " << (rep.holds ? "verified" : "FAILED " + rep.failure) << '\n';
    }
    auto c = certify_104(o.budget);
    std::cout << "graphs " << gs.size() << " indep-pair " << pairs << " hard " << hard << " verified " << verified
              << '\n';
    std::cout << "regret >= 7 for (10,4) and: " << (c.holds ? "certified" : "not certified") << '\n';
    return c.holds ? 0 : 1;
  } catch (const BudgetExceeded& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
}

// Reads one outcome line; "0 1 1" and "011" both work.
std::optional<OutcomeVector> parse_bits(const std::string& line, size_t want, std::string& err) {
  OutcomeVector o;
  for (char c : line) {
    if (c == '0' || c == '1') o.push_back(c - '0');
    else if (c != ' ' && c != '\t' && c != ',' && c != '\r') {
      err = "outcomes are 0/1 digits";
      return std::nullopt;
    }
  }
  if (o.size() != want) {
    err = "expected " + std::to_string(want) + " outcomes, got " + std::to_string(o.size());
    return std::nullopt;
  }
  return o;
}

int cmd_session(const Options& o) {
  check_n(o.n);
  if (o.k < 0 || o.k > o.n) throw FlagError("--k must lie in [0, n]");
  Kind kind = parse_kind(o.synergy);
  auto pol = make_policy(parse_policy(o.policy.empty() ? default_policy(kind) : o.policy), o.n);
  auto ks = make_knowledge(o.n, o.k, kind);
  std::vector<std::pair<Matching, OutcomeVector>> history;
  std::cout << "session: " << kind_name(kind) << " n " << o.n << " k " << o.k << " policy " << policy_name(pol->kind())
            << "\nenter one 0/1 outcome per team, q to stop\n";
  for (;;) {
    if (auto lock = optimal_matching_known(ks)) {
      std::cout << "locked after " << history.size() << " rounds: " << fmt_matching(*lock) << '\n';
      return 0;
    }
    Matching m = pol->next_matching(make_view(ks.graph, kind));
    for (;;) {
      std::cout << "round " << history.size() + 1 << ": " << fmt_matching(m) << "\n> " << std::flush;
      std::string line;
      if (!std::getline(std::cin, line) || line == "q") {
        std::cout << "\nstopped after " << history.size() << " rounds\n";
        return 0;
      }
      std::string err;
      auto out = parse_bits(line, m.size(), err);
      if (!out) {
        std::cout << "rejected: " << err << '\n';
        continue;
      }
      try {
        ks = observe(ks, m, *out);
      } catch (const std::exception&) {
        // Shortest prefix of earlier rounds that already contradicts this input.
        size_t r = 0;
        for (; r < history.size(); ++r) {
          try {
            auto probe = make_knowledge(o.n, o.k, kind);
            for (size_t i = 0; i <= r; ++i) probe = observe(probe, history[i].first, history[i].second);
            observe(probe, m, *out);
          } catch (const std::exception&) {
            break;
          }
        }
        if (r < history.size())
          std::cout << "rejected: inconsistent with round " << r + 1 << " and k = " << o.k << '\n';
        else
          std::cout << "rejected: no labeling with k = " << o.k << " ones gives these outcomes\n";
        continue;
      }
      history.push_back({m, *out});
      break;
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synergy_arena: team formation games under adaptive adversaries"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--synergy", o.synergy, "eq, xor, or, and, or general:v00,v01,v11");
    c->add_option("--policy", o.policy, "uniform, diverse, maxexploit, ring, naive, clique-first");
    c->add_option("--adversary", o.adversary, "eq-bipartite, xor-cycle, or-lb1..or-lb4, or-best, and-greedy, greedy:D");
    c->add_option("--max-rounds", o.max_rounds, "round cap (default 2n)");
  };

  auto* sim = app.add_subcommand("simulate", "play one game and report the regret");
  add_common(sim);
  sim->add_option("--n", o.n)->required();
  sim->add_option("--k", o.k)->required();
  sim->add_option("--trace", o.trace, "write the trace JSON here");
  sim->add_option("--format", o.format)->check(CLI::IsMember({"text", "json"}));

  auto* sw = app.add_subcommand("sweep", "one game per (n, k) cell, CSV out");
  add_common(sw);
  sw->add_option("--n", o.ns, "comma-separated n values")->required()->delimiter(',');
  sw->add_option("--k", o.ks, "comma-separated k values (default all)")->delimiter(',');
  sw->add_option("--alpha", o.alphas, "comma-separated alpha values, k = n - floor(alpha n)")->delimiter(',');
  sw->add_option("--csv", o.csv, "output path (default stdout)");

  auto* bo = app.add_subcommand("bounds", "bound formulas");
  bo->add_option("--synergy", o.synergy);
  bo->add_option("--alpha", o.alpha, "single alpha (OR)");
  bo->add_option("--n", o.n, "table for every synergy at this n");
  bo->add_option("--k", o.k);
  bo->add_option("--step", o.step, "alpha grid step for the OR table");
  bo->add_option("--csv", o.csv);

  auto* fa = app.add_subcommand("factorize", "print a factorization, one matching per line");
  fa->add_option("--n", o.n)->required();
  fa->add_option("--factorization", o.factorization)->check(CLI::IsMember({"ring", "naive", "clique-first"}));

  auto* so = app.add_subcommand("solve", "exact minimax regret");
  so->add_option("--synergy", o.synergy);
  so->add_option("--n", o.n)->required();
  so->add_option("--k", o.k)->required();
  so->add_option("--budget", o.budget, "node budget");

  auto* en = app.add_subcommand("enumerate-r3", "round-3 exploration graphs up to isomorphism");
  en->add_option("--n", o.n);

  auto* ve = app.add_subcommand("verify-104", "the (10,4) weakest-link checks");
  ve->add_option("--budget", o.budget, "node budget");

  auto* se = app.add_subcommand("session", "interactive: suggest matchings, read outcomes");
  se->add_option("--synergy", o.synergy);
  se->add_option("--policy", o.policy);
  se->add_option("--n", o.n)->required();
  se->add_option("--k", o.k)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim) return cmd_simulate(o);
    if (*sw) return cmd_sweep(o);
    if (*bo) return cmd_bounds(o);
    if (*fa) return cmd_factorize(o);
    if (*so) return cmd_solve(o);
    if (*en) return cmd_enumerate(o);
    if (*ve) return cmd_verify104(o);
    if (*se) return cmd_session(o);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

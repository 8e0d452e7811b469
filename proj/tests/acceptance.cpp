// One PASS/FAIL line per acceptance criterion. Exit status 1 if any criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "synergy/arena.hpp"
#include "synergy/bound_table.hpp"
#include "synergy/exact_lab.hpp"

using namespace syn;

namespace {

struct Result {
  bool pass = true;
  std::string detail;
  std::string first_failure;

  void fail(const std::string& why) {
    if (pass) first_failure = why;
    pass = false;
  }
};

using Clock = std::chrono::steady_clock;

int threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

std::string str(const Rational& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != 1) os << '/' << r.denominator();
  return os.str();
}

long long floor_div(long long a, long long b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

std::vector<int> even_ks(int n, int from) {
  std::vector<int> ks;
  for (int k = from; k <= n; k += 2) ks.push_back(k);
  return ks;
}

Result c1_eq() {
  Result r;
  int cells = 0;
  for (int n = 2; n <= 8; n += 2)
    for (int k = 0; k <= n; ++k, ++cells) {
      auto v = minimax_regret(n, k, Kind::EQ).value;
      long long want = 2 * (std::min(k, n - k) - k % 2);
      if (v != want) r.fail("n=" + std::to_string(n) + " k=" + std::to_string(k) + " value " + str(v));
    }
  r.detail = std::to_string(cells) + " cells";
  return r;
}

Result c2_xor() {
  Result r;
  int cells = 0;
  for (int n = 2; n <= 8; n += 2)
    for (int k = 0; k <= n; ++k, ++cells) {
      auto v = minimax_regret(n, k, Kind::XOR).value;
      if (v != regret_xor(n, k)) r.fail("n=" + std::to_string(n) + " k=" + std::to_string(k) + " value " + str(v));
    }
  r.detail = std::to_string(cells) + " cells";
  return r;
}

Result c3_and() {
  Result r;
  int cells = 0;
  for (int n = 2; n <= 8; n += 2) {
    // k = 0: every matching is optimal.
    if (minimax_regret(n, 0, Kind::AND).value != 0) r.fail("n=" + std::to_string(n) + " k=0 nonzero");
    for (int k : even_ks(n, 2)) {
      ++cells;
      auto v = minimax_regret(n, k, Kind::AND).value;
      if (v < n - k || v > u_and(n, k))
        r.fail("n=" + std::to_string(n) + " k=" + std::to_string(k) + " value " + str(v));
    }
  }
  r.detail = std::to_string(cells) + " cells with even k >= 2, k = 0 gives 0";
  return r;
}

void check_rows(Result& r, const std::vector<SweepRow>& rows, const std::function<bool(const SweepRow&)>& ok) {
  for (auto& row : rows) {
    std::string where = row.policy + " vs " + row.adversary + " n=" + std::to_string(row.n) + " k=" + std::to_string(row.k);
    if (!row.error.empty()) r.fail(where + ": " + row.error);
    else if (!ok(row)) r.fail(where + ": regret " + std::to_string(row.regret));
  }
}

Result c4_ring() {
  Result r;
  std::vector<int> ns;
  for (int n = 2; n <= 20; n += 2) ns.push_back(n);
  size_t games = 0;
  for (auto adv : {"and-greedy", "greedy:2"}) {
    auto rows = sweep(PolicyKind::RingWeaver, adv, ns, [](int n) { return even_ks(n, 0); }, Kind::AND, threads());
    games += rows.size();
    check_rows(r, rows, [](const SweepRow& s) { return s.regret <= u_and(s.n, s.k); });
  }
  for (auto pk : {PolicyKind::RingWeaver, PolicyKind::NaiveFactorization, PolicyKind::CliqueFirstFactorization}) {
    auto rows = sweep(pk, "and-greedy", ns, [](int n) { return even_ks(n, 2); }, Kind::AND, threads());
    games += rows.size();
    check_rows(r, rows, [](const SweepRow& s) { return s.regret >= s.n - s.k; });
  }
  r.detail = std::to_string(games) + " games";
  return r;
}

Result c5_cliques() {
  Result r;
  std::ostringstream d;
  for (int n : {6, 10}) {
    auto g = run_game(PolicyKind::CliqueFirstFactorization, "and-greedy", n, 2, Kind::AND);
    d << "n=" << n << " regret " << g.trace.total_regret << " (need " << 2 * (n - 3) << ") ";
    if (g.trace.total_regret < 2 * (n - 2 - 1)) r.fail("n=" + std::to_string(n));
  }
  r.detail = d.str();
  return r;
}

Result c6_round3() {
  Result r;
  auto gs = enumerate_round3_graphs(10);
  int pairs = 0, hard = 0, verified = 0;
  for (auto& g : gs) {
    if (std::holds_alternative<IndepPair>(classify_104(g))) {
      ++pairs;
    } else {
      ++hard;
      verified += verify_hardcase_blue_edges(g).holds;
    }
  }
  auto cert = certify_104();
  if (gs.size() != 102) r.fail("graphs " + std::to_string(gs.size()));
  if (pairs != 97 || hard != 5) r.fail("classes " + std::to_string(pairs) + "/" + std::to_string(hard));
  if (verified != hard) r.fail("blue-edge check passed on " + std::to_string(verified));
  if (!cert.holds) r.fail("regret >= 7 not certified");
  r.detail = std::to_string(gs.size()) + " graphs, " + std::to_string(pairs) + " indep-pair, " + std::to_string(hard) +
             " hard, " + std::to_string(verified) + " verified, >= 7 " + (cert.holds ? "certified" : "open");
  return r;
}

Result c7_or_lower() {
  Result r;
  size_t games = 0;
  std::vector<int> ns;
  for (int n = 2; n <= 40; n += 2) ns.push_back(n);
  auto half = [](int n) {
    std::vector<int> ks;
    for (int k = 0; 2 * k <= n; ++k) ks.push_back(k);
    return ks;
  };
  for (auto pk : {PolicyKind::MaxExploit, PolicyKind::NaiveFactorization, PolicyKind::CliqueFirstFactorization}) {
    auto rows = sweep(pk, "or-lb2", ns, half, Kind::OR, threads());
    games += rows.size();
    check_rows(r, rows, [](const SweepRow& s) { return s.regret >= s.k / 2; });
  }
  auto lb1 = run_game(PolicyKind::MaxExploit, "or-lb1", 34, 17, Kind::OR);
  ++games;
  if (lb1.trace.total_regret < 13) r.fail("LB1 (34,17) regret " + std::to_string(lb1.trace.total_regret));
  // alpha n = z zeros; LB3 needs z divisible by 3, LB4 by 4.
  for (int n = 12; n <= 48; n += 12)
    for (int z = (n + 1) / 2; z <= n; ++z) {
      int k = n - z;
      if (z % 3 == 0) {
        ++games;
        long long want = floor_div(3LL * n - 4LL * z, 3);
        auto g = run_game(PolicyKind::MaxExploit, "or-lb3", n, k, Kind::OR);
        if (g.trace.total_regret < want)
          r.fail("LB3 n=" + std::to_string(n) + " k=" + std::to_string(k) + " regret " + std::to_string(g.trace.total_regret));
      }
      if (z % 4 == 0) {
        ++games;
        long long want = floor_div(6LL * n - 9LL * z, 4);
        auto g = run_game(PolicyKind::MaxExploit, "or-lb4", n, k, Kind::OR);
        if (g.trace.total_regret < want)
          r.fail("LB4 n=" + std::to_string(n) + " k=" + std::to_string(k) + " regret " + std::to_string(g.trace.total_regret));
      }
    }
  r.detail = std::to_string(games) + " games, LB1 (34,17) regret " + std::to_string(lb1.trace.total_regret);
  return r;
}

Result c8_or_upper() {
  Result r;
  std::vector<int> ns;
  for (int n = 20; n <= 200; n += 20) ns.push_back(n);
  auto grid = [](int n) {
    std::vector<int> ks;
    for (int i = 0; i <= 20; ++i) ks.push_back(n - n * i / 20);  // alpha = i/20
    return ks;
  };
  size_t games = 0, violations = 0;
  long long worst_slack = -1000000;
  for (auto adv : {"or-lb1", "or-lb2", "or-lb3", "or-lb4", "or-best"}) {
    auto rows = sweep(PolicyKind::MaxExploit, adv, ns, grid, Kind::OR, threads());
    games += rows.size();
    for (auto& s : rows) {
      Rational a(s.n - s.k, s.n);
      Rational u = u_or_exact(a) * s.n;
      long long cap = floor_div(u.numerator(), u.denominator()) + (u.denominator() != 1) + 3;
      worst_slack = std::max(worst_slack, s.regret - (cap - 3));
      std::string where = std::string(adv) + " n=" + std::to_string(s.n) + " k=" + std::to_string(s.k);
      if (!s.error.empty()) r.fail(where + ": " + s.error);
      else if (s.regret > cap) r.fail(where + ": regret " + std::to_string(s.regret) + " > " + std::to_string(cap));
      if (!s.violations.empty()) {
        violations += s.violations.size();
        r.fail(where + ": " + s.violations[0]);
      }
    }
  }
  // Small explicit states: the exact greedy adversary too.
  for (int n = 20; n <= 40; n += 20)
    for (int k : {1, 2, 3, n - 2, n - 1}) {
      if (binomial(n, k) > 2000) continue;
      auto g = run_game(PolicyKind::MaxExploit, "greedy:1", n, k, Kind::OR);
      ++games;
      Rational u = u_or_exact(Rational(n - k, n)) * n;
      long long cap = floor_div(u.numerator(), u.denominator()) + (u.denominator() != 1) + 3;
      if (g.trace.total_regret > cap) r.fail("greedy:1 n=" + std::to_string(n) + " k=" + std::to_string(k));
      auto v = check_trace_invariants(g.trace);
      violations += v.size();
      if (!v.empty()) r.fail("greedy:1 n=" + std::to_string(n) + ": " + v[0]);
    }
  r.detail = std::to_string(games) + " games, max regret over ceil(U n) " + std::to_string(worst_slack) + ", " +
             std::to_string(violations) + " invariant violations";
  return r;
}

Result c9_ring_factorization() {
  Result r;
  for (int n = 4; n <= 64; n += 2) {
    int m = n / 2;
    auto sched = ring_schedule(n);
    std::vector<std::vector<int>> used(n, std::vector<int>(n, 0));
    if (static_cast<int>(sched.size()) != n - 1) r.fail("n=" + std::to_string(n) + " has " + std::to_string(sched.size()));
    for (auto& rr : sched) {
      if (!rr.m.is_perfect(n)) r.fail("n=" + std::to_string(n) + " imperfect matching");
      for (auto [a, b] : rr.m.pairs) {
        ++used[a][b];
        int d = std::abs(a / 2 - b / 2);
        if (std::min(d, m - d) != rr.phase) r.fail("n=" + std::to_string(n) + " phase mismatch");
      }
    }
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (used[a][b] != 1) r.fail("n=" + std::to_string(n) + " edge used " + std::to_string(used[a][b]) + " times");
  }
  r.detail = "n = 4..64";
  return r;
}

Result c10_reduction() {
  Result r;
  std::vector<std::pair<std::string, Synergy>> fs = {
      {"eq*3", Synergy::general(5, 2, 5)},
      {"or", Synergy::general(0, 1, 1)},
      {"nor", Synergy::general(1, 0, 0)},
      {"nand", Synergy::general(1, 1, 0)},
      {"and*4+3", Synergy::general(3, 3, 7)},
      {"xor*3-1", Synergy::general(-1, 2, -1)},
      {"or*3+2", Synergy::general(2, 5, 5)},
      {"xnor/2", Synergy::general(Rational(1, 2), 0, Rational(1, 2))},
      {"xor/3", Synergy::general(Rational(1, 3), Rational(2, 3), Rational(1, 3))},
      {"and*-2 swapped", Synergy::general(0, -2, -2)},
  };
  int checks = 0;
  for (auto& [name, f] : fs)
    for (auto [n, k] : {std::pair{4, 2}, std::pair{6, 2}, std::pair{6, 4}}) {
      ++checks;
      auto c = reduction_check(n, k, f);
      if (!c.holds)
        r.fail(name + " n=" + std::to_string(n) + " k=" + std::to_string(k) + ": " + str(c.general_value) + " vs " +
               str(c.scale) + "*" + str(c.boolean_value));
    }
  r.detail = std::to_string(checks) + " exact comparisons";
  return r;
}

Result c11_bound_table() {
  Result r;
  auto rows = bound_table(Rational(1, 10000));
  Rational worst = 0, worst_at = 0;
  bool equal_above = true;
  for (auto& row : rows) {
    Rational gap = row.upper - row.lower;
    if (gap > worst) {
      worst = gap;
      worst_at = row.alpha;
    }
    if (row.alpha >= Rational(10, 19) && gap != 0) equal_above = false;
  }
  std::ostringstream d;
  d << "max gap " << to_double(worst) << " at alpha " << to_double(worst_at);
  if (!(worst < Rational(18, 1000))) r.fail("gap " + std::to_string(to_double(worst)) + " >= 0.018");
  if (!equal_above) r.fail("bounds differ above 10/19");
  // Sawtooth: alpha = i/100, n = 6000 keeps alpha n / z integral for z = 2..5. The z <= 5 peaks
  // describe the sawtooth on zz >= alpha n / 5, the range left by the zz_1 lower bound; the
  // unrestricted scan is reported alongside.
  int matched = 0, unrestricted = 0;
  const int n = 6000;
  for (int i = 51; i <= 100; ++i) {
    double a = i / 100.0;
    int zeros = 60 * i;
    double best = -1e18;
    int arg = -1;
    double best_all = -1e18;
    for (int zz = 1; 2 * zz <= zeros; ++zz) {
      double v = f_alpha_sawtooth(a, n, zz);
      best_all = std::max(best_all, v);
      if (5 * zz >= zeros && v > best + 1e-9) {
        best = v;
        arg = zz;
      }
    }
    double peak = -1e18;
    std::set<int> peak_args;
    for (int z = 2; z <= 5; ++z) peak = std::max(peak, sawtooth_peak(a, n, z));
    for (int z = 2; z <= 5; ++z)
      if (std::abs(sawtooth_peak(a, n, z) - peak) < 1e-6) peak_args.insert(zeros / z);
    bool ok = std::abs(best - peak) < 1e-6 && (peak_args.count(arg) || std::abs(f_alpha_sawtooth(a, n, *peak_args.begin()) - best) < 1e-6);
    matched += ok;
    unrestricted += std::abs(best_all - peak) < 1e-6;
    if (!ok) r.fail("sawtooth alpha=" + std::to_string(a));
  }
  d << ", equality above 10/19 " << (equal_above ? "holds" : "fails") << ", sawtooth on zz >= alpha n/5 " << matched << "/50 (unrestricted " << unrestricted << "/50)";
  r.detail = d.str();
  return r;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Result()> run;
  };
  std::vector<Criterion> cs = {
      {1, "EQ tightness", 300, c1_eq},
      {2, "XOR tightness", 300, c2_xor},
      {3, "AND sandwich", 900, c3_and},
      {4, "RingWeaver guarantee", 300, c4_ring},
      {5, "clique-first blow-up", 0, c5_cliques},
      {6, "(10,4) round-3 graphs", 3600, c6_round3},
      {7, "OR lower bounds", 0, c7_or_lower},
      {8, "MaxExploit upper bounds", 600, c8_or_upper},
      {9, "ring factorization", 60, c9_ring_factorization},
      {10, "reduction", 0, c10_reduction},
      {11, "bound table", 0, c11_bound_table},
  };
  int failed = 0;
  for (auto& c : cs) {
    auto t0 = Clock::now();
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r.fail(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (c.limit_s > 0 && secs > c.limit_s) r.fail("took " + std::to_string(secs) + " s");
    failed += !r.pass;
    std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << r.detail;
    if (!r.pass) std::cout << "; first failure: " << r.first_failure;
    std::cout << " [" << std::fixed << std::setprecision(1) << secs << " s]" << std::defaultfloat << std::endl;
  }
  return failed ? 1 : 0;
}

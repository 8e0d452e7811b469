#pragma once

#include <algorithm>
#include <limits>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

namespace boost {
// C++20 rewritten comparison candidates send rational<long long> == integer into endless recursion
// on Boost 1.74; exact-match overloads take precedence.
inline bool operator==(const rational<long long>& a, long long b) { return a.numerator() == b && a.denominator() == 1; }
inline bool operator==(const rational<long long>& a, int b) { return a == static_cast<long long>(b); }
inline bool operator==(long long b, const rational<long long>& a) { return a == b; }
inline bool operator==(int b, const rational<long long>& a) { return a == static_cast<long long>(b); }
inline bool operator!=(const rational<long long>& a, long long b) { return !(a == b); }
inline bool operator!=(const rational<long long>& a, int b) { return !(a == b); }
inline bool operator!=(long long b, const rational<long long>& a) { return !(a == b); }
inline bool operator!=(int b, const rational<long long>& a) { return !(a == b); }
}  // namespace boost

namespace syn {

using Rational = boost::rational<long long>;

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

enum class Kind { EQ, XOR, OR, AND, GENERAL };

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::EQ: return "eq";
    case Kind::XOR: return "xor";
    case Kind::OR: return "or";
    case Kind::AND: return "and";
    case Kind::GENERAL: return "general";
  }
  return "?";
}

// Symmetric map {0,1}^2 -> Q. Boolean kinds carry their 0/1 table.
struct Synergy {
  Kind kind = Kind::EQ;
  Rational v00 = 1, v01 = 0, v11 = 1;

  static Synergy boolean(Kind k) {
    Synergy s;
    s.kind = k;
    switch (k) {
      case Kind::EQ: s.v00 = 1; s.v01 = 0; s.v11 = 1; break;
      case Kind::XOR: s.v00 = 0; s.v01 = 1; s.v11 = 0; break;
      case Kind::OR: s.v00 = 0; s.v01 = 1; s.v11 = 1; break;
      case Kind::AND: s.v00 = 0; s.v01 = 0; s.v11 = 1; break;
      case Kind::GENERAL: throw std::invalid_argument("boolean(GENERAL)");
    }
    return s;
  }
  static Synergy general(Rational a, Rational b, Rational c) {
    Synergy s;
    s.kind = Kind::GENERAL;
    s.v00 = a; s.v01 = b; s.v11 = c;
    return s;
  }
  bool is_boolean() const { return kind != Kind::GENERAL; }
  Rational value(int a, int b) const {
    int s = a + b;
    return s == 0 ? v00 : (s == 1 ? v01 : v11);
  }
  int bit(int a, int b) const { return value(a, b) == 0 ? 0 : 1; }
};

struct TypeVector {
  std::vector<uint8_t> types;

  TypeVector() = default;
  explicit TypeVector(std::vector<uint8_t> t) : types(std::move(t)) {
    for (auto x : types)
      if (x > 1) throw std::invalid_argument("type must be 0 or 1");
  }
  static TypeVector from_string(const std::string& s) {
    std::vector<uint8_t> t;
    for (char c : s) {
      if (c != '0' && c != '1') throw std::invalid_argument("bad type string");
      t.push_back(static_cast<uint8_t>(c - '0'));
    }
    return TypeVector(std::move(t));
  }
  static TypeVector from_mask(uint64_t mask, int n) {
    std::vector<uint8_t> t(n);
    for (int i = 0; i < n; ++i) t[i] = (mask >> i) & 1u;
    return TypeVector(std::move(t));
  }
  int n() const { return static_cast<int>(types.size()); }
  int ones() const { return static_cast<int>(std::count(types.begin(), types.end(), uint8_t{1})); }
  int operator[](int i) const { return types[i]; }
  std::string str() const {
    std::string s;
    for (auto x : types) s.push_back(static_cast<char>('0' + x));
    return s;
  }
};

using Pair = std::pair<int, int>;

// Perfect matching, kept in canonical form: (min,max) pairs in lexicographic order.
struct Matching {
  std::vector<Pair> pairs;

  Matching() = default;
  explicit Matching(std::vector<Pair> p) : pairs(std::move(p)) { canonicalize(); }

  void canonicalize() {
    for (auto& p : pairs)
      if (p.first > p.second) std::swap(p.first, p.second);
    std::sort(pairs.begin(), pairs.end());
  }
  int n() const { return static_cast<int>(pairs.size()) * 2; }
  size_t size() const { return pairs.size(); }
  bool is_perfect(int n) const {
    if (static_cast<int>(pairs.size()) * 2 != n) return false;
    std::vector<char> seen(n, 0);
    for (auto [a, b] : pairs) {
      if (a < 0 || b < 0 || a >= n || b >= n || a == b) return false;
      if (seen[a] || seen[b]) return false;
      seen[a] = seen[b] = 1;
    }
    return true;
  }
  void validate(int n) const {
    if (!is_perfect(n)) throw std::invalid_argument("not a perfect matching on " + std::to_string(n) + " agents");
  }
  std::vector<int> partner(int n) const {
    std::vector<int> p(n, -1);
    for (auto [a, b] : pairs) { p[a] = b; p[b] = a; }
    return p;
  }
  bool contains(int a, int b) const {
    if (a > b) std::swap(a, b);
    return std::binary_search(pairs.begin(), pairs.end(), Pair{a, b});
  }
  bool operator==(const Matching& o) const { return pairs == o.pairs; }
  bool operator<(const Matching& o) const { return pairs < o.pairs; }
};

// (0,1),(2,3),...
inline Matching lexicographic_matching(int n) {
  std::vector<Pair> p;
  for (int i = 0; i + 1 < n; i += 2) p.push_back({i, i + 1});
  return Matching(std::move(p));
}

// Per-pair Boolean outputs aligned with Matching::pairs.
using OutcomeVector = std::vector<int>;

inline void check_even(int n) {
  if (n < 0 || n % 2 != 0) throw std::invalid_argument("n must be even and nonnegative");
}
inline void check_nk(int n, int k) {
  check_even(n);
  if (k < 0 || k > n) throw std::invalid_argument("k must lie in [0, n]");
}

inline Rational score(const Matching& m, const TypeVector& t, const Synergy& f) {
  if (m.n() != t.n()) throw std::invalid_argument("matching and type vector sizes differ");
  Rational s = 0;
  for (auto [a, b] : m.pairs) s += f.value(t[a], t[b]);
  return s;
}

inline OutcomeVector outcomes(const Matching& m, const TypeVector& t, const Synergy& f) {
  if (m.n() != t.n()) throw std::invalid_argument("matching and type vector sizes differ");
  OutcomeVector o;
  o.reserve(m.size());
  for (auto [a, b] : m.pairs) o.push_back(f.bit(t[a], t[b]));
  return o;
}

// Best score over all matchings: choose the number q of mixed pairs (q = k mod 2, ..., min(k, n-k)).
inline Rational optimal_score(int n, int k, const Synergy& f) {
  check_nk(n, k);
  switch (f.kind) {
    case Kind::EQ: return Rational(n / 2 - (k % 2));
    case Kind::XOR: return Rational(std::min(k, n - k));
    case Kind::OR: return Rational(std::min(k, n / 2));
    case Kind::AND: return Rational(k / 2);
    case Kind::GENERAL: break;
  }
  Rational best;
  bool first = true;
  for (int q = k % 2; q <= std::min(k, n - k); q += 2) {
    Rational s = f.v11 * ((k - q) / 2) + f.v01 * q + f.v00 * ((n - k - q) / 2);
    if (first || s > best) best = s;
    first = false;
  }
  return best;
}

inline Rational round_regret(const Matching& m, const OutcomeVector& o, int n, int k, const Synergy& f) {
  if (o.size() != m.size() || m.n() != n) throw std::invalid_argument("outcome length mismatch");
  if (!f.is_boolean()) throw std::invalid_argument("round_regret takes Boolean outcomes");
  long long s = 0;
  for (int x : o) s += x;
  return optimal_score(n, k, f) - Rational(s);
}

// ---- reduction of general synergies ----

enum class ReducedKind { EQ, XOR, AND, OR, CONSTANT, THREE_VALUED };
enum class ThreeRegime { NONE, TRIVIAL, ONE_ROUND, EQ_EQUIVALENT };

inline const char* reduced_name(ReducedKind k) {
  switch (k) {
    case ReducedKind::EQ: return "eq";
    case ReducedKind::XOR: return "xor";
    case ReducedKind::AND: return "and";
    case ReducedKind::OR: return "or";
    case ReducedKind::CONSTANT: return "constant";
    case ReducedKind::THREE_VALUED: return "three-valued";
  }
  return "?";
}

struct Reduction {
  ReducedKind kind = ReducedKind::CONSTANT;
  Rational scale = 0;   // u - l
  Rational offset = 0;  // g = f/scale + offset
  bool labels_swapped = false;
  ThreeRegime regime = ThreeRegime::NONE;
  Rational normalized_mixed = 0;  // f(0,1) after mapping f(0,0)->0, f(1,1)->1 (three-valued only)

  Kind boolean_kind() const {
    switch (kind) {
      case ReducedKind::EQ: return Kind::EQ;
      case ReducedKind::XOR: return Kind::XOR;
      case ReducedKind::AND: return Kind::AND;
      case ReducedKind::OR: return Kind::OR;
      default: throw std::logic_error("reduction has no Boolean kind");
    }
  }
};

inline Reduction reduce_synergy(const Synergy& f) {
  Reduction r;
  Rational a = f.v00, b = f.v01, c = f.v11;
  if (a > c) {
    std::swap(a, c);
    r.labels_swapped = true;
  }
  std::vector<Rational> vals{a, b, c};
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  if (vals.size() == 1) {
    r.kind = ReducedKind::CONSTANT;
    r.labels_swapped = false;
    return r;
  }
  if (vals.size() == 3) {
    r.kind = ReducedKind::THREE_VALUED;
    r.scale = c - a;
    r.offset = -a / r.scale;
    r.normalized_mixed = (b - a) / r.scale;
    if (r.normalized_mixed == Rational(1, 2)) r.regime = ThreeRegime::TRIVIAL;
    else if (r.normalized_mixed > Rational(1, 2)) r.regime = ThreeRegime::ONE_ROUND;
    else r.regime = ThreeRegime::EQ_EQUIVALENT;
    return r;
  }
  Rational lo = vals[0], hi = vals[1];
  r.scale = hi - lo;
  r.offset = -lo / r.scale;
  int g00 = a == hi, g01 = b == hi, g11 = c == hi;
  if (g00 && !g01 && g11) r.kind = ReducedKind::EQ;
  else if (!g00 && g01 && !g11) r.kind = ReducedKind::XOR;
  else if (!g00 && !g01 && g11) r.kind = ReducedKind::AND;
  else if (!g00 && g01 && g11) r.kind = ReducedKind::OR;
  else throw std::logic_error("unreachable two-valued table");
  return r;
}

// ---- bound formulas ----

inline int regret_eq(int n, int k) {
  check_nk(n, k);
  return 2 * (std::min(k, n - k) - (k % 2));
}

inline int regret_xor(int n, int k) {
  check_nk(n, k);
  return 2 * std::max(0, std::min(k, n - k) - 1 - (k % 2));
}

inline void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0,1]");
}

inline double l_or(double alpha) {
  check_alpha(alpha);
  if (alpha <= 0.5) return 13.0 * alpha / 17.0;
  if (alpha <= 6.0 / 11.0) return (6.0 - 9.0 * alpha) / 4.0;
  if (alpha <= 3.0 / 5.0) return (3.0 - 4.0 * alpha) / 3.0;
  return (1.0 - alpha) / 2.0;
}

inline double u_or(double alpha) {
  check_alpha(alpha);
  if (alpha <= 0.5) return 4.0 * alpha / 5.0;
  if (alpha < 10.0 / 19.0) return (10.0 - 16.0 * alpha) / 5.0;
  if (alpha < 6.0 / 11.0) return (6.0 - 9.0 * alpha) / 4.0;
  if (alpha < 3.0 / 5.0) return (3.0 - 4.0 * alpha) / 3.0;
  return (1.0 - alpha) / 2.0;
}

// Exact variants on rationals, used where integer comparisons must not round.
inline Rational l_or_exact(Rational a) {
  if (a < 0 || a > 1) throw std::invalid_argument("alpha must lie in [0,1]");
  if (a <= Rational(1, 2)) return Rational(13, 17) * a;
  if (a <= Rational(6, 11)) return (Rational(6) - 9 * a) / 4;
  if (a <= Rational(3, 5)) return (Rational(3) - 4 * a) / 3;
  return (Rational(1) - a) / 2;
}

inline Rational u_or_exact(Rational a) {
  if (a < 0 || a > 1) throw std::invalid_argument("alpha must lie in [0,1]");
  if (a <= Rational(1, 2)) return Rational(4, 5) * a;
  if (a < Rational(10, 19)) return (Rational(10) - 16 * a) / 5;
  if (a < Rational(6, 11)) return (Rational(6) - 9 * a) / 4;
  if (a < Rational(3, 5)) return (Rational(3) - 4 * a) / 3;
  return (Rational(1) - a) / 2;
}

inline int l_and(int n, int k) {
  check_nk(n, k);
  if (k == 0) return 0;  // no 1-agents: every matching is optimal
  return n - k;
}

inline int u_and(int n, int k) {
  check_nk(n, k);
  return n - k + std::min(k, n - k) / 4;
}

inline double f_alpha_sawtooth(double alpha, int n, int zz) {
  if (!(alpha > 0.5 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (1/2, 1]");
  if (zz < 1 || zz > alpha * n / 2.0 + 1e-9) throw std::invalid_argument("zz out of range");
  double q = std::floor(static_cast<double>(n) / (2.0 * zz));
  return q * (n / 2.0 - alpha * n) + std::min(q * zz, alpha * n - zz);
}

// (z-1)(1/2 - alpha + alpha/z) n
inline double sawtooth_peak(double alpha, int n, int z) {
  return (z - 1) * (0.5 - alpha + alpha / z) * n;
}

struct BoundsReport {
  Kind kind = Kind::EQ;
  int n = 0, k = 0;
  double alpha = 0;
  double s_opt = 0;
  double lower = 0;
  double upper = 0;
};

inline BoundsReport bounds_report(Kind kind, int n, int k) {
  check_nk(n, k);
  BoundsReport b;
  b.kind = kind;
  b.n = n;
  b.k = k;
  b.alpha = n == 0 ? 0.0 : static_cast<double>(n - k) / n;
  b.s_opt = to_double(optimal_score(n, k, Synergy::boolean(kind)));
  switch (kind) {
    case Kind::EQ: b.lower = b.upper = regret_eq(n, k); break;
    case Kind::XOR: b.lower = b.upper = regret_xor(n, k); break;
    case Kind::OR: b.lower = l_or(b.alpha) * n; b.upper = u_or(b.alpha) * n; break;
    case Kind::AND: b.lower = l_and(n, k); b.upper = u_and(n, k); break;
    case Kind::GENERAL: throw std::invalid_argument("bounds_report needs a Boolean kind");
  }
  return b;
}

inline long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  // Saturates at LLONG_MAX; the running product only grows for k <= n/2.
  __int128 r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > std::numeric_limits<long long>::max()) return std::numeric_limits<long long>::max();
  }
  return static_cast<long long>(r);
}

}  // namespace syn

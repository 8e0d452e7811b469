#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/dynamic_bitset.hpp>

namespace syn {

using Bits = boost::dynamic_bitset<>;

// Undirected simple graph with bitset rows.
struct Graph {
  int n = 0;
  std::vector<Bits> adj;

  Graph() = default;
  explicit Graph(int n_) : n(n_), adj(n_, Bits(n_)) {}

  void add_edge(int u, int v) {
    if (u == v) return;
    adj[u].set(v);
    adj[v].set(u);
  }
  bool has_edge(int u, int v) const { return adj[u].test(v); }
  int degree(int v) const { return static_cast<int>(adj[v].count()); }
};

inline Graph cycle_graph(int n) {
  Graph g(n);
  for (int i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
  return g;
}

inline Graph complete_graph(int n) {
  Graph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.add_edge(i, j);
  return g;
}

// Connected components of the subgraph induced on `verts`.
inline std::vector<std::vector<int>> components(const Graph& g, const Bits& verts) {
  std::vector<std::vector<int>> out;
  Bits left = verts;
  for (auto s = left.find_first(); s != Bits::npos; s = left.find_first()) {
    std::vector<int> comp;
    std::vector<int> stack{static_cast<int>(s)};
    left.reset(s);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      Bits nb = g.adj[v] & left;
      for (auto w = nb.find_first(); w != Bits::npos; w = nb.find_next(w)) {
        left.reset(w);
        stack.push_back(static_cast<int>(w));
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

namespace detail {

struct MisSearch {
  const Graph& g;
  int target;  // stop once this many are found (or -1 for maximum)
  int best = -1;
  std::vector<int> best_set;
  std::vector<int> cur;
  long long nodes = 0;

  MisSearch(const Graph& g_, int t) : g(g_), target(t) {}

  bool done() const { return target >= 0 && best >= target; }

  void run(Bits P) {
    if (done()) return;
    ++nodes;
    size_t pushed = 0;
    // degree <= 1 vertices can always be taken
    for (bool again = true; again;) {
      again = false;
      for (auto v = P.find_first(); v != Bits::npos; v = P.find_next(v)) {
        Bits nb = g.adj[v] & P;
        if (nb.count() <= 1) {
          cur.push_back(static_cast<int>(v));
          ++pushed;
          P.reset(v);
          P -= nb;
          again = true;
          break;
        }
      }
    }
    int size = static_cast<int>(cur.size());
    int rest = static_cast<int>(P.count());
    if (rest == 0) {
      if (size > best) {
        best = size;
        best_set = cur;
      }
    } else if (size + rest > best) {
      size_t pick = Bits::npos;
      size_t pick_deg = 0;
      for (auto v = P.find_first(); v != Bits::npos; v = P.find_next(v)) {
        size_t d = (g.adj[v] & P).count();
        if (pick == Bits::npos || d > pick_deg) {
          pick = v;
          pick_deg = d;
        }
      }
      Bits with = P;
      with.reset(pick);
      with -= g.adj[pick];
      cur.push_back(static_cast<int>(pick));
      run(with);
      cur.pop_back();
      if (!done()) {
        Bits without = P;
        without.reset(pick);
        run(without);
      }
    }
    for (size_t i = 0; i < pushed; ++i) cur.pop_back();
  }
};

}  // namespace detail

// Exact maximum independent set of the subgraph induced on `verts`, solved per component.
inline std::vector<int> maximum_independent_set(const Graph& g, const Bits& verts) {
  std::vector<int> out;
  for (auto& comp : components(g, verts)) {
    Bits P(g.n);
    for (int v : comp) P.set(v);
    detail::MisSearch s(g, -1);
    s.run(P);
    out.insert(out.end(), s.best_set.begin(), s.best_set.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<int> maximum_independent_set(const Graph& g) {
  Bits all(g.n);
  all.set();
  return maximum_independent_set(g, all);
}

inline int independence_number(const Graph& g, const Bits& verts) {
  return static_cast<int>(maximum_independent_set(g, verts).size());
}

// Independent set of exactly `size` vertices inside `verts`, if one exists.
inline std::optional<std::vector<int>> independent_set_of_size(const Graph& g, const Bits& verts, int size) {
  if (size < 0) return std::nullopt;
  if (size == 0) return std::vector<int>{};
  std::vector<int> acc;
  int remaining = size;
  for (auto& comp : components(g, verts)) {
    if (remaining <= 0) break;
    Bits P(g.n);
    for (int v : comp) P.set(v);
    detail::MisSearch s(g, remaining);
    s.run(P);
    int take = std::min(remaining, s.best);
    acc.insert(acc.end(), s.best_set.begin(), s.best_set.begin() + take);
    remaining -= take;
  }
  if (remaining > 0) return std::nullopt;
  std::sort(acc.begin(), acc.end());
  return acc;
}

inline std::optional<std::vector<int>> independent_set_of_size(const Graph& g, int size) {
  Bits all(g.n);
  all.set();
  return independent_set_of_size(g, all, size);
}

inline bool is_independent(const Graph& g, const std::vector<int>& s) {
  for (size_t i = 0; i < s.size(); ++i)
    for (size_t j = i + 1; j < s.size(); ++j)
      if (g.has_edge(s[i], s[j])) return false;
  return true;
}

// Greedy independent set: repeatedly delete a maximum-degree vertex until no edges remain.
inline std::vector<int> greedy_independent_set(const Graph& g, const Bits& verts) {
  Bits P = verts;
  for (;;) {
    size_t pick = Bits::npos, pick_deg = 0;
    for (auto v = P.find_first(); v != Bits::npos; v = P.find_next(v)) {
      size_t d = (g.adj[v] & P).count();
      if (d > pick_deg) {
        pick = v;
        pick_deg = d;
      }
    }
    if (pick == Bits::npos) break;
    P.reset(pick);
  }
  std::vector<int> out;
  for (auto v = P.find_first(); v != Bits::npos; v = P.find_next(v)) out.push_back(static_cast<int>(v));
  return out;
}

// Proper 2-coloring of the subgraph induced on verts; nullopt when an odd cycle exists.
inline std::optional<std::vector<int>> two_coloring(const Graph& g, const Bits& verts) {
  std::vector<int> color(g.n, -1);
  for (auto& comp : components(g, verts)) {
    color[comp[0]] = 0;
    std::vector<int> stack{comp[0]};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      Bits nb = g.adj[v] & verts;
      for (auto w = nb.find_first(); w != Bits::npos; w = nb.find_next(w)) {
        if (color[w] < 0) {
          color[w] = 1 - color[v];
          stack.push_back(static_cast<int>(w));
        } else if (color[w] == color[v]) {
          return std::nullopt;
        }
      }
    }
  }
  return color;
}

// ---- canonical labeling for small edge-labeled graphs ----

constexpr int kMaxCanonVertices = 16;

// Edge-labeled graph on at most 16 vertices; label 0 means no edge.
struct LabeledGraph {
  int n = 0;
  std::array<std::array<uint8_t, kMaxCanonVertices>, kMaxCanonVertices> a{};

  LabeledGraph() = default;
  explicit LabeledGraph(int n_) : n(n_) {
    if (n_ > kMaxCanonVertices) throw std::invalid_argument("canonical form limited to 16 vertices");
  }
  void set(int u, int v, uint8_t label) {
    a[u][v] = label;
    a[v][u] = label;
  }
  uint8_t get(int u, int v) const { return a[u][v]; }
  int edge_count() const {
    int c = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) c += a[i][j] != 0;
    return c;
  }
  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (a[i][j]) e.push_back({i, j});
    return e;
  }
  LabeledGraph permuted(const std::vector<int>& perm) const {
    // vertex v is renamed perm[v]
    LabeledGraph h(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) h.a[perm[i]][perm[j]] = a[i][j];
    return h;
  }
  bool operator==(const LabeledGraph& o) const {
    if (n != o.n) return false;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (a[i][j] != o.a[i][j]) return false;
    return true;
  }
};

inline Graph to_graph(const LabeledGraph& lg) {
  Graph g(lg.n);
  for (int i = 0; i < lg.n; ++i)
    for (int j = i + 1; j < lg.n; ++j)
      if (lg.a[i][j]) g.add_edge(i, j);
  return g;
}

namespace detail {

using Cells = std::vector<std::vector<int>>;

// Split cells until every vertex in a cell sees the same labeled counts into every cell.
inline void refine(const LabeledGraph& g, Cells& cells) {
  for (bool changed = true; changed;) {
    changed = false;
    std::array<int, kMaxCanonVertices> cell_of{};
    for (int c = 0; c < static_cast<int>(cells.size()); ++c)
      for (int v : cells[c]) cell_of[v] = c;
    Cells next;
    next.reserve(cells.size());
    for (auto& cell : cells) {
      if (cell.size() == 1) {
        next.push_back(cell);
        continue;
      }
      std::vector<std::pair<std::vector<int>, int>> sig;
      sig.reserve(cell.size());
      for (int v : cell) {
        std::vector<int> s;
        for (int w = 0; w < g.n; ++w)
          if (g.a[v][w]) s.push_back(cell_of[w] * 256 + g.a[v][w]);
        std::sort(s.begin(), s.end());
        sig.push_back({std::move(s), v});
      }
      std::sort(sig.begin(), sig.end());
      size_t start = next.size();
      for (size_t i = 0; i < sig.size(); ++i) {
        if (i == 0 || sig[i].first != sig[i - 1].first) next.push_back({});
        next.back().push_back(sig[i].second);
      }
      if (next.size() - start > 1) changed = true;
    }
    cells.swap(next);
  }
}

struct CanonSearch {
  const LabeledGraph& g;
  std::string best;
  std::vector<int> best_order;
  std::vector<std::vector<int>> generators;  // automorphisms as vertex maps

  explicit CanonSearch(const LabeledGraph& g_) : g(g_) {}

  std::string encode(const std::vector<int>& order) const {
    std::string s;
    s.reserve(g.n * (g.n - 1) / 2);
    for (int i = 0; i < g.n; ++i)
      for (int j = i + 1; j < g.n; ++j) s.push_back(static_cast<char>(g.a[order[i]][order[j]]));
    return s;
  }

  void leaf(const Cells& cells) {
    std::vector<int> order;
    for (auto& c : cells) order.push_back(c[0]);
    std::string s = encode(order);
    if (best_order.empty() || s < best) {
      best = std::move(s);
      best_order = std::move(order);
    } else if (s == best) {
      std::vector<int> gamma(g.n);
      for (int p = 0; p < g.n; ++p) gamma[order[p]] = best_order[p];
      generators.push_back(std::move(gamma));
    }
  }

  void search(Cells cells, std::vector<int>& prefix) {
    refine(g, cells);
    int target = -1;
    for (int c = 0; c < static_cast<int>(cells.size()); ++c)
      if (cells[c].size() > 1 && (target < 0 || cells[c].size() < cells[target].size())) target = c;
    if (target < 0) {
      leaf(cells);
      return;
    }
    std::vector<int> tried;
    for (int v : cells[target]) {
      if (!tried.empty() && same_orbit(v, tried, prefix)) continue;
      tried.push_back(v);
      Cells child;
      child.reserve(cells.size() + 1);
      for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
        if (c != target) {
          child.push_back(cells[c]);
          continue;
        }
        child.push_back({v});
        std::vector<int> rest;
        for (int w : cells[c])
          if (w != v) rest.push_back(w);
        child.push_back(std::move(rest));
      }
      prefix.push_back(v);
      search(std::move(child), prefix);
      prefix.pop_back();
    }
  }

  bool same_orbit(int v, const std::vector<int>& tried, const std::vector<int>& prefix) const {
    std::vector<int> parent(g.n);
    for (int i = 0; i < g.n; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (auto& gen : generators) {
      bool fixes = true;
      for (int p : prefix)
        if (gen[p] != p) { fixes = false; break; }
      if (!fixes) continue;
      for (int i = 0; i < g.n; ++i) parent[find(i)] = find(gen[i]);
    }
    for (int t : tried)
      if (find(t) == find(v)) return true;
    return false;
  }
};

}  // namespace detail

struct CanonicalResult {
  std::string key;
  std::vector<int> order;  // order[p] = original vertex placed at position p
};

inline CanonicalResult canonical_labeling(const LabeledGraph& g) {
  if (g.n > kMaxCanonVertices) throw std::invalid_argument("canonical form limited to 16 vertices");
  detail::CanonSearch s(g);
  detail::Cells cells;
  if (g.n > 0) {
    cells.push_back({});
    for (int v = 0; v < g.n; ++v) cells[0].push_back(v);
  }
  std::vector<int> prefix;
  if (g.n > 0) s.search(cells, prefix);
  CanonicalResult r;
  r.key.push_back(static_cast<char>(g.n));
  r.key += s.best;
  r.order = s.best_order;
  return r;
}

// Isomorphism-invariant byte string; equal keys iff the labeled graphs are isomorphic.
inline std::string canonical_form(const LabeledGraph& g) { return canonical_labeling(g).key; }

// All automorphisms (as vertex maps) by backtracking over refined cells; stops after `cap`.
inline std::vector<std::vector<int>> automorphism_group(const LabeledGraph& g, size_t cap = 1u << 20) {
  detail::Cells cells;
  cells.push_back({});
  for (int v = 0; v < g.n; ++v) cells[0].push_back(v);
  detail::refine(g, cells);
  std::vector<int> cell_of(g.n);
  for (int c = 0; c < static_cast<int>(cells.size()); ++c)
    for (int v : cells[c]) cell_of[v] = c;
  std::vector<std::vector<int>> out;
  std::vector<int> img(g.n, -1);
  std::vector<char> used(g.n, 0);
  std::function<void(int)> rec = [&](int v) {
    if (out.size() >= cap) return;
    if (v == g.n) {
      out.push_back(img);
      return;
    }
    for (int w : cells[cell_of[v]]) {
      if (used[w]) continue;
      bool ok = true;
      for (int u = 0; u < v && ok; ++u)
        if (g.a[u][v] != g.a[img[u]][w]) ok = false;
      if (!ok) continue;
      img[v] = w;
      used[w] = 1;
      rec(v + 1);
      used[w] = 0;
      img[v] = -1;
    }
  };
  rec(0);
  return out;
}

}  // namespace syn

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mfng/errors.hpp"
#include "mfng/features.hpp"

namespace mfng {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Simple undirected graph in CSR form with strictly sorted neighbor lists.
class Graph {
 public:
  Graph() : offsets_(1, 0) {}

  /// Builds from edges over dense ids [0, n). Self-loops are dropped,
  /// orientation is ignored and duplicates collapse.
  static Graph from_dense_edges(std::size_t n, std::vector<Edge> edges) {
    if (n > std::numeric_limits<NodeId>::max()) throw Error(Errc::TooLarge, "node count exceeds 2^32-1");
    std::erase_if(edges, [](const Edge& e) { return e.first == e.second; });
    for (auto& e : edges) {
      if (e.first >= n || e.second >= n) throw Error(Errc::Domain, "edge endpoint outside [0, n)");
      if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    Graph g;
    g.offsets_.assign(n + 1, 0);
    for (const auto& [u, v] : edges) {
      ++g.offsets_[u + 1];
      ++g.offsets_[v + 1];
    }
    std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
    g.neighbors_.resize(2 * edges.size());
    std::vector<std::uint64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const auto& [u, v] : edges) {
      g.neighbors_[cursor[u]++] = v;
      g.neighbors_[cursor[v]++] = u;
    }
    for (std::size_t u = 0; u < n; ++u)
      std::sort(g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u]),
                g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u + 1]));
    g.num_edges_ = edges.size();
    return g;
  }

  std::size_t num_nodes() const noexcept { return offsets_.size() - 1; }
  std::size_t num_edges() const noexcept { return num_edges_; }
  std::size_t degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }

  std::span<const NodeId> neighbors(NodeId u) const {
    return {neighbors_.data() + offsets_[u], degree(u)};
  }

  bool has_edge(NodeId u, NodeId v) const {
    if (degree(u) > degree(v)) std::swap(u, v);
    const auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  /// Each undirected edge once as (u, v) with u < v, sorted.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(num_edges_);
    for (NodeId u = 0; u < num_nodes(); ++u)
      for (NodeId v : neighbors(u))
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::uint64_t> offsets_;
  std::vector<NodeId> neighbors_;
  std::size_t num_edges_ = 0;
};

/// Builds a graph from arbitrary integer ids. If every id lies in
/// [0, declared_nodes) the ids are kept as-is and the graph has declared_nodes
/// nodes (so isolated nodes survive a round trip); otherwise ids are remapped
/// to [0, n) in ascending order of their original value.
inline Graph from_edge_list(std::span<const std::pair<std::int64_t, std::int64_t>> pairs,
                            std::optional<std::size_t> declared_nodes = std::nullopt) {
  const bool dense = declared_nodes && std::all_of(pairs.begin(), pairs.end(), [&](const auto& p) {
                       return p.first >= 0 && p.second >= 0 &&
                              static_cast<std::uint64_t>(p.first) < *declared_nodes &&
                              static_cast<std::uint64_t>(p.second) < *declared_nodes;
                     });
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  if (dense) {
    for (const auto& [a, b] : pairs) edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
    return Graph::from_dense_edges(*declared_nodes, std::move(edges));
  }
  std::vector<std::int64_t> ids;
  ids.reserve(2 * pairs.size());
  for (const auto& [a, b] : pairs) {
    if (a == b) continue;
    ids.push_back(a);
    ids.push_back(b);
  }
  // self-loop-only nodes still count as nodes
  for (const auto& [a, b] : pairs)
    if (a == b) ids.push_back(a);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  auto index = [&](std::int64_t id) {
    return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  for (const auto& [a, b] : pairs) edges.emplace_back(index(a), index(b));
  return Graph::from_dense_edges(ids.size(), std::move(edges));
}

/// Exact C(n, r); throws Overflow beyond 2^64-1.
inline std::uint64_t binomial_u64(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 0; i < r; ++i) {
    // acc * (n - i) / (i + 1) is exact: acc * (n-i) is divisible by (i+1)
    acc = acc * (n - i);
    acc /= (i + 1);
    if (acc > std::numeric_limits<std::uint64_t>::max())
      throw Error(Errc::Overflow, "binomial coefficient exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(acc);
}

namespace detail {

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw Error(Errc::Overflow, "count exceeds 64 bits");
  return out;
}

// Forward adjacency: each edge oriented from lower to higher (degree, id) rank,
// lists sorted by rank. Returned lists hold ranks, not node ids.
inline std::vector<std::vector<NodeId>> forward_adjacency(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    return g.degree(a) != g.degree(b) ? g.degree(a) < g.degree(b) : a < b;
  });
  std::vector<NodeId> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[order[i]] = static_cast<NodeId>(i);
  std::vector<std::vector<NodeId>> fwd(n);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v : g.neighbors(u))
      if (rank[u] < rank[v]) fwd[rank[u]].push_back(rank[v]);
  for (auto& list : fwd) std::sort(list.begin(), list.end());
  return fwd;
}

template <class Out>
void intersect_sorted(std::span<const NodeId> a, std::span<const NodeId> b, Out& out) {
  out.clear();
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
}

}  // namespace detail

/// S_d = sum_v C(deg v, d).
inline std::uint64_t count_stars(const Graph& g, int d) {
  if (d < 1) throw Error(Errc::Domain, "star order must be >= 1");
  std::uint64_t total = 0;
  for (NodeId u = 0; u < g.num_nodes(); ++u)
    total = detail::checked_add(total, binomial_u64(g.degree(u), static_cast<std::uint64_t>(d)));
  return total;
}

/// Triangle count; each triangle is found once from its lowest-ranked vertex.
inline std::uint64_t count_triangles(const Graph& g) {
  const auto fwd = detail::forward_adjacency(g);
  std::vector<char> mark(fwd.size(), 0);
  std::uint64_t count = 0;
  for (std::size_t u = 0; u < fwd.size(); ++u) {
    for (NodeId v : fwd[u]) mark[v] = 1;
    for (NodeId v : fwd[u])
      for (NodeId w : fwd[v]) count += mark[w];
    for (NodeId v : fwd[u]) mark[v] = 0;
  }
  return count;
}

/// K_4 count: extend each forward triangle (u, v, w) by common forward neighbors.
inline std::uint64_t count_4cliques(const Graph& g) {
  const auto fwd = detail::forward_adjacency(g);
  std::uint64_t count = 0;
  std::vector<NodeId> common_uv, common_uvw;
  for (std::size_t u = 0; u < fwd.size(); ++u) {
    for (NodeId v : fwd[u]) {
      detail::intersect_sorted(fwd[u], fwd[v], common_uv);
      for (NodeId w : common_uv) {
        detail::intersect_sorted(common_uv, fwd[w], common_uvw);
        count += common_uvw.size();
      }
    }
  }
  return count;
}

/// Exact count of one feature. Cliques are supported for t in {2, 3, 4}.
inline std::uint64_t count_feature(const Graph& g, Feature f) {
  switch (f.kind) {
    case Feature::Kind::Edges: return g.num_edges();
    case Feature::Kind::Star: return count_stars(g, f.order);
    case Feature::Kind::Clique:
      if (f.order == 2) return g.num_edges();
      if (f.order == 3) return count_triangles(g);
      if (f.order == 4) return count_4cliques(g);
      throw Error(Errc::Domain, "clique counting supports t <= 4");
  }
  return 0;
}

inline FeatureVector feature_vector(const Graph& g, const FeatureSpec& spec) {
  FeatureVector out;
  std::optional<std::uint64_t> triangles;
  for (Feature f : spec) {
    if (f.kind == Feature::Kind::Clique && f.order == 3) {
      if (!triangles) triangles = count_triangles(g);
      out.set(f, static_cast<double>(*triangles));
    } else {
      out.set(f, static_cast<double>(count_feature(g, f)));
    }
  }
  return out;
}

struct DegreeDistribution {
  /// counts[d] = number of nodes with degree d
  std::vector<std::uint64_t> counts;

  std::uint64_t num_nodes() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

  /// ccdf[d] = fraction of nodes with degree >= d
  std::vector<double> ccdf() const {
    std::vector<double> out(counts.size(), 0.0);
    const double n = static_cast<double>(num_nodes());
    if (n == 0) return out;
    std::uint64_t tail = 0;
    for (std::size_t d = counts.size(); d-- > 0;) {
      tail += counts[d];
      out[d] = static_cast<double>(tail) / n;
    }
    return out;
  }
};

inline DegreeDistribution degree_distribution(const Graph& g) {
  DegreeDistribution dd;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    const std::size_t d = g.degree(u);
    if (d >= dd.counts.size()) dd.counts.resize(d + 1, 0);
    ++dd.counts[d];
  }
  return dd;
}

/// Global clustering coefficient 3 C_3 / S_2.
inline double clustering_coefficient(const Graph& g) {
  const std::uint64_t wedges = count_stars(g, 2);
  if (wedges == 0) throw Error(Errc::ZeroWedges, "graph has no wedges");
  return 3.0 * static_cast<double>(count_triangles(g)) / static_cast<double>(wedges);
}

namespace detail {

template <class Fn>
void for_each_subset(std::size_t n, std::size_t size, std::vector<NodeId>& buf, std::size_t start, Fn&& fn) {
  if (buf.size() == size) {
    fn(buf);
    return;
  }
  for (std::size_t v = start; v + (size - buf.size()) <= n; ++v) {
    buf.push_back(static_cast<NodeId>(v));
    for_each_subset(n, size, buf, v + 1, fn);
    buf.pop_back();
  }
}

}  // namespace detail

/// Exhaustive subset enumeration of every feature; testing oracle for n <= 14.
inline FeatureVector brute_force_counts(const Graph& g, const FeatureSpec& spec) {
  const std::size_t n = g.num_nodes();
  if (n > 14) throw Error(Errc::TooLarge, "brute force counting limited to n <= 14");
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (const auto& [u, v] : g.edges()) adj[u][v] = adj[v][u] = 1;

  FeatureVector out;
  std::vector<NodeId> buf;
  for (Feature f : spec) {
    std::uint64_t count = 0;
    if (f.kind == Feature::Kind::Star) {
      const auto d = static_cast<std::size_t>(f.order);
      for (std::size_t c = 0; c < n; ++c) {
        buf.clear();
        detail::for_each_subset(n, d, buf, 0, [&](const std::vector<NodeId>& leaves) {
          for (NodeId x : leaves)
            if (x == c || !adj[c][x]) return;
          ++count;
        });
      }
    } else {
      const std::size_t t = f.kind == Feature::Kind::Edges ? 2 : static_cast<std::size_t>(f.order);
      buf.clear();
      detail::for_each_subset(n, t, buf, 0, [&](const std::vector<NodeId>& s) {
        for (std::size_t a = 0; a < s.size(); ++a)
          for (std::size_t b = a + 1; b < s.size(); ++b)
            if (!adj[s[a]][s[b]]) return;
        ++count;
      });
    }
    out.set(f, static_cast<double>(count));
  }
  return out;
}

}  // namespace mfng

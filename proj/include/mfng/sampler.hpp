#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "mfng/errors.hpp"
#include "mfng/graph.hpp"
#include "mfng/measure.hpp"
#include "mfng/moments.hpp"
#include "mfng/random.hpp"

namespace mfng {

/// Per-node category k-tuples, encoded base m with level 1 as the most
/// significant digit, plus the leaf interval length prod_r l_{c_r}.
struct CategoryAssignment {
  int m = 1;
  int k = 1;
  std::vector<std::uint64_t> codes;
  std::vector<double> leaf_lengths;

  std::size_t size() const noexcept { return codes.size(); }

  /// Category of `node` at level `level` (0-based).
  int category(std::size_t node, int level) const {
    std::uint64_t c = codes[node];
    for (int r = k - 1; r > level; --r) c /= static_cast<std::uint64_t>(m);
    return static_cast<int>(c % static_cast<std::uint64_t>(m));
  }

  std::vector<int> decode(std::uint64_t code) const {
    std::vector<int> digits(static_cast<std::size_t>(k));
    for (int r = k - 1; r >= 0; --r) {
      digits[r] = static_cast<int>(code % static_cast<std::uint64_t>(m));
      code /= static_cast<std::uint64_t>(m);
    }
    return digits;
  }

  /// Flat node-major digit table, digits[node * k + level].
  std::vector<std::uint8_t> digit_table() const {
    std::vector<std::uint8_t> out(codes.size() * static_cast<std::size_t>(k));
    for (std::size_t v = 0; v < codes.size(); ++v) {
      std::uint64_t c = codes[v];
      for (int r = k - 1; r >= 0; --r) {
        out[v * k + r] = static_cast<std::uint8_t>(c % static_cast<std::uint64_t>(m));
        c /= static_cast<std::uint64_t>(m);
      }
    }
    return out;
  }
};

inline std::uint64_t encode_categories(std::span<const int> digits, int m) {
  std::uint64_t code = 0;
  for (int c : digits) code = code * static_cast<std::uint64_t>(m) + static_cast<std::uint64_t>(c);
  return code;
}

/// Draws each node's k categories as i.i.d. categorical(l) draws, node-major.
/// This is the digit expansion of a uniform point under the nested partition.
template <class Urbg>
CategoryAssignment assign_categories(std::size_t n, std::span<const double> lengths, int k, Urbg& rng) {
  const int m = static_cast<int>(lengths.size());
  if (m > 256) throw Error(Errc::Domain, "at most 256 categories supported");
  if (k > max_depth(m)) throw Error(Errc::DepthOverflow, "m^k exceeds 2^62");
  const DiscreteTable table(lengths);
  CategoryAssignment a{m, k, std::vector<std::uint64_t>(n), std::vector<double>(n)};
  for (std::size_t v = 0; v < n; ++v) {
    std::uint64_t code = 0;
    double leaf = 1.0;
    for (int r = 0; r < k; ++r) {
      const auto c = m == 1 ? std::size_t{0} : table.sample(rng);
      code = code * static_cast<std::uint64_t>(m) + c;
      leaf *= lengths[c];
    }
    a.codes[v] = code;
    a.leaf_lengths[v] = leaf;
  }
  return a;
}

template <class Urbg>
CategoryAssignment assign_categories(std::size_t n, const GeneratingMeasure& w, Urbg& rng) {
  return assign_categories(n, w.lengths(), w.k(), rng);
}

/// Nodes grouped by category code, ascending node id within a group. Codes
/// index a dense offset table when m^k <= 4n, otherwise a sorted code list.
class CategoryIndex {
 public:
  explicit CategoryIndex(const CategoryAssignment& a) {
    const std::size_t n = a.size();
    std::uint64_t space = 1;
    for (int r = 0; r < a.k && space <= 4 * n; ++r) space *= static_cast<std::uint64_t>(a.m);
    nodes_.resize(n);
    std::iota(nodes_.begin(), nodes_.end(), NodeId{0});
    std::stable_sort(nodes_.begin(), nodes_.end(), [&](NodeId u, NodeId v) { return a.codes[u] < a.codes[v]; });
    if (space <= 4 * n) {
      dense_.assign(space + 1, 0);
      for (auto c : a.codes) ++dense_[c + 1];
      std::partial_sum(dense_.begin(), dense_.end(), dense_.begin());
      for (std::size_t c = 0; c < space; ++c) groups_ += dense_[c + 1] > dense_[c];
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = a.codes[nodes_[i]];
      if (codes_.empty() || codes_.back() != c) {
        codes_.push_back(c);
        starts_.push_back(i);
      }
    }
    starts_.push_back(n);
    groups_ = codes_.size();
  }

  std::span<const NodeId> nodes(std::uint64_t code) const {
    if (!dense_.empty()) {
      if (code + 1 >= dense_.size()) return {};
      return {nodes_.data() + dense_[code], dense_[code + 1] - dense_[code]};
    }
    const auto it = std::lower_bound(codes_.begin(), codes_.end(), code);
    if (it == codes_.end() || *it != code) return {};
    const auto i = static_cast<std::size_t>(it - codes_.begin());
    return {nodes_.data() + starts_[i], starts_[i + 1] - starts_[i]};
  }

  std::size_t num_categories() const noexcept { return groups_; }

 private:
  std::vector<NodeId> nodes_;
  std::vector<std::size_t> dense_;
  std::vector<std::uint64_t> codes_;
  std::vector<std::size_t> starts_;
  std::size_t groups_ = 0;
};

/// Exact O(n^2) sampler: every pair is an independent Bernoulli(prod_r p_{c_u[r] c_v[r]}).
template <class Urbg>
Graph naive_sample(std::size_t n, const GeneratingMeasure& w, Urbg& rng) {
  const auto cats = assign_categories(n, w, rng);
  const auto digits = cats.digit_table();
  const int k = w.k();
  const auto& p = w.probs();
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    const std::uint8_t* du = digits.data() + u * k;
    for (std::size_t v = u + 1; v < n; ++v) {
      const std::uint8_t* dv = digits.data() + v * k;
      const double x = uniform01(rng);
      // the running product only shrinks, so stop as soon as it drops to x
      double prob = 1.0;
      for (int r = 0; r < k && prob > x; ++r) prob *= p(du[r], dv[r]);
      if (x < prob) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
  }
  return Graph::from_dense_edges(n, std::move(edges));
}

/// Per-level probability matrices sharing one length vector. With k identical
/// levels this is W_k(P, l); with perturbed levels it is a noisy measure.
struct LevelSchedule {
  std::vector<double> lengths;
  std::vector<ProbMatrix> levels;

  int m() const noexcept { return static_cast<int>(lengths.size()); }
  int k() const noexcept { return static_cast<int>(levels.size()); }

  static LevelSchedule uniform(const GeneratingMeasure& w) {
    return {{w.lengths().begin(), w.lengths().end()}, std::vector<ProbMatrix>(static_cast<std::size_t>(w.k()), w.probs())};
  }
};

/// Intersection of k independent depth-1 graphs on a shared node set; level i
/// uses matrix P^(i). Each level graph is drawn in full before intersecting.
template <class Urbg>
Graph sample_by_intersection(std::size_t n, const LevelSchedule& schedule, Urbg& rng) {
  if (schedule.levels.empty()) throw Error(Errc::Domain, "schedule has no levels");
  for (const auto& p : schedule.levels) {
    if (p.size() != schedule.m()) throw Error(Errc::Domain, "level matrix size differs from m");
    detail::check_probs(p);
  }
  const auto cats = assign_categories(n, schedule.lengths, schedule.k(), rng);
  const auto digits = cats.digit_table();
  const int k = schedule.k();
  std::vector<char> alive(n * (n - (n > 0 ? 1 : 0)) / 2, 1);
  for (int level = 0; level < k; ++level) {
    const auto& p = schedule.levels[static_cast<std::size_t>(level)];
    std::size_t idx = 0;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v, ++idx) {
        const bool present = uniform01(rng) < p(digits[u * k + level], digits[v * k + level]);
        alive[idx] = static_cast<char>(alive[idx] && present);
      }
  }
  std::vector<Edge> edges;
  std::size_t idx = 0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v, ++idx)
      if (alive[idx]) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  return Graph::from_dense_edges(n, std::move(edges));
}

/// Q_ij = p_ij l_i l_j with a cumulative table over ordered pairs (i, j).
class QTable {
 public:
  QTable(std::span<const double> lengths, const ProbMatrix& p) : m_(p.size()) {
    q_.resize(static_cast<std::size_t>(m_) * m_);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) q_[static_cast<std::size_t>(i) * m_ + j] = p(i, j) * lengths[i] * lengths[j];
    table_ = DiscreteTable(q_);
    if (!(table_.total() > 0.0)) throw Error(Errc::AllZeroMeasure, "Q sums to zero; nothing to sample");
  }

  int m() const noexcept { return m_; }
  double operator()(int i, int j) const { return q_[static_cast<std::size_t>(i) * m_ + j]; }
  double total() const noexcept { return table_.total(); }

  template <class Urbg>
  std::pair<int, int> sample(Urbg& rng) const {
    const auto idx = table_.sample(rng);
    return {static_cast<int>(idx / m_), static_cast<int>(idx % m_)};
  }

 private:
  int m_;
  std::vector<double> q_;
  DiscreteTable table_;
};

inline QTable build_q(const GeneratingMeasure& w) { return {w.lengths(), w.probs()}; }

/// Poisson rate per chosen box. The box is drawn with probability proportional
/// to p l l', so actual/expected pairs gives each pair probability ~p.
/// ExpectedOverActual is the inverse ratio as printed with the algorithm; it
/// concentrates edges in under-populated boxes.
enum class BoxRate { ActualOverExpected, ExpectedOverActual };

struct FastSamplerConfig {
  double accuracy = 1.0;                   // lambda
  BoxRate box_rate = BoxRate::ActualOverExpected;
  int max_attempts_per_box = 50;           // max_k
  std::int64_t max_rejected_boxes = 10000; // consecutive boxes that add nothing
};

namespace detail {

// Open-addressing set of packed edge keys (u << 32 | v, u < v, so never 0).
class EdgeKeySet {
 public:
  explicit EdgeKeySet(std::size_t expected) {
    std::size_t cap = 16;
    while (cap < 2 * expected) cap <<= 1;
    slots_.assign(cap, 0);
  }

  bool insert(std::uint64_t key) {
    if (2 * (size_ + 1) > slots_.size()) grow();
    return place(slots_, key);
  }

 private:
  bool place(std::vector<std::uint64_t>& slots, std::uint64_t key) {
    const std::size_t mask = slots.size() - 1;
    for (std::size_t i = splitmix64(key) & mask;; i = (i + 1) & mask) {
      if (slots[i] == key) return false;
      if (slots[i] == 0) {
        slots[i] = key;
        ++size_;
        return true;
      }
    }
  }

  void grow() {
    std::vector<std::uint64_t> old(slots_.size() * 2, 0);
    old.swap(slots_);
    size_ = 0;
    for (auto key : old)
      if (key) place(slots_, key);
  }

  std::vector<std::uint64_t> slots_;
  std::size_t size_ = 0;
};

template <class Urbg>
Graph fast_sample_core(std::size_t n, const LevelSchedule& schedule, const EdgeMoments& moments,
                       const FastSamplerConfig& config, Urbg& rng) {
  if (n < 2) throw Error(Errc::Domain, "fast sampling needs n >= 2");
  if (!(config.accuracy > 0.0)) throw Error(Errc::Domain, "accuracy factor must be positive");
  const int m = schedule.m();
  const int k = schedule.k();
  std::vector<QTable> q;
  q.reserve(schedule.levels.size());
  for (const auto& p : schedule.levels) q.emplace_back(schedule.lengths, p);

  const auto cats = assign_categories(n, schedule.lengths, k, rng);
  const CategoryIndex index(cats);

  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  double draw = moments.mean;
  if (moments.std > 0.0) draw = std::normal_distribution<double>(moments.mean, moments.std)(rng);
  const auto target = static_cast<std::uint64_t>(std::floor(std::clamp(draw, 0.0, pairs)));

  EdgeKeySet present(static_cast<std::size_t>(target));
  std::vector<Edge> edges;
  edges.reserve(target + 16);

  const double nd = static_cast<double>(n);
  std::uint64_t placed = 0;
  std::int64_t rejected = 0;
  while (placed < target) {
    std::uint64_t c = 0, c2 = 0;
    double l = 1.0, l2 = 1.0;
    for (int h = 0; h < k; ++h) {
      const auto [i, j] = q[static_cast<std::size_t>(h)].sample(rng);
      c = c * static_cast<std::uint64_t>(m) + static_cast<std::uint64_t>(i);
      c2 = c2 * static_cast<std::uint64_t>(m) + static_cast<std::uint64_t>(j);
      l *= schedule.lengths[static_cast<std::size_t>(i)];
      l2 *= schedule.lengths[static_cast<std::size_t>(j)];
    }
    const auto vc = index.nodes(c);
    const auto vc2 = index.nodes(c2);
    std::uint64_t local = 0;
    if (!vc.empty() && !vc2.empty()) {
      const double expected_pairs = c == c2 ? nd * (nd * l * l - l * l + l) : nd * (nd - 1.0) * l * l2;
      const double actual_pairs = static_cast<double>(vc.size()) * static_cast<double>(vc2.size());
      const double rate = config.box_rate == BoxRate::ActualOverExpected
                              ? actual_pairs / (config.accuracy * expected_pairs)
                              : expected_pairs / (config.accuracy * actual_pairs);
      const auto to_add = static_cast<std::uint64_t>(std::poisson_distribution<std::int64_t>(rate)(rng));
      for (int attempt = 0; local < to_add && attempt < config.max_attempts_per_box; ++attempt) {
        NodeId u = vc[uniform_index(rng, vc.size())];
        NodeId v = vc2[uniform_index(rng, vc2.size())];
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        if (present.insert((static_cast<std::uint64_t>(u) << 32) | v)) {
          edges.emplace_back(u, v);
          ++local;
        }
      }
    }
    placed += local;
    if (local == 0) {
      if (++rejected > config.max_rejected_boxes)
        throw Error(Errc::Stalled, "no edge placed in " + std::to_string(rejected) +
                                       " consecutive boxes; measure too dense for fast sampling");
    } else {
      rejected = 0;
    }
  }
  return Graph::from_dense_edges(n, std::move(edges));
}

}  // namespace detail

/// Ball-dropping heuristic with O(|E| log |V|) expected cost. Fixes the edge
/// count from a normal draw, then repeatedly picks a box (c, c') level by level
/// proportionally to Q and adds Poisson-many edges inside it, scaled by the
/// ratio of actual to expected node pairs in the box (see BoxRate).
template <class Urbg>
Graph fast_sample(std::size_t n, const GeneratingMeasure& w, const FastSamplerConfig& config, Urbg& rng) {
  if (!(edge_survival_factor(w) > 0.0)) throw Error(Errc::AllZeroMeasure, "edge survival factor is zero");
  if (n < 2) throw Error(Errc::Domain, "fast sampling needs n >= 2");
  return detail::fast_sample_core(n, LevelSchedule::uniform(w), edge_moments(w, static_cast<std::int64_t>(n)),
                                  config, rng);
}

/// Per-level perturbed matrices for m = 2 (noisy MFNG).
struct NoiseSchedule {
  LevelSchedule schedule;
  double noise = 0.0;
  std::vector<double> offsets;  // mu_i
};

/// Applies explicit per-level offsets mu_i: off-diagonals +mu_i, diagonals
/// -2 mu_i p_jj / (p_11 + p_22), then clamps entrywise to [0, 1].
inline NoiseSchedule noise_schedule_from_offsets(const GeneratingMeasure& w, double b,
                                                 std::span<const double> offsets) {
  if (w.m() != 2) throw Error(Errc::UnsupportedM, "noisy measures are defined for m = 2 only");
  if (!(b >= 0.0 && b <= 1.0)) throw Error(Errc::Domain, "noise level must lie in [0, 1]");
  const double diag = w.p(0, 0) + w.p(1, 1);
  if (!(diag > 0.0)) throw Error(Errc::DegenerateDiagonal, "p_11 + p_22 must be positive");
  if (offsets.size() != static_cast<std::size_t>(w.k())) throw Error(Errc::Domain, "need one offset per level");
  NoiseSchedule out;
  out.noise = b;
  out.offsets.assign(offsets.begin(), offsets.end());
  out.schedule.lengths.assign(w.lengths().begin(), w.lengths().end());
  auto clamp01 = [](double x) { return std::min(std::max(x, 0.0), 1.0); };
  for (double mu : offsets) {
    ProbMatrix p(2);
    p(0, 0) = clamp01(w.p(0, 0) - 2.0 * mu * w.p(0, 0) / diag);
    p(1, 1) = clamp01(w.p(1, 1) - 2.0 * mu * w.p(1, 1) / diag);
    p(0, 1) = p(1, 0) = clamp01(w.p(0, 1) + mu);
    out.schedule.levels.push_back(p);
  }
  return out;
}

/// Draws mu_i ~ Uniform[-b, b] for each level and builds the perturbed matrices.
template <class Urbg>
NoiseSchedule make_noise_schedule(const GeneratingMeasure& w, double b, Urbg& rng) {
  if (w.m() != 2) throw Error(Errc::UnsupportedM, "noisy measures are defined for m = 2 only");
  std::vector<double> offsets(static_cast<std::size_t>(w.k()));
  for (double& mu : offsets) mu = b * (2.0 * uniform01(rng) - 1.0);
  return noise_schedule_from_offsets(w, b, offsets);
}

enum class NoisyMethod { Fast, Exact };

/// Noisy MFNG graph. Offsets come from a stream forked off `rng` without
/// advancing it, so b = 0 reproduces the noiseless sampler bit for bit
/// (fast_sample for Fast, sample_by_intersection with P at every level for Exact).
template <class Urbg>
Graph noisy_sample(std::size_t n, const GeneratingMeasure& w, double b, const FastSamplerConfig& config,
                   Urbg& rng, NoisyMethod method = NoisyMethod::Fast) {
  auto noise_rng = fork_stream(rng, 0x6e6f697365ULL);
  const auto noisy = make_noise_schedule(w, b, noise_rng);
  if (method == NoisyMethod::Exact) return sample_by_intersection(n, noisy.schedule, rng);

  if (n < 2) throw Error(Errc::Domain, "fast sampling needs n >= 2");
  const bool unperturbed = std::all_of(noisy.schedule.levels.begin(), noisy.schedule.levels.end(),
                                       [&](const ProbMatrix& p) { return p == w.probs(); });
  const auto nn = static_cast<std::int64_t>(n);
  const auto moments = unperturbed ? edge_moments(w, nn)
                                   : edge_moments(noisy.schedule.lengths, noisy.schedule.levels, nn);
  if (!(moments.mean > 0.0)) throw Error(Errc::AllZeroMeasure, "perturbed measure has zero edge mass");
  return detail::fast_sample_core(n, noisy.schedule, moments, config, rng);
}

}  // namespace mfng

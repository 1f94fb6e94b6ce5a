#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "mfng/errors.hpp"
#include "mfng/features.hpp"
#include "mfng/graph.hpp"
#include "mfng/measure.hpp"
#include "mfng/random.hpp"
#include "mfng/sampler.hpp"

// Brute-force references for the closed-form moments. Nothing here reuses
// the factorizations in moments.hpp.
namespace mfng::oracle {

/// Labeled pattern on `nodes` vertices given by its edge pairs.
struct Pattern {
  int nodes = 0;
  std::vector<std::pair<int, int>> edges;

  static Pattern edge() { return {2, {{0, 1}}}; }
  static Pattern star(int d) {
    Pattern p{d + 1, {}};
    for (int i = 1; i <= d; ++i) p.edges.emplace_back(0, i);
    return p;
  }
  static Pattern clique(int t) {
    Pattern p{t, {}};
    for (int a = 0; a < t; ++a)
      for (int b = a + 1; b < t; ++b) p.edges.emplace_back(a, b);
    return p;
  }
};

inline constexpr int kMaxPatternNodes = 5;

namespace detail {

// Sum over all assignments of one "symbol" from [0, symbols) to each pattern
// node of weight(tuple) * prod_{edges} link(tuple[a], tuple[b]).
template <class Weight, class Link>
double enumerate_assignments(const Pattern& pattern, std::uint64_t symbols, Weight&& weight, Link&& link) {
  std::vector<std::uint64_t> tuple(static_cast<std::size_t>(pattern.nodes), 0);
  double total = 0.0;
  while (true) {
    double term = weight(tuple);
    for (const auto& [a, b] : pattern.edges) term *= link(tuple[a], tuple[b]);
    total += term;
    int pos = pattern.nodes - 1;
    while (pos >= 0 && ++tuple[pos] == symbols) tuple[pos--] = 0;
    if (pos < 0) break;
  }
  return total;
}

inline void check_pattern(const Pattern& s) {
  if (s.nodes < 1 || s.nodes > kMaxPatternNodes)
    throw Error(Errc::TooLargePattern, "pattern must have 1..5 nodes");
  for (const auto& [a, b] : s.edges)
    if (a < 0 || b < 0 || a >= s.nodes || b >= s.nodes || a == b)
      throw Error(Errc::Domain, "pattern edge endpoints invalid");
}

}  // namespace detail

/// P(all pattern edges present) under W_k: the depth-one probability, summed
/// directly over m^t category tuples, raised to the k.
inline double exact_subgraph_probability(const GeneratingMeasure& w, const Pattern& s) {
  detail::check_pattern(s);
  const double one_level = detail::enumerate_assignments(
      s, static_cast<std::uint64_t>(w.m()),
      [&](const std::vector<std::uint64_t>& t) {
        double prod = 1.0;
        for (auto c : t) prod *= w.length(static_cast<int>(c));
        return prod;
      },
      [&](std::uint64_t a, std::uint64_t b) { return w.p(static_cast<int>(a), static_cast<int>(b)); });
  return std::pow(one_level, w.k());
}

/// Same probability evaluated on the expanded measure: every node gets one of
/// the m^k leaf intervals and links survive with prod_r p. Costs (m^k)^t terms,
/// so it is restricted to m^(k t) <= 2^22. Independent of the power identity.
inline double expanded_subgraph_probability(const GeneratingMeasure& w, const Pattern& s) {
  detail::check_pattern(s);
  const auto m = static_cast<std::uint64_t>(w.m());
  std::uint64_t leaves = 1;
  for (int r = 0; r < w.k(); ++r) leaves *= m;
  double log_work = static_cast<double>(s.nodes) * std::log2(static_cast<double>(leaves));
  if (log_work > 22.0) throw Error(Errc::TooLarge, "expanded enumeration too large");
  std::vector<double> leaf_len(leaves);
  std::vector<std::vector<int>> digits(leaves, std::vector<int>(static_cast<std::size_t>(w.k())));
  for (std::uint64_t c = 0; c < leaves; ++c) {
    std::uint64_t x = c;
    double len = 1.0;
    for (int r = w.k() - 1; r >= 0; --r) {
      digits[c][r] = static_cast<int>(x % m);
      len *= w.length(digits[c][r]);
      x /= m;
    }
    leaf_len[c] = len;
  }
  return detail::enumerate_assignments(
      s, leaves,
      [&](const std::vector<std::uint64_t>& t) {
        double prod = 1.0;
        for (auto c : t) prod *= leaf_len[c];
        return prod;
      },
      [&](std::uint64_t a, std::uint64_t b) {
        double prod = 1.0;
        for (int r = 0; r < w.k(); ++r) prod *= w.p(digits[a][r], digits[b][r]);
        return prod;
      });
}

inline double placement_count(std::int64_t n, Feature f) {
  auto choose = [](std::int64_t a, std::int64_t b) {
    if (b < 0 || b > a) return 0.0;
    double c = 1.0;
    for (std::int64_t i = 0; i < b; ++i) c = c * static_cast<double>(a - i) / static_cast<double>(i + 1);
    return c;
  };
  switch (f.kind) {
    case Feature::Kind::Edges: return choose(n, 2);
    case Feature::Kind::Star: return static_cast<double>(n) * choose(n - 1, f.order);
    case Feature::Kind::Clique: return choose(n, f.order);
  }
  return 0.0;
}

inline Pattern pattern_of(Feature f) {
  switch (f.kind) {
    case Feature::Kind::Edges: return Pattern::edge();
    case Feature::Kind::Star: return Pattern::star(f.order);
    case Feature::Kind::Clique: return Pattern::clique(f.order);
  }
  return Pattern::edge();
}

/// E[feature] = (number of placements) x P(pattern present), for n <= 12.
inline FeatureVector exact_expected_features(const GeneratingMeasure& w, std::int64_t n, const FeatureSpec& spec) {
  if (n > 12) throw Error(Errc::TooLarge, "oracle limited to n <= 12");
  FeatureVector out;
  for (Feature f : spec) {
    const double count = placement_count(n, f);
    out.set(f, count == 0.0 ? 0.0 : count * exact_subgraph_probability(w, pattern_of(f)));
  }
  return out;
}

/// E[E_d] as n C(n-1, d) E_c[rho(c)^d (1 - rho(c))^(n-1-d)], where rho(c) is a
/// node's link probability given its category tuple. rho depends only on how
/// many levels fall in each category, so the expectation is a sum over
/// compositions of k weighted by multinomial probabilities; all terms are >= 0.
inline std::vector<double> composition_degree_counts(const GeneratingMeasure& w, std::int64_t n) {
  const int m = w.m(), k = w.k();
  std::vector<double> r(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) r[i] += w.p(i, j) * w.length(j);

  auto binomial_pmf = [n](std::int64_t d, double p) {
    const std::int64_t trials = n - 1;
    if (p <= 0.0) return d == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return d == trials ? 1.0 : 0.0;
    return std::exp(std::lgamma(trials + 1.0) - std::lgamma(d + 1.0) - std::lgamma(trials - d + 1.0) + static_cast<double>(d) * std::log(p) +
                    static_cast<double>(trials - d) * std::log1p(-p));
  };

  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  // visit compositions (c_0, ..., c_{m-1}) of k; log_weight accumulates log(l_i^c_i / c_i!)
  auto visit = [&](auto&& self, int cat, int remaining, double log_weight, double rho) -> void {
    const int lo = cat == m - 1 ? remaining : 0;
    for (int c = lo; c <= remaining; ++c) {
      if (c > 0 && w.length(cat) == 0.0) break;
      const double lw = log_weight - std::lgamma(c + 1.0) + (c > 0 ? c * std::log(w.length(cat)) : 0.0);
      const double next_rho = rho * std::pow(r[cat], c);
      if (cat == m - 1) {
        const double prob = std::exp(std::lgamma(k + 1.0) + lw);
        for (std::int64_t d = 0; d < n; ++d)
          out[static_cast<std::size_t>(d)] += static_cast<double>(n) * prob * binomial_pmf(d, next_rho);
      } else {
        self(self, cat + 1, remaining - c, lw, next_rho);
      }
    }
  };
  visit(visit, 0, k, 0.0, 1.0);
  return out;
}

struct McStats {
  std::int64_t samples = 0;
  FeatureVector mean;
  FeatureVector variance;
  FeatureVector standard_error;
};

inline McStats summarize(const FeatureSpec& spec, const std::vector<FeatureVector>& draws) {
  if (draws.size() < 2) throw Error(Errc::Domain, "need at least two samples");
  McStats st;
  st.samples = static_cast<std::int64_t>(draws.size());
  const double r = static_cast<double>(draws.size());
  for (Feature f : spec) {
    double mean = 0.0;
    for (const auto& d : draws) mean += d.get(f);
    mean /= r;
    double ss = 0.0;
    for (const auto& d : draws) ss += (d.get(f) - mean) * (d.get(f) - mean);
    const double var = ss / (r - 1.0);
    st.mean.set(f, mean);
    st.variance.set(f, var);
    st.standard_error.set(f, std::sqrt(var / r));
  }
  return st;
}

/// Monte Carlo feature statistics over R naive-sampler graphs; replicate i uses
/// the stream derive_seed(seed, {i}), so results do not depend on run order.
inline McStats mc_feature_stats(const GeneratingMeasure& w, std::size_t n, const FeatureSpec& spec,
                                std::int64_t samples, std::uint64_t seed) {
  if (samples < 100) throw Error(Errc::Domain, "Monte Carlo needs R >= 100");
  std::vector<FeatureVector> draws;
  draws.reserve(static_cast<std::size_t>(samples));
  for (std::int64_t i = 0; i < samples; ++i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    draws.push_back(feature_vector(naive_sample(n, w, rng), spec));
  }
  return summarize(spec, draws);
}

}  // namespace mfng::oracle

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "mfng/errors.hpp"
#include "mfng/features.hpp"
#include "mfng/measure.hpp"

namespace mfng {

inline constexpr int kMaxCliqueOrder = 8;
inline constexpr std::int64_t kMaxExactDegreeNodes = 64;

/// log C(n, r) as a sum of min(r, n-r) logarithms. Accurate to a few ulps per
/// term, unlike lgamma differences at large n.
inline double log_choose(std::int64_t n, std::int64_t r) {
  if (r < 0 || r > n) return -std::numeric_limits<double>::infinity();
  r = std::min(r, n - r);
  double acc = 0.0;
  for (std::int64_t i = 0; i < r; ++i)
    acc += std::log(static_cast<double>(n - i) / static_cast<double>(i + 1));
  return acc;
}

namespace detail {

// scale * C(n, r) when every partial product stays below 2^53, else NaN
inline double exact_count(std::int64_t n, std::int64_t r, std::int64_t scale = 1) {
  if (r < 0 || r > n) return 0.0;
  r = std::min(r, n - r);
  constexpr unsigned __int128 limit = static_cast<unsigned __int128>(1) << 53;
  unsigned __int128 c = 1;
  for (std::int64_t i = 0; i < r; ++i) {
    c *= static_cast<unsigned __int128>(n - i);
    if (c > limit * static_cast<unsigned __int128>(i + 1)) return std::numeric_limits<double>::quiet_NaN();
    c /= static_cast<unsigned __int128>(i + 1);
  }
  c *= static_cast<unsigned __int128>(scale);
  return c > limit ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(c);
}

// count * factor^k. Plain product when the count is exact and factor^k is a
// normal double; otherwise exp(log count + k log factor).
inline double scaled_power(double exact, double log_count, double factor, int k) {
  if (factor <= 0.0 || std::isinf(log_count)) return 0.0;
  if (!std::isnan(exact)) {
    const double pk = std::pow(factor, k);
    const double v = exact * pk;
    if (pk >= std::numeric_limits<double>::min() && std::isfinite(v)) return v;
  }
  return std::exp(log_count + static_cast<double>(k) * std::log(factor));
}

// r_i = sum_j p_ij l_j: probability that a node of category i links to a random node at one level.
inline std::vector<double> row_survival(std::span<const double> lengths, const ProbMatrix& p) {
  const int m = p.size();
  std::vector<double> r(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) r[i] += p(i, j) * lengths[j];
  return r;
}

inline void check_n(std::int64_t n, std::int64_t min_n) {
  if (n < min_n)
    throw Error(Errc::Domain, "node count " + std::to_string(n) + " below " + std::to_string(min_n));
}

inline void clique_factor_rec(const GeneratingMeasure& w, int t, std::vector<int>& tuple, int depth,
                              double partial, double& acc) {
  if (depth == t) {
    acc += partial;
    return;
  }
  for (int c = 0; c < w.m(); ++c) {
    double term = partial * w.length(c);
    for (int a = 0; a < depth && term != 0.0; ++a) term *= w.p(tuple[a], c);
    if (term == 0.0) continue;
    tuple[depth] = c;
    clique_factor_rec(w, t, tuple, depth + 1, term, acc);
  }
}

}  // namespace detail

/// Per-level probability that a d-star placement survives:
/// sum_i l_i (sum_j p_ij l_j)^d. Equal to the (d+1)-fold category sum because
/// the product over leaf categories separates.
inline double star_factor(const GeneratingMeasure& w, int d) {
  const auto r = detail::row_survival(w.lengths(), w.probs());
  double acc = 0.0;
  for (int i = 0; i < w.m(); ++i) acc += w.length(i) * std::pow(r[i], d);
  return acc;
}

/// Per-level probability s_t that a t-clique placement survives, by direct
/// enumeration of the m^t category tuples.
inline double clique_factor(const GeneratingMeasure& w, int t) {
  if (t > kMaxCliqueOrder) throw Error(Errc::TooLargeT, "t = " + std::to_string(t) + " exceeds 8");
  if (t < 1) throw Error(Errc::Domain, "t must be >= 1");
  std::vector<int> tuple(static_cast<std::size_t>(t), 0);
  double acc = 0.0;
  detail::clique_factor_rec(w, t, tuple, 0, 1.0, acc);
  return acc;
}

/// E[|E|] = C(n,2) s^k.
inline double expected_edges(const GeneratingMeasure& w, std::int64_t n) {
  detail::check_n(n, 2);
  return detail::scaled_power(detail::exact_count(n, 2), log_choose(n, 2), edge_survival_factor(w), w.k());
}

/// E[S_d] = n C(n-1, d) (sum_i l_i r_i^d)^k.
inline double expected_d_stars(const GeneratingMeasure& w, std::int64_t n, int d) {
  if (d < 1 || d > n - 1)
    throw Error(Errc::Domain, "star order d = " + std::to_string(d) + " outside [1, n-1]");
  return detail::scaled_power(detail::exact_count(n - 1, d, n),
                              std::log(static_cast<double>(n)) + log_choose(n - 1, d), star_factor(w, d), w.k());
}

/// E[C_t] = C(n,t) s_t^k for 2 <= t <= min(n, 8).
inline double expected_t_cliques(const GeneratingMeasure& w, std::int64_t n, int t) {
  if (t > kMaxCliqueOrder) throw Error(Errc::TooLargeT, "t = " + std::to_string(t) + " exceeds 8");
  if (t < 2 || t > n)
    throw Error(Errc::Domain, "clique order t = " + std::to_string(t) + " outside [2, n]");
  return detail::scaled_power(detail::exact_count(n, t), log_choose(n, t), clique_factor(w, t), w.k());
}

struct EdgeMoments {
  double mean = 0.0;
  double variance = 0.0;
  double std = 0.0;
};

namespace detail {

struct LevelFactors {
  double s;    // edge survival
  double q;    // wedge survival, sum_i l_i r_i^2
  double dq;   // q - s^2 = sum_i l_i (r_i - s)^2 >= 0
};

inline LevelFactors level_factors(std::span<const double> lengths, const ProbMatrix& p) {
  const auto r = row_survival(lengths, p);
  LevelFactors f{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < r.size(); ++i) {
    f.s += lengths[i] * r[i];
    f.q += lengths[i] * r[i] * r[i];
  }
  for (std::size_t i = 0; i < r.size(); ++i) f.dq += lengths[i] * (r[i] - f.s) * (r[i] - f.s);
  return f;
}

// Var(|E|) = C(n,2) [a(1-a) + 2(n-2)(w - a^2)], a = P(edge), w = P(wedge).
inline EdgeMoments assemble_edge_moments(std::int64_t n, double mean, double a, double one_minus_a,
                                         double w_minus_a2) {
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  double var = pairs * (a * one_minus_a + 2.0 * static_cast<double>(n - 2) * w_minus_a2);
  if (var < 0.0 && std::abs(var) <= 1e-9 * mean * mean) var = 0.0;
  return {mean, var, std::sqrt(std::max(var, 0.0))};
}

}  // namespace detail

/// Mean and variance of the edge count. Uses an expansion of the covariance-sum
/// variance whose terms are all non-negative, so no cancellation occurs.
inline EdgeMoments edge_moments(const GeneratingMeasure& w, std::int64_t n) {
  detail::check_n(n, 2);
  const auto f = detail::level_factors(w.lengths(), w.probs());
  const int k = w.k();
  const double mean = expected_edges(w, n);
  if (f.s <= 0.0) return {0.0, 0.0, 0.0};
  const double log_a = static_cast<double>(k) * std::log(f.s);
  const double a = std::exp(log_a);
  const double one_minus_a = -std::expm1(log_a);
  // q^k - s^{2k} = (q - s^2) sum_{j<k} q^j s^{2(k-1-j)}
  const double s2 = f.s * f.s;
  double geometric = 0.0;
  for (int j = 0; j < k; ++j) geometric += std::pow(f.q, j) * std::pow(s2, k - 1 - j);
  return detail::assemble_edge_moments(n, mean, a, one_minus_a, f.dq * geometric);
}

/// Edge moments when level i uses its own matrix P^(i) (all with the same lengths).
inline EdgeMoments edge_moments(std::span<const double> lengths, std::span<const ProbMatrix> levels,
                                std::int64_t n) {
  detail::check_n(n, 2);
  if (levels.empty()) throw Error(Errc::Domain, "need at least one level");
  std::vector<detail::LevelFactors> f;
  f.reserve(levels.size());
  double log_a = 0.0;
  for (const auto& p : levels) {
    f.push_back(detail::level_factors(lengths, p));
    if (f.back().s <= 0.0) return {0.0, 0.0, 0.0};
    log_a += std::log(f.back().s);
  }
  const double mean = std::exp(log_choose(n, 2) + log_a);
  const double a = std::exp(log_a);
  const double one_minus_a = -std::expm1(log_a);
  // prod q_i - prod s_i^2 = sum_j (prod_{i<j} q_i) (q_j - s_j^2) (prod_{i>j} s_i^2)
  const std::size_t k = f.size();
  std::vector<double> suffix(k + 1, 1.0);
  for (std::size_t i = k; i-- > 0;) suffix[i] = suffix[i + 1] * f[i].s * f[i].s;
  double prefix = 1.0, diff = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    diff += prefix * f[j].dq * suffix[j + 1];
    prefix *= f[j].q;
  }
  return detail::assemble_edge_moments(n, mean, a, one_minus_a, diff);
}

enum class DegreeMode { Exact, Float };

/// E[E_d] for d = 0..n-1 as exact rationals, by the top-down recursion
/// E[E_{n-1}] = E[S_{n-1}], E[E_d] = E[S_d] - sum_{i>d} C(i,d) E[E_i].
/// Lengths are renormalized exactly so that sum_d E[E_d] == n holds exactly.
inline std::vector<mpq_class> expected_degree_counts_exact(const GeneratingMeasure& w, std::int64_t n) {
  detail::check_n(n, 1);
  if (n > kMaxExactDegreeNodes)
    throw Error(Errc::ExactModeTooLarge, "exact mode supports n <= 64, got " + std::to_string(n));
  const int m = w.m();
  std::vector<mpq_class> len(static_cast<std::size_t>(m));
  mpq_class total = 0;
  for (int i = 0; i < m; ++i) {
    len[i] = mpq_class(w.length(i));
    total += len[i];
  }
  for (auto& l : len) l /= total;
  std::vector<mpq_class> r(static_cast<std::size_t>(m), mpq_class(0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) r[i] += mpq_class(w.p(i, j)) * len[j];

  const auto nn = static_cast<std::size_t>(n);
  // binom[i][d] = C(i, d) for i < n
  std::vector<std::vector<mpz_class>> binom(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    binom[i].assign(i + 1, mpz_class(1));
    for (std::size_t d = 1; d < i; ++d) binom[i][d] = binom[i - 1][d - 1] + binom[i - 1][d];
  }

  std::vector<mpq_class> stars(nn);
  std::vector<mpq_class> rpow(r.begin(), r.end());
  for (auto& x : rpow) x = 1;
  for (std::size_t d = 0; d < nn; ++d) {
    mpq_class level = 0;
    for (int i = 0; i < m; ++i) level += len[i] * rpow[i];
    mpq_class power = 1;
    for (int lvl = 0; lvl < w.k(); ++lvl) power *= level;
    stars[d] = mpq_class(mpz_class(n) * binom[nn - 1][d]) * power;
    for (int i = 0; i < m; ++i) rpow[i] *= r[i];
  }

  std::vector<mpq_class> out(nn);
  for (std::size_t d = nn; d-- > 0;) {
    mpq_class v = stars[d];
    for (std::size_t i = d + 1; i < nn; ++i) v -= mpq_class(binom[i][d]) * out[i];
    out[d] = v;
  }
  return out;
}

/// Expected number of nodes of each degree d = 0..n-1. Float mode runs the same
/// recursion in long double and loses accuracy beyond n ~ 50 through cancellation.
inline std::vector<double> expected_degree_counts(const GeneratingMeasure& w, std::int64_t n,
                                                  DegreeMode mode = DegreeMode::Exact) {
  if (mode == DegreeMode::Exact) {
    const auto exact = expected_degree_counts_exact(w, n);
    std::vector<double> out;
    out.reserve(exact.size());
    for (const auto& v : exact) out.push_back(v.get_d());
    return out;
  }
  detail::check_n(n, 1);
  const auto r = detail::row_survival(w.lengths(), w.probs());
  const auto nn = static_cast<std::size_t>(n);
  std::vector<long double> stars(nn);
  for (std::size_t d = 0; d < nn; ++d) {
    long double level = 0.0L;
    for (int i = 0; i < w.m(); ++i)
      level += static_cast<long double>(w.length(i)) * std::pow(static_cast<long double>(r[i]), d);
    const long double log_count = std::log(static_cast<long double>(n)) +
                                  static_cast<long double>(log_choose(n - 1, static_cast<std::int64_t>(d)));
    stars[d] = level > 0.0L ? std::exp(log_count + w.k() * std::log(level)) : 0.0L;
  }
  std::vector<long double> e(nn);
  for (std::size_t d = nn; d-- > 0;) {
    long double v = stars[d];
    long double c = 1.0L;  // C(i, d), starting at i = d
    for (std::size_t i = d + 1; i < nn; ++i) {
      c = c * static_cast<long double>(i) / static_cast<long double>(i - d);
      v -= c * e[i];
    }
    e[d] = v;
  }
  return {e.begin(), e.end()};
}

struct CliqueNumberEstimate {
  int t = 1;
  bool capped = false;
};

/// Smallest t on an ascending scan with E[C_t] >= 1 > E[C_{t+1}], with E[C_1] = n.
/// The scan stops at t = min(n, 8); `capped` is set when E[C_8] >= 1 and n > 8.
inline CliqueNumberEstimate estimate_clique_number(const GeneratingMeasure& w, std::int64_t n) {
  detail::check_n(n, 1);
  for (int t = 1;; ++t) {
    if (t + 1 > n) return {t, false};
    if (t + 1 > kMaxCliqueOrder) return {t, true};
    if (expected_t_cliques(w, n, t + 1) < 1.0) return {t, false};
  }
}

/// Expectation of a single feature at n nodes.
inline double expected_feature(const GeneratingMeasure& w, std::int64_t n, Feature f) {
  switch (f.kind) {
    case Feature::Kind::Edges: return expected_edges(w, n);
    case Feature::Kind::Star: return expected_d_stars(w, n, f.order);
    case Feature::Kind::Clique: return expected_t_cliques(w, n, f.order);
  }
  return 0.0;
}

inline FeatureVector expected_feature_vector(const GeneratingMeasure& w, std::int64_t n,
                                             const FeatureSpec& spec) {
  FeatureVector out;
  for (Feature f : spec) out.set(f, expected_feature(w, n, f));
  return out;
}

}  // namespace mfng

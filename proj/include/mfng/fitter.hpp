#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <thread>
#include <tuple>
#include <vector>

#include "mfng/errors.hpp"
#include "mfng/features.hpp"
#include "mfng/measure.hpp"
#include "mfng/moments.hpp"
#include "mfng/random.hpp"

namespace mfng {

using FeatureWeights = std::map<Feature, double>;

/// Weight 1 on every feature present in `target`.
inline FeatureWeights unit_weights(const FeatureVector& target) {
  FeatureWeights w;
  for (Feature f : target.features()) w[f] = 1.0;
  return w;
}

namespace detail {

struct WeightedTerm {
  Feature feature;
  double target;
  double weight;
};

inline std::vector<WeightedTerm> weighted_terms(const FeatureVector& target, const FeatureWeights& weights,
                                                double scale = 1.0) {
  std::vector<WeightedTerm> terms;
  for (const auto& [f, w] : weights) {
    if (w < 0.0 || !std::isfinite(w)) throw Error(Errc::Domain, "weights must be finite and >= 0");
    if (w == 0.0) continue;
    if (!target.contains(f)) throw Error(Errc::Domain, "weighted feature " + f.name() + " missing from target");
    const double F = target.get(f);
    if (!(F > 0.0)) throw Error(Errc::ZeroTargetFeature, "target " + f.name() + " is zero");
    terms.push_back({f, F, w * scale});
  }
  if (terms.empty()) throw Error(Errc::Domain, "at least one weight must be positive");
  return terms;
}

inline double evaluate_terms(const GeneratingMeasure& w, std::int64_t n, const std::vector<WeightedTerm>& terms) {
  double total = 0.0;
  for (const auto& t : terms) {
    const double e = expected_feature(w, n, t.feature);
    if (!std::isfinite(e)) return std::numeric_limits<double>::infinity();
    total += t.weight * std::abs(t.target - e) / t.target;
  }
  return std::isfinite(total) ? total : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// sum_i w_i |F_i - E[F_i]| / F_i; +inf if any expectation is non-finite.
inline double objective(const GeneratingMeasure& w, std::int64_t n, const FeatureVector& target,
                        const FeatureWeights& weights) {
  return detail::evaluate_terms(w, n, detail::weighted_terms(target, weights));
}

/// Uniform upper-triangle probabilities and lengths uniform on the simplex.
template <class Urbg>
GeneratingMeasure random_init(int m, int k, Urbg& rng) {
  if (m < 1) throw Error(Errc::Domain, "m must be >= 1");
  ProbMatrix p(m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) p(i, j) = p(j, i) = uniform01(rng);
  std::vector<double> lengths(static_cast<std::size_t>(m));
  double sum = 0.0;
  for (double& l : lengths) {
    l = -std::log1p(-uniform01(rng));
    sum += l;
  }
  for (double& l : lengths) l /= sum;
  return {k, std::move(lengths), std::move(p)};
}

struct LocalOptions {
  double tolerance = 1e-10;
  int max_iterations = 2000;
};

struct LocalResult {
  GeneratingMeasure measure;
  double objective;
  int iterations;
};

namespace detail {

// Unconstrained coordinates: logits of the upper-triangle p_ij, then log-weights
// whose softmax gives the lengths. Every point decodes to a feasible measure.
class MeasureCoordinates {
 public:
  MeasureCoordinates(int m, int k) : m_(m), k_(k) {}

  std::size_t dimension() const { return static_cast<std::size_t>(m_ * (m_ + 1) / 2 + m_); }

  std::vector<double> encode(const GeneratingMeasure& w) const {
    std::vector<double> x;
    x.reserve(dimension());
    for (int i = 0; i < m_; ++i)
      for (int j = i; j < m_; ++j) {
        const double p = std::clamp(w.p(i, j), 1e-12, 1.0 - 1e-12);
        x.push_back(std::log(p / (1.0 - p)));
      }
    for (int i = 0; i < m_; ++i) x.push_back(std::log(std::max(w.length(i), 1e-300)));
    return x;
  }

  std::optional<GeneratingMeasure> decode(const std::vector<double>& x) const {
    for (double v : x)
      if (!std::isfinite(v)) return std::nullopt;
    ProbMatrix p(m_);
    std::size_t idx = 0;
    for (int i = 0; i < m_; ++i)
      for (int j = i; j < m_; ++j) p(i, j) = p(j, i) = 1.0 / (1.0 + std::exp(-x[idx++]));
    const double top = *std::max_element(x.begin() + static_cast<std::ptrdiff_t>(idx), x.end());
    std::vector<double> lengths(static_cast<std::size_t>(m_));
    double sum = 0.0;
    for (int i = 0; i < m_; ++i) sum += lengths[i] = std::exp(x[idx + i] - top);
    for (double& l : lengths) l /= sum;
    return GeneratingMeasure(k_, std::move(lengths), std::move(p));
  }

 private:
  int m_, k_;
};

// Nelder-Mead on f from x0; stops when the simplex's objective spread drops
// below tol or after `budget` iterations. Returns (best point, best value, iterations used).
template <class F>
std::tuple<std::vector<double>, double, int> nelder_mead(F&& f, std::vector<double> x0, double step, double tol,
                                                         int budget) {
  const std::size_t d = x0.size();
  std::vector<std::vector<double>> pts(d + 1, x0);
  std::vector<double> vals(d + 1);
  for (std::size_t i = 0; i < d; ++i) pts[i + 1][i] += step;
  for (std::size_t i = 0; i <= d; ++i) vals[i] = f(pts[i]);

  std::vector<std::size_t> order(d + 1);
  std::vector<double> centroid(d), trial(d), trial2(d);
  int it = 0;
  for (; it < budget; ++it) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[d - 1];
    if (vals[worst] - vals[best] < tol) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) centroid[j] += pts[order[i]][j];
    for (double& c : centroid) c /= static_cast<double>(d);

    auto along = [&](double t, std::vector<double>& out) {
      for (std::size_t j = 0; j < d; ++j) out[j] = centroid[j] + t * (pts[worst][j] - centroid[j]);
      return f(out);
    };
    const double fr = along(-1.0, trial);
    if (fr < vals[best]) {
      const double fe = along(-2.0, trial2);
      if (fe < fr) {
        pts[worst] = trial2;
        vals[worst] = fe;
      } else {
        pts[worst] = trial;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = trial;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const double fc = along(outside ? -0.5 : 0.5, trial2);
    if (outside ? fc <= fr : fc < vals[worst]) {
      pts[worst] = trial2;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < d; ++j) pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
      vals[i] = f(pts[i]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  return {pts[best], vals[best], it};
}

}  // namespace detail

namespace detail {

// sum_i w_i log(E[F_i] / F_i)^2: smooth, and zero exactly where the objective is
inline double log_square_terms(const GeneratingMeasure& w, std::int64_t n, const std::vector<WeightedTerm>& terms) {
  double total = 0.0;
  for (const auto& t : terms) {
    const double e = expected_feature(w, n, t.feature);
    if (!(e > 0.0) || !std::isfinite(e)) return std::numeric_limits<double>::infinity();
    const double r = std::log(e / t.target);
    total += t.weight * r * r;
  }
  return total;
}

// Nelder-Mead restarted from the incumbent with a halved simplex while each
// round still improves; `relative` compares improvements as fractions of f.
template <class F>
std::pair<std::vector<double>, double> nelder_mead_restarts(F&& f, std::vector<double> x, double tol, bool relative,
                                                            int budget, int& used) {
  double fx = f(x);
  double step = 1.0;
  while (used < budget) {
    auto [xn, fn, it] = nelder_mead(f, x, step, relative ? 0.0 : tol, budget - used);
    used += it + 1;
    const bool improved = relative ? fn < fx * (1.0 - tol) : fn < fx - tol;
    if (fn < fx) {
      x = std::move(xn);
      fx = fn;
    }
    if (!improved) break;
    step = std::max(step * 0.5, 1e-3);
  }
  return {std::move(x), fx};
}

}  // namespace detail

/// Derivative-free local descent from `init` at fixed depth init.k(), in the
/// logistic/softmax coordinates. Up to half the iteration budget goes to
/// Nelder-Mead on the squared log-ratios of expected to target counts (the
/// absolute-value objective has kinks where simplex steps stall); the rest
/// runs Nelder-Mead on the objective itself from the better of that point and
/// `init`. Never returns a worse objective than `init`.
inline LocalResult local_optimize(const GeneratingMeasure& init, std::int64_t n, const FeatureVector& target,
                                  const FeatureWeights& weights, const LocalOptions& opts = {}) {
  const auto raw_terms = detail::weighted_terms(target, weights);
  double weight_sum = 0.0;
  for (const auto& t : raw_terms) weight_sum += t.weight;
  // normalized so that tolerances do not depend on the overall weight scale
  const auto terms = detail::weighted_terms(target, weights, 1.0 / weight_sum);

  const detail::MeasureCoordinates coords(init.m(), init.k());
  auto objective_at = [&](const std::vector<double>& x) {
    const auto w = coords.decode(x);
    return w ? detail::evaluate_terms(*w, n, terms) : std::numeric_limits<double>::infinity();
  };
  auto smooth_at = [&](const std::vector<double>& x) {
    const auto w = coords.decode(x);
    return w ? detail::log_square_terms(*w, n, terms) : std::numeric_limits<double>::infinity();
  };

  const std::vector<double> x0 = coords.encode(init);
  int used = 0;
  const auto xs = detail::nelder_mead_restarts(smooth_at, x0, 1e-9, true, opts.max_iterations / 2, used).first;
  const auto& start = objective_at(xs) < objective_at(x0) ? xs : x0;
  auto [x, fx] = detail::nelder_mead_restarts(objective_at, start, opts.tolerance, false, opts.max_iterations, used);

  const double init_obj = detail::evaluate_terms(init, n, raw_terms);
  auto found = coords.decode(x);
  if (found) {
    const double obj = detail::evaluate_terms(*found, n, raw_terms);
    if (obj <= init_obj) return {std::move(*found), obj, used};
  }
  return {init, init_obj, used};
}

/// Smallest k with m^k >= n (k = 1 when m = 1).
inline int ceil_log(int m, std::int64_t n) {
  if (m <= 1 || n <= 1) return 1;
  int k = 0;
  unsigned __int128 acc = 1;
  while (acc < static_cast<unsigned __int128>(n)) {
    acc *= static_cast<unsigned>(m);
    ++k;
  }
  return std::max(k, 1);
}

struct FitConfig {
  int m = 2;
  std::optional<int> k;   // fixed depth; sweep around ceil(log_m n) when unset
  int k_max = 0;          // 0: largest depth with m^k <= 2^62
  int restarts = 200;
  FeatureWeights weights; // empty: unit weight on every target feature
  std::uint64_t seed = 0;
  LocalOptions local;
  unsigned threads = 1;
};

/// Depths tried by `fit`: {k} or {c-2, ..., c+2} intersected with [1, k_max], c = ceil(log_m n).
inline std::vector<int> depth_candidates(const FitConfig& cfg, std::int64_t n) {
  const int k_max = cfg.k_max > 0 ? std::min(cfg.k_max, max_depth(cfg.m)) : max_depth(cfg.m);
  if (cfg.k) {
    if (*cfg.k < 1 || *cfg.k > k_max) throw Error(Errc::Domain, "fixed k outside [1, k_max]");
    return {*cfg.k};
  }
  const int center = ceil_log(cfg.m, n);
  std::vector<int> ks;
  for (int k = center - 2; k <= center + 2; ++k)
    if (k >= 1 && k <= k_max) ks.push_back(k);
  return ks;
}

struct DepthSummary {
  int k;
  double best_objective;
  int best_restart;
};

struct FitResult {
  GeneratingMeasure measure;
  double objective;
  FeatureVector ratios;  // E[F_i] / F_i for every target feature with F_i > 0
  int k;
  int restart;
  std::vector<DepthSummary> per_depth;
};

/// E[F_i] / F_i for every present feature with F_i > 0.
inline FeatureVector feature_ratios(const GeneratingMeasure& w, std::int64_t n, const FeatureVector& target) {
  FeatureVector out;
  for (Feature f : target.features())
    if (target.get(f) > 0.0) out.set(f, expected_feature(w, n, f) / target.get(f));
  return out;
}

/// Method-of-moments fit with random restarts. Restart r at depth k draws its
/// initial point from derive_seed(seed, {k, r}); the winner is the lowest
/// objective, ties going to the smaller k and then the lower restart index, so
/// the result does not depend on `threads`.
inline FitResult fit(const FeatureVector& target, std::int64_t n, const FitConfig& cfg) {
  if (cfg.restarts < 1) throw Error(Errc::Domain, "restarts must be >= 1");
  if (cfg.m < 1) throw Error(Errc::Domain, "m must be >= 1");
  const FeatureWeights weights = cfg.weights.empty() ? unit_weights(target) : cfg.weights;
  detail::weighted_terms(target, weights);  // validates before spawning work

  const auto ks = depth_candidates(cfg, n);
  struct Job {
    int k, restart;
  };
  std::vector<Job> jobs;
  for (int k : ks)
    for (int r = 0; r < cfg.restarts; ++r) jobs.push_back({k, r});

  std::vector<std::optional<LocalResult>> results(jobs.size());
  auto run = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < jobs.size(); i += stride) {
      Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(jobs[i].k), static_cast<std::uint64_t>(jobs[i].restart)}));
      const auto init = random_init(cfg.m, jobs[i].k, rng);
      results[i] = local_optimize(init, n, target, weights, cfg.local);
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(jobs.size())));
  if (threads == 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(run, t, threads);
    for (auto& th : pool) th.join();
  }

  std::size_t best = 0;
  std::vector<DepthSummary> per_depth;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const double obj = results[i]->objective;
    if (obj < results[best]->objective) best = i;
    if (per_depth.empty() || per_depth.back().k != jobs[i].k) per_depth.push_back({jobs[i].k, obj, jobs[i].restart});
    else if (obj < per_depth.back().best_objective) per_depth.back() = {jobs[i].k, obj, jobs[i].restart};
  }
  const auto& win = *results[best];
  return {win.measure,       win.objective, feature_ratios(win.measure, n, target),
          jobs[best].k,      jobs[best].restart, std::move(per_depth)};
}

}  // namespace mfng

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mfng/errors.hpp"

namespace mfng {

/// Row-major square matrix of link probabilities.
class ProbMatrix {
 public:
  ProbMatrix() = default;
  explicit ProbMatrix(int m, double fill = 0.0)
      : m_(m), data_(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), fill) {}
  ProbMatrix(int m, std::vector<double> row_major) : m_(m), data_(std::move(row_major)) {
    if (data_.size() != static_cast<std::size_t>(m) * static_cast<std::size_t>(m))
      throw Error(Errc::Domain, "probability matrix must have m*m entries");
  }

  int size() const noexcept { return m_; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * m_ + j]; }
  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * m_ + j]; }
  std::span<const double> flat() const noexcept { return data_; }

  friend bool operator==(const ProbMatrix&, const ProbMatrix&) = default;

 private:
  int m_ = 0;
  std::vector<double> data_;
};

/// Largest depth k with m^k <= 2^62, so a k-tuple of categories fits one word.
inline int max_depth(int m) {
  if (m <= 1) return 1 << 20;
  int k = 0;
  unsigned __int128 acc = 1;
  const unsigned __int128 limit = static_cast<unsigned __int128>(1) << 62;
  while (acc * static_cast<unsigned>(m) <= limit) {
    acc *= static_cast<unsigned>(m);
    ++k;
  }
  return k;
}

namespace detail {

inline std::vector<double> checked_lengths(std::vector<double> lengths) {
  if (lengths.empty()) throw Error(Errc::BadLengths, "need at least one category");
  double sum = 0.0;
  for (double l : lengths) {
    if (!std::isfinite(l) || l < 0.0 || l > 1.0)
      throw Error(Errc::BadLengths, "length outside [0,1]: " + std::to_string(l));
    sum += l;
  }
  if (!(sum > 0.0)) throw Error(Errc::BadLengths, "lengths sum to zero");
  const double dev = std::abs(sum - 1.0);
  if (dev > 1e-9) throw Error(Errc::BadLengths, "lengths sum to " + std::to_string(sum));
  if (dev > 1e-12)
    for (double& l : lengths) l /= sum;
  return lengths;
}

inline void check_probs(const ProbMatrix& p) {
  const int m = p.size();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double v = p(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw Error(Errc::OutOfRangeProbability,
                    "p(" + std::to_string(i) + "," + std::to_string(j) + ") = " + std::to_string(v));
      if (v != p(j, i))
        throw Error(Errc::NonSymmetric,
                    "p(" + std::to_string(i) + "," + std::to_string(j) + ") != p(" + std::to_string(j) +
                        "," + std::to_string(i) + ")");
    }
}

}  // namespace detail

/// The generating measure W_k(P, l): m interval lengths, a symmetric m x m
/// link-probability matrix and the recursion depth k. Construction validates;
/// an instance is always well formed.
class GeneratingMeasure {
 public:
  GeneratingMeasure(int k, std::vector<double> lengths, ProbMatrix probs)
      : k_(k), lengths_(std::move(lengths)), probs_(std::move(probs)) {
    if (k_ < 1) throw Error(Errc::Domain, "depth k must be >= 1");
    if (probs_.size() != static_cast<int>(lengths_.size()))
      throw Error(Errc::Domain, "lengths and probability matrix disagree on m");
    lengths_ = detail::checked_lengths(std::move(lengths_));
    detail::check_probs(probs_);
    if (k_ > max_depth(m()))
      throw Error(Errc::DepthOverflow, "m^k exceeds 2^62 (m=" + std::to_string(m()) +
                                           ", k=" + std::to_string(k_) + ")");
  }

  int m() const noexcept { return static_cast<int>(lengths_.size()); }
  int k() const noexcept { return k_; }
  std::span<const double> lengths() const noexcept { return lengths_; }
  double length(int i) const { return lengths_[static_cast<std::size_t>(i)]; }
  const ProbMatrix& probs() const noexcept { return probs_; }
  double p(int i, int j) const { return probs_(i, j); }

  GeneratingMeasure with_depth(int k) const { return {k, lengths_, probs_}; }

  friend bool operator==(const GeneratingMeasure&, const GeneratingMeasure&) = default;

 private:
  int k_;
  std::vector<double> lengths_;
  ProbMatrix probs_;
};

/// Builds a measure from raw parts, throwing an Error on any invariant violation.
inline GeneratingMeasure validate_measure(int k, std::vector<double> lengths,
                                          std::vector<double> probs_row_major) {
  const int m = static_cast<int>(lengths.size());
  if (probs_row_major.size() != static_cast<std::size_t>(m) * static_cast<std::size_t>(m))
    throw Error(Errc::Domain, "probability matrix must have m*m entries");
  return {k, std::move(lengths), ProbMatrix(m, std::move(probs_row_major))};
}

/// s = sum_ij p_ij l_i l_j, the per-level survival probability of a random pair.
inline double edge_survival_factor(std::span<const double> lengths, const ProbMatrix& p) {
  const int m = p.size();
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    double row = 0.0;
    for (int j = 0; j < m; ++j) row += p(i, j) * lengths[j];
    s += lengths[i] * row;
  }
  return s;
}

inline double edge_survival_factor(const GeneratingMeasure& w) {
  return edge_survival_factor(w.lengths(), w.probs());
}

}  // namespace mfng

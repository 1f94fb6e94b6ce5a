#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace mfng {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for an independent stream identified by (seed, ids...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t id : ids) h = splitmix64(h ^ splitmix64(id + 0x632be59bd9b4e019ULL));
  return h;
}

/// Independent engine derived from the current state of `rng` without advancing it.
template <class Urbg>
Rng fork_stream(const Urbg& rng, std::uint64_t tag) {
  Urbg copy = rng;
  return Rng(derive_seed(static_cast<std::uint64_t>(copy()), {tag}));
}

/// Uniform double in [0, 1) with 53 random bits.
template <class Urbg>
double uniform01(Urbg& rng) {
  return std::generate_canonical<double, 53>(rng);
}

template <class Urbg>
std::size_t uniform_index(Urbg& rng, std::size_t size) {
  return std::uniform_int_distribution<std::size_t>(0, size - 1)(rng);
}

/// Inverse-CDF sampler over a fixed non-negative weight vector. Zero-weight
/// entries are never drawn.
class DiscreteTable {
 public:
  DiscreteTable() = default;
  explicit DiscreteTable(std::span<const double> weights) : cdf_(weights.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      cdf_[i] = acc;
    }
  }

  double total() const noexcept { return cdf_.empty() ? 0.0 : cdf_.back(); }
  std::size_t size() const noexcept { return cdf_.size(); }

  template <class Urbg>
  std::size_t sample(Urbg& rng) const {
    const double x = uniform01(rng) * total();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), x);
    if (it == cdf_.end()) --it;
    // step back over trailing zero-weight entries that rounding might land on
    while (it != cdf_.begin() && *it == *(it - 1)) --it;
    return static_cast<std::size_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace mfng

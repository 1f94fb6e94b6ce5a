#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfng/errors.hpp"

namespace mfng {

/// One subgraph feature: the edge count, a d-star count S_d or a t-clique count C_t.
struct Feature {
  enum class Kind { Edges, Star, Clique };

  Kind kind = Kind::Edges;
  int order = 1;

  static constexpr Feature edges() { return {Kind::Edges, 1}; }
  static constexpr Feature star(int d) { return {Kind::Star, d}; }
  static constexpr Feature clique(int t) { return {Kind::Clique, t}; }

  std::string name() const {
    switch (kind) {
      case Kind::Edges: return "E";
      case Kind::Star: return "S" + std::to_string(order);
      case Kind::Clique: return "C" + std::to_string(order);
    }
    return "?";
  }

  friend auto operator<=>(const Feature&, const Feature&) = default;
};

using FeatureSpec = std::vector<Feature>;

/// Edges, wedges, 3-stars, 4-stars, triangles and 4-cliques.
inline FeatureSpec default_feature_spec() {
  return {Feature::edges(), Feature::star(2), Feature::star(3),
          Feature::star(4), Feature::clique(3), Feature::clique(4)};
}

/// Accepts "E"/"edges", "S<d>" and "C<t>" (case-insensitive).
inline Feature parse_feature(std::string_view text) {
  std::string s(text);
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (s == "E" || s == "EDGES") return Feature::edges();
  if (s.size() >= 2 && (s[0] == 'S' || s[0] == 'C')) {
    int order = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i])) || order > 1000)
        throw Error(Errc::Domain, "bad feature name '" + std::string(text) + "'");
      order = order * 10 + (s[i] - '0');
    }
    if (s[0] == 'S' && order >= 1) return Feature::star(order);
    if (s[0] == 'C' && order >= 2) return order == 2 ? Feature::edges() : Feature::clique(order);
  }
  throw Error(Errc::Domain, "bad feature name '" + std::string(text) + "'");
}

/// Comma-separated feature list, e.g. "E,S2,C3".
inline FeatureSpec parse_feature_spec(std::string_view text) {
  FeatureSpec spec;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view tok = text.substr(start, end - start);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.front()))) tok.remove_prefix(1);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.remove_suffix(1);
    if (!tok.empty()) spec.push_back(parse_feature(tok));
    start = end + 1;
  }
  if (spec.empty()) throw Error(Errc::Domain, "empty feature list");
  return spec;
}

/// Counts or expectations of {|E|, S_d, C_t}. Only requested entries are present.
struct FeatureVector {
  std::optional<double> edges;
  std::map<int, double> stars;
  std::map<int, double> cliques;

  void set(Feature f, double value) {
    switch (f.kind) {
      case Feature::Kind::Edges: edges = value; break;
      case Feature::Kind::Star: stars[f.order] = value; break;
      case Feature::Kind::Clique: cliques[f.order] = value; break;
    }
  }

  bool contains(Feature f) const {
    switch (f.kind) {
      case Feature::Kind::Edges: return edges.has_value();
      case Feature::Kind::Star: return stars.contains(f.order);
      case Feature::Kind::Clique: return cliques.contains(f.order);
    }
    return false;
  }

  double get(Feature f) const {
    if (!contains(f)) throw Error(Errc::Domain, "feature " + f.name() + " not present");
    switch (f.kind) {
      case Feature::Kind::Edges: return *edges;
      case Feature::Kind::Star: return stars.at(f.order);
      case Feature::Kind::Clique: return cliques.at(f.order);
    }
    return 0.0;
  }

  /// Present features in canonical order: E, stars ascending, cliques ascending.
  FeatureSpec features() const {
    FeatureSpec out;
    if (edges) out.push_back(Feature::edges());
    for (const auto& [d, v] : stars) out.push_back(Feature::star(d));
    for (const auto& [t, v] : cliques) out.push_back(Feature::clique(t));
    return out;
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

}  // namespace mfng

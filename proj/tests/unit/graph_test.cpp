#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "mfng/graph.hpp"

namespace {

using mfng::Edge;
using mfng::Feature;
using mfng::Graph;

Graph complete(std::size_t n) {
  std::vector<Edge> e;
  for (mfng::NodeId u = 0; u < n; ++u)
    for (mfng::NodeId v = u + 1; v < n; ++v) e.emplace_back(u, v);
  return Graph::from_dense_edges(n, e);
}

Graph star_graph(std::size_t leaves) {
  std::vector<Edge> e;
  for (mfng::NodeId v = 1; v <= leaves; ++v) e.emplace_back(0, v);
  return Graph::from_dense_edges(leaves + 1, e);
}

Graph random_graph(std::mt19937_64& rng, std::size_t n, double p) {
  std::bernoulli_distribution coin(p);
  std::vector<Edge> e;
  for (mfng::NodeId u = 0; u < n; ++u)
    for (mfng::NodeId v = u + 1; v < n; ++v)
      if (coin(rng)) e.emplace_back(u, v);
  return Graph::from_dense_edges(n, e);
}

TEST(Graph, FromEdgeListDropsLoopsAndDuplicates) {
  const std::vector<std::pair<std::int64_t, std::int64_t>> pairs{{1, 2}, {2, 1}, {3, 3}};
  const auto g = mfng::from_edge_list(pairs);
  EXPECT_EQ(g.num_nodes(), 3u);
  EXPECT_EQ(g.num_edges(), 1u);
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_FALSE(g.has_edge(2, 2));
}

TEST(Graph, EmptyInput) {
  const auto g = mfng::from_edge_list({});
  EXPECT_EQ(g.num_nodes(), 0u);
  EXPECT_EQ(g.num_edges(), 0u);
  EXPECT_EQ(mfng::count_triangles(g), 0u);
}

TEST(Graph, RemapsSparseIds) {
  const std::vector<std::pair<std::int64_t, std::int64_t>> pairs{{100, -5}, {7, 100}};
  const auto g = mfng::from_edge_list(pairs);
  EXPECT_EQ(g.num_nodes(), 3u);
  // sorted ids: -5 -> 0, 7 -> 1, 100 -> 2
  EXPECT_TRUE(g.has_edge(0, 2));
  EXPECT_TRUE(g.has_edge(1, 2));
  EXPECT_FALSE(g.has_edge(0, 1));
}

TEST(Graph, ReingestIsIdempotent) {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const auto g = random_graph(rng, 30, 0.1);
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (const auto& [u, v] : g.edges()) pairs.emplace_back(u, v);
    EXPECT_EQ(mfng::from_edge_list(pairs, g.num_nodes()), g);
  }
}

TEST(Graph, InvariantsHold) {
  std::mt19937_64 rng(1);
  const auto g = random_graph(rng, 200, 0.05);
  std::size_t degree_sum = 0;
  for (mfng::NodeId u = 0; u < g.num_nodes(); ++u) {
    const auto nb = g.neighbors(u);
    degree_sum += nb.size();
    for (std::size_t i = 0; i < nb.size(); ++i) {
      EXPECT_NE(nb[i], u);
      if (i) {
        EXPECT_LT(nb[i - 1], nb[i]);
      }
      EXPECT_TRUE(g.has_edge(nb[i], u));
    }
  }
  EXPECT_EQ(degree_sum, 2 * g.num_edges());
  EXPECT_GE(mfng::count_stars(g, 2), 3 * mfng::count_triangles(g));
}

TEST(Counters, SmallGraphs) {
  EXPECT_EQ(mfng::count_stars(complete(3), 2), 3u);
  const auto k4 = complete(4);
  EXPECT_EQ(mfng::count_stars(k4, 2), 12u);
  EXPECT_EQ(mfng::count_stars(k4, 3), 4u);
  EXPECT_EQ(mfng::count_triangles(k4), 4u);
  EXPECT_EQ(mfng::count_4cliques(k4), 1u);
  EXPECT_EQ(mfng::count_4cliques(complete(5)), 5u);
  EXPECT_EQ(mfng::count_triangles(star_graph(6)), 0u);
}

TEST(Counters, K4FeatureVector) {
  const auto fv = mfng::feature_vector(complete(4), mfng::default_feature_spec());
  EXPECT_EQ(fv.get(Feature::edges()), 6);
  EXPECT_EQ(fv.get(Feature::star(2)), 12);
  EXPECT_EQ(fv.get(Feature::star(3)), 4);
  EXPECT_EQ(fv.get(Feature::star(4)), 0);
  EXPECT_EQ(fv.get(Feature::clique(3)), 4);
  EXPECT_EQ(fv.get(Feature::clique(4)), 1);

  const auto empty = mfng::feature_vector(Graph::from_dense_edges(5, {}), mfng::default_feature_spec());
  for (Feature f : mfng::default_feature_spec()) EXPECT_EQ(empty.get(f), 0);
}

TEST(Counters, AgreeWithBruteForce) {
  std::mt19937_64 rng(2024);
  const auto spec = mfng::parse_feature_spec("E,S1,S2,S3,S4,S5,C3,C4");
  EXPECT_EQ(mfng::brute_force_counts(complete(5), spec), mfng::feature_vector(complete(5), spec));
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 1 + rep % 12;
    const auto g = random_graph(rng, n, 0.2 + 0.6 * (rep % 5) / 4.0);
    EXPECT_EQ(mfng::brute_force_counts(g, spec), mfng::feature_vector(g, spec)) << "rep " << rep;
  }
  EXPECT_THROW(mfng::brute_force_counts(complete(15), spec), mfng::Error);
}

TEST(Counters, TreeHasNoTriangles) {
  std::vector<Edge> e;
  for (mfng::NodeId v = 1; v < 40; ++v) e.emplace_back((v - 1) / 2, v);
  const auto tree = Graph::from_dense_edges(40, e);
  EXPECT_EQ(mfng::count_triangles(tree), 0u);
  EXPECT_EQ(mfng::count_4cliques(tree), 0u);
}

TEST(Counters, BinomialOverflowIsReported) {
  EXPECT_EQ(mfng::binomial_u64(62, 31), 465428353255261088ull);
  EXPECT_THROW(mfng::binomial_u64(200, 100), mfng::Error);
}

TEST(DegreeDistribution, Shapes) {
  const auto k4 = mfng::degree_distribution(complete(4));
  ASSERT_EQ(k4.counts.size(), 4u);
  EXPECT_EQ(k4.counts[3], 4u);
  const auto s = mfng::degree_distribution(star_graph(3));
  EXPECT_EQ(s.counts[1], 3u);
  EXPECT_EQ(s.counts[3], 1u);
  EXPECT_EQ(s.num_nodes(), 4u);

  std::mt19937_64 rng(6);
  const auto g = random_graph(rng, 300, 0.03);
  const auto dd = mfng::degree_distribution(g);
  EXPECT_EQ(dd.num_nodes(), 300u);
  const auto ccdf = dd.ccdf();
  EXPECT_EQ(ccdf[0], 1.0);
  for (std::size_t d = 1; d < ccdf.size(); ++d) EXPECT_LE(ccdf[d], ccdf[d - 1]);
}

TEST(Clustering, KnownValues) {
  EXPECT_DOUBLE_EQ(mfng::clustering_coefficient(complete(6)), 1.0);
  EXPECT_EQ(mfng::clustering_coefficient(star_graph(5)), 0.0);
  EXPECT_EQ(mfng::clustering_coefficient(Graph::from_dense_edges(3, {{0, 1}, {1, 2}})), 0.0);
  try {
    mfng::clustering_coefficient(Graph::from_dense_edges(2, {{0, 1}}));
    ADD_FAILURE();
  } catch (const mfng::Error& e) {
    EXPECT_EQ(e.code(), mfng::Errc::ZeroWedges);
  }
}

}  // namespace

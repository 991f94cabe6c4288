#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "qcomm/graph.hpp"

using namespace qcomm;

namespace {

Graph two_triangles() { return load_edge_list("0 1\n1 2\n2 0\n3 4\n4 5\n5 3\n", false); }

Graph random_graph(std::size_t n, double p, std::mt19937_64& rng, bool weighted) {
  std::bernoulli_distribution coin(p);
  std::uniform_real_distribution<double> wd(0.1, 5.0);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (coin(rng)) edges.push_back({u, v, weighted ? wd(rng) : 1.0});
  if (edges.empty()) edges.push_back({0, 1, 1.0});
  return Graph(n, edges);
}

CommunityAssignment random_assignment(std::size_t n, std::size_t K, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, K - 1);
  CommunityAssignment a{std::vector<std::size_t>(n), K};
  for (auto& c : a.labels) c = pick(rng);
  return a;
}

}  // namespace

TEST(LoadEdgeList, Triangle) {
  const Graph g = load_edge_list("0 1\n1 2\n2 0", false);
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_DOUBLE_EQ(g.total_edge_weight(), 3.0);
  EXPECT_EQ(degree_vector(g), (std::vector<double>{2, 2, 2}));
}

TEST(LoadEdgeList, WeightedSingleEdge) {
  const Graph g = load_edge_list("a b 2.5", true);
  EXPECT_EQ(g.node_count(), 2u);
  EXPECT_DOUBLE_EQ(g.total_edge_weight(), 2.5);
  EXPECT_EQ(degree_vector(g), (std::vector<double>{2.5, 2.5}));
  EXPECT_EQ(g.label(0), "a");
  EXPECT_EQ(g.label(1), "b");
  EXPECT_DOUBLE_EQ(g.weight(0, 1), g.weight(1, 0));
}

TEST(LoadEdgeList, UnweightedIgnoresThirdColumn) {
  const Graph g = load_edge_list("a b 2.5", false);
  EXPECT_DOUBLE_EQ(g.total_edge_weight(), 1.0);
}

TEST(LoadEdgeList, Star) {
  const Graph g = load_edge_list("c x\nc y\nc z\n", false);
  EXPECT_EQ(degree_vector(g), (std::vector<double>{3, 1, 1, 1}));
}

TEST(LoadEdgeList, CommentsAndBlankLines) {
  const Graph g = load_edge_list("# header\n\n0 1 # trailing\n   \n1 2\n", false);
  EXPECT_EQ(g.edge_count(), 2u);
}

TEST(LoadEdgeList, Errors) {
  EXPECT_THROW(load_edge_list("0 1\n0 1", false), DomainError);
  EXPECT_THROW(load_edge_list("0 1\n1 0", false), DomainError);
  EXPECT_THROW(load_edge_list("0 0", false), DomainError);
  EXPECT_THROW(load_edge_list("0 1 0", true), DomainError);
  EXPECT_THROW(load_edge_list("0 1 -2", true), DomainError);
  try {
    load_edge_list("0 1\n2\n", false);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  try {
    load_edge_list("0 1\n\n1 2 abc\n", true);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(load_edge_list("0 1 2 3", true), ParseError);
}

TEST(LoadBranchTable, Weights) {
  EXPECT_DOUBLE_EQ(load_branch_table("0 1 3 4").weight(0, 1), 0.2);
  EXPECT_DOUBLE_EQ(load_branch_table("0 1 1 0").weight(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(load_branch_table("0 1 -3 4").weight(0, 1), 0.2);
  EXPECT_THROW(load_branch_table("0 1 0 0"), DomainError);
  EXPECT_THROW(load_branch_table("0 1 3"), ParseError);
}

TEST(LoadBranchTable, ParallelBranchKeepsFirst) {
  std::vector<std::string> warnings;
  const Graph g = load_branch_table("0 1 3 4\n1 0 1 0\n1 2 0 2\n", &warnings);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_DOUBLE_EQ(g.weight(0, 1), 0.2);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("line 2"), std::string::npos);
}

TEST(Graph, RejectsBadEdges) {
  EXPECT_THROW(Graph(2, {{0, 2, 1.0}}), DomainError);
  EXPECT_THROW(Graph(2, {{0, 0, 1.0}}), DomainError);
  EXPECT_THROW(Graph(2, {{0, 1, 0.0}}), DomainError);
  EXPECT_THROW(Graph(2, {{0, 1, NAN}}), DomainError);
  EXPECT_THROW(Graph(2, {{0, 1, 1.0}, {1, 0, 1.0}}), DomainError);
}

TEST(Graph, DegreeSumIsTwiceM) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    const Graph g = random_graph(30, 0.2, rng, true);
    const double s = std::accumulate(g.degrees().begin(), g.degrees().end(), 0.0);
    EXPECT_NEAR(s, 2 * g.total_edge_weight(), 1e-12 * s);
  }
}

TEST(Modularity, SingleGroupIsZero) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const Graph g = random_graph(12, 0.4, rng, t % 2 == 0);
    CommunityAssignment a{std::vector<std::size_t>(12, 0), 1};
    EXPECT_NEAR(modularity(g, a), 0.0, 1e-15);
  }
}

TEST(Modularity, TwoTrianglesSplit) {
  const Graph g = two_triangles();
  EXPECT_DOUBLE_EQ(modularity(g, {{0, 0, 0, 1, 1, 1}, 2}), 0.5);
  // 0.5 is the maximum over every 2-group labeling.
  double best = -1;
  for (unsigned mask = 0; mask < 64; ++mask) {
    CommunityAssignment a{std::vector<std::size_t>(6), 2};
    for (std::size_t i = 0; i < 6; ++i) a.labels[i] = (mask >> i) & 1u;
    best = std::max(best, modularity(g, a));
  }
  EXPECT_DOUBLE_EQ(best, 0.5);
}

TEST(Modularity, PathAllSingletons) {
  const Graph g = load_edge_list("0 1\n1 2", false);
  EXPECT_DOUBLE_EQ(modularity(g, {{0, 1, 2}, 3}), -0.375);
}

TEST(Modularity, KnownKarateSplit) {
  // Zachary's recorded faction split, unweighted; value from networkx.
  const Graph g = load_edge_list(
      "0 1\n0 2\n0 3\n0 4\n0 5\n0 6\n0 7\n0 8\n0 10\n0 11\n0 12\n0 13\n0 17\n0 19\n0 21\n0 31\n"
      "1 2\n1 3\n1 7\n1 13\n1 17\n1 19\n1 21\n1 30\n2 3\n2 7\n2 8\n2 9\n2 13\n2 27\n2 28\n2 32\n"
      "3 7\n3 12\n3 13\n4 6\n4 10\n5 6\n5 10\n5 16\n6 16\n8 30\n8 32\n8 33\n9 33\n13 33\n14 32\n"
      "14 33\n15 32\n15 33\n18 32\n18 33\n19 33\n20 32\n20 33\n22 32\n22 33\n23 25\n23 27\n"
      "23 29\n23 32\n23 33\n24 25\n24 27\n24 31\n25 31\n26 29\n26 33\n27 33\n28 31\n28 33\n"
      "29 32\n29 33\n30 32\n30 33\n31 32\n31 33\n32 33\n",
      false);
  ASSERT_EQ(g.node_count(), 34u);
  ASSERT_EQ(g.edge_count(), 78u);
  const std::set<std::string> officer{"0", "1", "2", "3", "4", "5", "6", "7", "8",
                                      "10", "11", "12", "13", "16", "17", "19", "21"};
  std::vector<std::size_t> club(34, 1);
  for (std::size_t i = 0; i < 34; ++i)
    if (officer.count(g.label(i))) club[i] = 0;
  EXPECT_NEAR(modularity(g, {club, 2}), 0.3582347140039448, 1e-12);
}

TEST(Modularity, PairwiseAgreesAndBounded) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const Graph g = random_graph(10, 0.35, rng, t % 2 == 1);
    const auto a = random_assignment(10, 1 + t % 4, rng);
    const double q = modularity(g, a);
    EXPECT_NEAR(q, modularity_pairwise(g, a), 1e-12);
    EXPECT_GE(q, -1.0);
    EXPECT_LE(q, 1.0);
  }
}

TEST(Modularity, PermutationInvariant) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const Graph g = random_graph(9, 0.4, rng, true);
    auto a = random_assignment(9, 3, rng);
    const std::vector<std::size_t> perm{2, 0, 1};
    auto b = a;
    for (auto& c : b.labels) c = perm[c];
    EXPECT_EQ(modularity(g, a), modularity(g, b));
  }
}

TEST(Modularity, WeightScalingInvariant) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; ++t) {
    const Graph g = random_graph(9, 0.4, rng, true);
    std::vector<Edge> scaled = g.edges();
    for (auto& e : scaled) e.w *= 7.3;
    const Graph h(g.node_count(), scaled);
    const auto a = random_assignment(9, 3, rng);
    EXPECT_NEAR(modularity(g, a), modularity(h, a), 1e-12);
  }
}

TEST(Modularity, MergingDisjointGroups) {
  // Cliques of sizes 3, 4 and 5 with no edges between them.
  std::vector<Edge> edges;
  std::size_t base = 0;
  for (std::size_t s : {3u, 4u, 5u}) {
    for (std::size_t u = 0; u < s; ++u)
      for (std::size_t v = u + 1; v < s; ++v) edges.push_back({base + u, base + v, 1.0});
    base += s;
  }
  const Graph g(12, edges);
  const CommunityAssignment split{{0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 2}, 3};
  const CommunityAssignment merged{{0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1}, 3};
  const double m = g.total_edge_weight();
  const double da = 4 * 3.0, db = 5 * 4.0;
  EXPECT_NEAR(modularity(g, merged) - modularity(g, split), -2 * da * db / (4 * m * m), 1e-12);
}

TEST(Modularity, Errors) {
  const Graph empty(3, {});
  EXPECT_THROW(modularity(empty, {{0, 0, 0}, 1}), DomainError);
  const Graph g = two_triangles();
  EXPECT_THROW(modularity(g, {{0, 0, 0}, 1}), DomainError);
  EXPECT_THROW(modularity(g, {{0, 0, 0, 1, 1, 2}, 2}), DomainError);
  EXPECT_THROW(modularity(g, {{0, 0, 0, 1, 1, 1}, 2}, {0.0}), DomainError);
}

TEST(Modularity, ResolutionParameter) {
  const Graph g = two_triangles();
  const CommunityAssignment one{std::vector<std::size_t>(6, 0), 1};
  // Q = 1 - gamma for a single group.
  EXPECT_NEAR(modularity(g, one, {0.5}), 0.5, 1e-15);
}

#include <gtest/gtest.h>

#include "qcomm/bench.hpp"
#include "qcomm/engine.hpp"

using namespace qcomm;

namespace {

Graph two_triangles() { return load_edge_list("0 1\n1 2\n2 0\n3 4\n4 5\n5 3\n", false); }

PartitionConfig quick(std::uint64_t seed = 42) {
  PartitionConfig c;
  c.solver.sweeps = 30;
  c.solver.steps_per_sweep = 300;
  c.solver.seed = seed;
  return c;
}

}  // namespace

TEST(BruteForce, TwoTriangles) {
  const auto r = brute_force_best(two_triangles(), 2);
  EXPECT_DOUBLE_EQ(r.modularity, 0.5);
  EXPECT_EQ(r.assignment.labels, (std::vector<std::size_t>{0, 0, 0, 1, 1, 1}));
  EXPECT_EQ(r.evaluated, 31u);  // Stirling S(6, 2)
}

TEST(BruteForce, PathThreeGroups) {
  const Graph g = load_edge_list("0 1\n1 2", false);
  const auto r = brute_force_best(g, 3);
  EXPECT_DOUBLE_EQ(r.modularity, -0.375);
  EXPECT_EQ(r.evaluated, 1u);
}

TEST(BruteForce, SingleGroupAndGuards) {
  EXPECT_EQ(brute_force_best(two_triangles(), 1).modularity, 0.0);
  EXPECT_THROW(brute_force_best(two_triangles(), 7), DomainError);
  EXPECT_THROW(brute_force_best(two_triangles(), 0), DomainError);
  const Graph big = random_connected_graph(24, 0.3, 1);
  try {
    brute_force_best(big, 2);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("exceeds"), std::string::npos);
  }
}

TEST(BruteForce, SurjectiveEnumerationCounts) {
  // Stirling numbers of the second kind.
  std::size_t count = 0;
  detail::for_each_surjective_labeling(7, 3, [&](const auto&) { ++count; });
  EXPECT_EQ(count, 301u);
  count = 0;
  detail::for_each_surjective_labeling(5, 5, [&](const auto&) { ++count; });
  EXPECT_EQ(count, 1u);
}

TEST(Repair, AlreadyFeasibleUnchanged) {
  const Graph g = two_triangles();
  const CommunityAssignment a{{0, 0, 0, 1, 1, 1}, 2};
  EXPECT_EQ(repair(g, a, 2), a);
}

TEST(Repair, TwoTrianglesAllInOneGroup) {
  const Graph g = two_triangles();
  const CommunityAssignment all{{0, 0, 0, 0, 0, 0}, 2};
  const CommunityAssignment r = repair(g, all, 2);
  // Enumerate the six single-node moves: the repair must pick the best,
  // lowest index on ties.
  double best = -2;
  std::size_t best_node = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    CommunityAssignment moved = all;
    moved.labels[i] = 1;
    const double q = modularity(g, moved);
    if (q > best) {
      best = q;
      best_node = i;
    }
  }
  CommunityAssignment expect = all;
  expect.labels[best_node] = 1;
  EXPECT_EQ(r, expect);
  EXPECT_DOUBLE_EQ(modularity(g, r), best);
}

TEST(Repair, NEqualsKSingleLegalMove) {
  const Graph g = load_edge_list("0 1\n1 2", false);
  const CommunityAssignment r = repair(g, {{0, 0, 1}, 3}, 3);
  EXPECT_EQ(r.empty_groups(), 0u);
  EXPECT_EQ(r.labels[2], 1u);
  EXPECT_THROW(repair(g, {{0, 0, 1}, 4}, 4), DomainError);
}

TEST(Partition, TwoTriangles) {
  const PartitionResult r = partition(two_triangles(), 2, quick());
  EXPECT_DOUBLE_EQ(r.modularity, 0.5);
  EXPECT_TRUE(r.feasible);
  EXPECT_EQ(r.repaired_rows, 0u);
  EXPECT_EQ(r.empty_groups, 0u);
  EXPECT_NEAR(-r.best_energy, r.modularity, 1e-12);
  EXPECT_EQ(r.variables, 12u);
}

TEST(Partition, SingleGroup) {
  const PartitionResult r = partition(two_triangles(), 1, quick());
  EXPECT_EQ(r.modularity, 0.0);
  EXPECT_TRUE(r.feasible);
}

TEST(Partition, Guards) {
  EXPECT_THROW(partition(two_triangles(), 7, quick()), DomainError);
  EXPECT_THROW(partition(two_triangles(), 0, quick()), DomainError);
}

TEST(Partition, ReportedQIsRecomputed) {
  const Graph g = random_connected_graph(12, 0.4, 5);
  for (auto mode : {ConstraintMode::native_inequality, ConstraintMode::slack_qubo}) {
    PartitionConfig c = quick();
    c.model.mode = mode;
    const PartitionResult r = partition(g, 3, c);
    EXPECT_TRUE(r.feasible);
    EXPECT_NEAR(r.modularity, modularity(g, r.assignment), 1e-12);
  }
}

TEST(Partition, HonestWithoutRepair) {
  // No penalties and a single sweep: rows are whatever the walk left behind.
  PartitionConfig c = quick();
  c.model.lambda1 = 0.0;
  c.model.lambda2 = 0.0;
  c.solver.sweeps = 1;
  c.solver.steps_per_sweep = 1;
  c.repair = false;
  const PartitionResult r = partition(two_triangles(), 6, c);
  EXPECT_FALSE(r.feasible);
  EXPECT_GT(r.repaired_rows + r.empty_groups, 0u);
  EXPECT_NEAR(r.modularity, modularity(two_triangles(), r.assignment), 1e-12);
}

TEST(Partition, PenaltyScaledTemperaturesRecorded) {
  const PartitionResult r = partition(two_triangles(), 2, quick());
  EXPECT_DOUBLE_EQ(r.schedule.t_initial, kInitialTemperatureScale * r.lambda_used.lambda1);
  EXPECT_DOUBLE_EQ(r.schedule.t_final, kFinalTemperatureScale * r.lambda_used.lambda1);
}

TEST(SweepK, TwoTrianglesAgainstOracle) {
  const Graph g = two_triangles();
  const SweepReport rep = sweep_k(g, 1, 3, quick(100));
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_EQ(rep.rows[0].result->modularity, 0.0);
  EXPECT_DOUBLE_EQ(rep.rows[1].result->modularity, 0.5);
  EXPECT_NEAR(rep.rows[2].result->modularity, brute_force_best(g, 3).modularity, 1e-12);
  for (const auto& row : rep.rows) EXPECT_EQ(row.seed, 100 + row.K);
}

TEST(SweepK, EmptyRangeAndErrorsInRows) {
  const Graph g = two_triangles();
  EXPECT_TRUE(sweep_k(g, 3, 2, quick()).rows.empty());
  const SweepReport rep = sweep_k(g, 6, 7, quick());
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_TRUE(rep.rows[0].result);
  EXPECT_FALSE(rep.rows[1].result);
  EXPECT_FALSE(rep.rows[1].error.empty());
}

TEST(SweepK, SeedLineageReproducesRows) {
  const Graph g = random_connected_graph(14, 0.3, 9);
  const PartitionConfig cfg = quick(7);
  const SweepReport rep = sweep_k(g, 2, 5, cfg, 2);
  for (const auto& row : rep.rows) {
    PartitionConfig again = cfg;
    again.solver.seed = row.seed;
    const PartitionResult r = partition(g, row.K, again);
    EXPECT_EQ(r.modularity, row.result->modularity);
    EXPECT_EQ(r.assignment, row.result->assignment);
  }
}

TEST(TimeStudy, Guards) {
  const Graph g = two_triangles();
  EXPECT_THROW(time_study(g, 2, {}, quick()), DomainError);
  EXPECT_THROW(time_study(g, 2, {1.0, 0.0}, quick()), DomainError);
}

TEST(TimeStudy, RowsPerBudget) {
  PartitionConfig c;
  c.solver.seed = 4;
  const auto rows = time_study(two_triangles(), 2, {0.2, 0.4}, c);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_DOUBLE_EQ(r.modularity, 0.5);
    EXPECT_GE(r.solve_time, r.time_limit_sec);
    EXPECT_EQ(r.seed, 4u);
  }
}

TEST(OracleInstances, ShapeAndDeterminism) {
  const auto a = oracle_instances();
  const auto b = oracle_instances();
  ASSERT_EQ(a.size(), 20u);
  for (std::size_t t = 0; t < a.size(); ++t) {
    EXPECT_GE(a[t].graph.node_count(), 5u);
    EXPECT_LE(a[t].graph.node_count(), 8u);
    EXPECT_TRUE(a[t].K == 2 || a[t].K == 3);
    EXPECT_EQ(a[t].graph.edges().size(), b[t].graph.edges().size());
  }
}

TEST(Partition, RestartsOption) {
  PartitionConfig c = quick();
  c.restarts = 0;
  EXPECT_THROW(partition(two_triangles(), 2, c), DomainError);
  c.restarts = 3;
  const PartitionResult r = partition(two_triangles(), 2, c);
  EXPECT_EQ(r.sweeps, 90u);
  EXPECT_EQ(r.seed, 42u);
}

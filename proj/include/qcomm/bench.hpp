#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qcomm/datasets.hpp"
#include "qcomm/engine.hpp"
#include "qcomm/rng.hpp"

namespace qcomm {

struct Table1Case {
  std::string dataset;
  bool weighted;
  std::size_t K;
  double q_reference;
};

inline const std::vector<Table1Case>& table1_cases() {
  static const std::vector<Table1Case> cases = {
      {"karate", true, 4, 0.4449},   {"karate", false, 4, 0.4198},
      {"lesmis", true, 6, 0.5667},   {"lesmis", false, 6, 0.5600},
      {"football", false, 10, 0.6046}, {"dolphin", false, 5, 0.5285},
  };
  return cases;
}

inline constexpr double kTable1Tolerance = 5e-5;

struct BenchRun {
  std::uint64_t seed = 0;
  double q = 0.0;
  bool feasible = false;
  double solve_time = 0.0;
  double sweep_sec = 0.0;
};

struct BenchRow {
  std::string graph;
  std::string variant;  // "w" or "u"
  std::size_t K = 0;
  double q_reference = 0.0;
  std::optional<double> q_best;  // nullopt when the dataset is missing
  bool pass = false;
  std::string note;
  std::vector<BenchRun> runs;
};

/// Best of `runs` partitions with seeds base, base + 1, ...
inline BenchRow run_table1_case(const Table1Case& c, const PartitionConfig& config,
                                std::size_t runs = 3) {
  BenchRow row{c.dataset, c.weighted ? "w" : "u", c.K, c.q_reference, std::nullopt, false, {}, {}};
  const DatasetEntry* e = find_dataset(c.dataset);
  if (!e || !dataset_present(*e)) {
    row.note = "dataset missing";
    return row;
  }
  const Graph g = load_dataset(*e, c.weighted);
  for (std::size_t r = 0; r < runs; ++r) {
    PartitionConfig cfg = config;
    cfg.solver.seed = config.solver.seed + r;
    const PartitionResult res = partition(g, c.K, cfg);
    row.runs.push_back({cfg.solver.seed, res.modularity, res.feasible, res.solve_time,
                        res.max_sweep_sec});
    if (res.feasible && (!row.q_best || res.modularity > *row.q_best)) row.q_best = res.modularity;
  }
  row.pass = row.q_best && *row.q_best >= c.q_reference - kTable1Tolerance;
  if (!row.q_best) row.note = "no feasible run";
  return row;
}

/// Erdos-Renyi G(n, p) redrawn until connected; deterministic in `seed`.
inline Graph random_connected_graph(std::size_t n, double p, std::uint64_t seed) {
  const CounterRng rng(seed);
  for (std::uint64_t attempt = 0;; ++attempt) {
    std::vector<Edge> edges;
    std::uint64_t counter = 0;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v)
        if (rng.uniform(attempt, counter++) < p) edges.push_back({u, v, 1.0});
    std::vector<std::size_t> parent(n);
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    std::size_t components = n;
    for (const Edge& e : edges) {
      const std::size_t a = find(e.u), b = find(e.v);
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
    if (components == 1) return Graph(n, std::move(edges));
  }
}

struct OracleInstance {
  Graph graph;
  std::size_t K;
  std::uint64_t seed;
};

/// n in [5, 8], edge probability 0.5, K in {2, 3}.
inline std::vector<OracleInstance> oracle_instances(std::size_t count = 20,
                                                    std::uint64_t seed = 2024) {
  const CounterRng rng(seed);
  std::vector<OracleInstance> out;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t n = 5 + rng.below(4, 0, 2 * t);
    const std::size_t K = 2 + rng.below(2, 0, 2 * t + 1);
    const std::uint64_t gseed = rng.bits(1, t);
    out.push_back({random_connected_graph(n, 0.5, gseed), K, gseed});
  }
  return out;
}

struct OracleRow {
  std::size_t n = 0;
  std::size_t edges = 0;
  std::size_t K = 0;
  double q_solver = 0.0;
  double q_oracle = 0.0;
  bool feasible = false;
  bool match = false;
};

inline OracleRow run_oracle_instance(const OracleInstance& inst, const PartitionConfig& config) {
  const PartitionResult r = partition(inst.graph, inst.K, config);
  const BruteForceResult bf = brute_force_best(inst.graph, inst.K);
  OracleRow row{inst.graph.node_count(), inst.graph.edge_count(), inst.K, r.modularity,
                bf.modularity, r.feasible, false};
  row.match = r.feasible && std::abs(r.modularity - bf.modularity) <= 1e-10;
  return row;
}

}  // namespace qcomm

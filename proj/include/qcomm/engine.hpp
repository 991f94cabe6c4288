#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qcomm/annealer.hpp"
#include "qcomm/errors.hpp"
#include "qcomm/graph.hpp"
#include "qcomm/model.hpp"

namespace qcomm {

inline constexpr double kInitialTemperatureScale = 0.3;
inline constexpr double kFinalTemperatureScale = 0.003;

struct PartitionConfig {
  ModelOptions model;
  SolverConfig solver;
  bool repair = true;
  /// Unset temperatures become 0.3 lambda1 and 0.003 lambda1 instead of
  /// being sampled by auto_tune.
  bool penalty_scaled_temperatures = true;
  /// Independent anneal cycles sharing the time budget equally (each gets the
  /// full sweep count in sweep mode). Cycle 0 uses the configured seed; the
  /// best feasible decoded result is kept.
  std::size_t restarts = 5;
};

inline std::uint64_t restart_seed(std::uint64_t seed, std::size_t cycle) {
  return cycle == 0 ? seed : CounterRng::mix(seed ^ (0x9e3779b97f4a7c15ULL * cycle));
}

struct PartitionResult {
  CommunityAssignment assignment;
  double modularity = 0.0;
  bool feasible = false;
  std::size_t repaired_rows = 0;  // rows of the best state that were not one-hot
  std::size_t empty_groups = 0;   // empty groups after row decoding, before repair
  double solve_time = 0.0;
  double time_limit_sec = 0.0;
  double best_energy = 0.0;
  PenaltyWeights lambda_used;
  std::uint64_t seed = 0;
  ConstraintMode mode = ConstraintMode::native_inequality;
  std::size_t variables = 0;
  std::size_t sweeps = 0;
  double max_sweep_sec = 0.0;
  bool factored = false;
  Schedule schedule;
};

/// Fills empty groups one at a time (ascending group index). Each fill moves
/// the node whose relocation gives the highest modularity, drawn only from
/// groups with at least two members; ties go to the lowest node index.
inline CommunityAssignment repair(const Graph& g, CommunityAssignment a, std::size_t K,
                                  const ModularityParams& p = {}) {
  if (K > g.node_count())
    throw DomainError("cannot fill " + std::to_string(K) + " groups with " +
                      std::to_string(g.node_count()) + " nodes");
  if (a.group_count != K) throw DimensionError("assignment group count differs from K");
  a.validate(g.node_count());
  auto sizes = a.group_sizes();
  for (std::size_t target = 0; target < K; ++target) {
    if (sizes[target] != 0) continue;
    std::optional<std::size_t> best_node;
    double best_q = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      const std::size_t from = a.labels[i];
      if (sizes[from] < 2) continue;
      a.labels[i] = target;
      const double q = modularity(g, a, p);
      a.labels[i] = from;
      if (!best_node || q > best_q) {
        best_node = i;
        best_q = q;
      }
    }
    // K <= n guarantees some group still has two members.
    --sizes[a.labels[*best_node]];
    a.labels[*best_node] = target;
    ++sizes[target];
  }
  return a;
}

inline bool is_feasible(const CommunityAssignment& a, std::size_t node_count) {
  return a.labels.size() == node_count && a.empty_groups() == 0;
}

inline PartitionResult partition(const Graph& g, std::size_t K, const PartitionConfig& config) {
  if (K < 1) throw DomainError("group count must be at least 1");
  if (K > g.node_count())
    throw DomainError("K = " + std::to_string(K) + " exceeds node count " +
                      std::to_string(g.node_count()));
  BuiltModel built = build_partition_model(g, K, config.model);
  SolverConfig solver = config.solver;
  if (config.penalty_scaled_temperatures && built.weights.lambda1 > 0.0) {
    if (!solver.t_initial) solver.t_initial = kInitialTemperatureScale * built.weights.lambda1;
    if (!solver.t_final)
      solver.t_final = std::min(*solver.t_initial, kFinalTemperatureScale * built.weights.lambda1);
  }
  if (config.restarts == 0) throw DomainError("restarts must be at least 1");

  const VariableLayout& layout = built.model.layout();
  auto finish = [&](const SolveResult& solved, std::uint64_t seed) {
    PartitionResult r;
    r.best_energy = solved.best_energy;
    r.schedule = solved.schedule;
    r.seed = seed;
    DecodeResult decoded = decode(solved.best_bits, layout, /*repair=*/true);
    r.repaired_rows = decoded.repaired_rows;
    r.empty_groups = decoded.assignment.empty_groups();
    r.assignment = std::move(decoded.assignment);
    if (config.repair && r.empty_groups > 0)
      r.assignment = repair(g, std::move(r.assignment), K, config.model.modularity);
    r.feasible = is_feasible(r.assignment, g.node_count()) &&
                 (config.repair || r.repaired_rows == 0);
    r.modularity = modularity(g, r.assignment, config.model.modularity);
    return r;
  };

  using clock = std::chrono::steady_clock;
  const auto started = clock::now();
  PartitionResult out;
  std::size_t sweeps = 0;
  double max_sweep = 0.0;
  for (std::size_t cycle = 0; cycle < config.restarts; ++cycle) {
    SolverConfig cs = solver;
    cs.seed = restart_seed(config.solver.seed, cycle);
    if (!cs.sweeps) {
      const double used = std::chrono::duration<double>(clock::now() - started).count();
      const double left = config.solver.time_limit_sec - used;
      if (cycle > 0 && left <= 0.0) break;
      cs.time_limit_sec = std::max(left, 1e-3) / static_cast<double>(config.restarts - cycle);
    }
    const SolveResult solved = anneal(built.model, cs);
    sweeps += solved.sweeps;
    max_sweep = std::max(max_sweep, solved.max_sweep_sec);
    PartitionResult r = finish(solved, cs.seed);
    const bool better = cycle == 0 || (r.feasible && !out.feasible) ||
                        (r.feasible == out.feasible && r.modularity > out.modularity);
    if (better) out = std::move(r);
  }

  out.lambda_used = built.weights;
  out.seed = config.solver.seed;
  out.mode = config.model.mode;
  out.variables = built.model.dimension();
  out.solve_time = std::chrono::duration<double>(clock::now() - started).count();
  out.time_limit_sec = config.solver.time_limit_sec;
  out.sweeps = sweeps;
  out.max_sweep_sec = max_sweep;
  out.factored = built.factored;
  return out;
}

namespace detail {
// Restricted-growth strings with exactly K blocks, visited in lexicographic order.
template <class Visit>
void for_each_surjective_labeling(std::size_t n, std::size_t K, Visit&& visit) {
  std::vector<std::size_t> label(n, 0);
  auto rec = [&](auto&& self, std::size_t i, std::size_t used) -> void {
    if (n - i < K - used) return;
    if (i == n) {
      if (used == K) visit(label);
      return;
    }
    const std::size_t limit = std::min(used + 1, K);
    for (std::size_t c = 0; c < limit; ++c) {
      label[i] = c;
      self(self, i + 1, std::max(used, c + 1));
    }
  };
  if (n == 0) return;
  label[0] = 0;
  rec(rec, 1, 1);
}
}  // namespace detail

struct BruteForceResult {
  CommunityAssignment assignment;
  double modularity = 0.0;
  std::size_t evaluated = 0;
};

inline constexpr double kBruteForceLimit = 1e7;

/// Exact maximum over assignments with every group non-empty. Refuses when
/// K^n exceeds 1e7. Ties resolve to the lexicographically smallest canonical
/// labeling (first use of each group in ascending order).
inline BruteForceResult brute_force_best(const Graph& g, std::size_t K,
                                         const ModularityParams& p = {}) {
  const std::size_t n = g.node_count();
  if (K < 1) throw DomainError("group count must be at least 1");
  if (K > n) throw DomainError("K exceeds node count");
  const double size = std::pow(static_cast<double>(K), static_cast<double>(n));
  if (size > kBruteForceLimit)
    throw DomainError("brute force refused: K^n = " + std::to_string(size) + " exceeds " +
                      std::to_string(kBruteForceLimit));
  BruteForceResult best;
  best.assignment.group_count = K;
  if (K == 1) {
    best.assignment.labels.assign(n, 0);
    best.modularity = 0.0;
    best.evaluated = 1;
    return best;
  }
  bool have = false;
  CommunityAssignment probe{std::vector<std::size_t>(n, 0), K};
  detail::for_each_surjective_labeling(n, K, [&](const std::vector<std::size_t>& labels) {
    probe.labels = labels;
    const double q = modularity(g, probe, p);
    ++best.evaluated;
    if (!have || q > best.modularity + 1e-12) {
      have = true;
      best.modularity = q;
      best.assignment.labels = labels;
    }
  });
  return best;
}

struct SweepRow {
  std::size_t K = 0;
  std::uint64_t seed = 0;
  std::optional<PartitionResult> result;
  std::string error;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::string seed_policy = "seed = base_seed + K";
};

/// One partition() per K in [k_min, k_max] with seed base + K. Per-K failures
/// land in the row's error field. Rows can run on `parallel_rows` threads;
/// each owns its solver state.
inline SweepReport sweep_k(const Graph& g, std::size_t k_min, std::size_t k_max,
                           const PartitionConfig& config, std::size_t parallel_rows = 1) {
  SweepReport report;
  if (k_min > k_max) return report;
  for (std::size_t K = k_min; K <= k_max; ++K)
    report.rows.push_back({K, config.solver.seed + K, std::nullopt, {}});
  auto run_row = [&](SweepRow& row) {
    PartitionConfig cfg = config;
    cfg.solver.seed = row.seed;
    try {
      row.result = partition(g, row.K, cfg);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  };
  if (parallel_rows <= 1) {
    for (auto& row : report.rows) run_row(row);
    return report;
  }
  for (std::size_t begin = 0; begin < report.rows.size(); begin += parallel_rows) {
    std::vector<std::future<void>> jobs;
    const std::size_t end = std::min(report.rows.size(), begin + parallel_rows);
    for (std::size_t r = begin; r < end; ++r)
      jobs.push_back(std::async(std::launch::async, run_row, std::ref(report.rows[r])));
    for (auto& j : jobs) j.get();
  }
  return report;
}

struct TimeStudyRow {
  double time_limit_sec = 0.0;
  double solve_time = 0.0;
  double modularity = 0.0;
  bool feasible = false;
  std::uint64_t seed = 0;
};

/// Independent runs per budget, all with config.solver.seed.
inline std::vector<TimeStudyRow> time_study(const Graph& g, std::size_t K,
                                            const std::vector<double>& budgets,
                                            const PartitionConfig& config) {
  if (budgets.empty()) throw DomainError("at least one budget is required");
  for (double b : budgets)
    if (!(b > 0.0)) throw DomainError("budgets must be positive");
  std::vector<TimeStudyRow> rows;
  for (double b : budgets) {
    PartitionConfig cfg = config;
    cfg.solver.time_limit_sec = b;
    const PartitionResult r = partition(g, K, cfg);
    rows.push_back({b, r.solve_time, r.modularity, r.feasible, cfg.solver.seed});
  }
  return rows;
}

}  // namespace qcomm

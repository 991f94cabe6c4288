#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qcomm/errors.hpp"
#include "qcomm/graph.hpp"
#include "qcomm/qubo.hpp"

namespace qcomm {

/// How the non-empty-group constraint is represented.
enum class ConstraintMode {
  native_inequality,  // penalty max(0, 1 - s_k)^2 evaluated from occupancy counters
  slack_qubo,         // one-hot slack bits per group, fully quadratic
};

inline std::string to_string(ConstraintMode m) {
  return m == ConstraintMode::slack_qubo ? "slack" : "inequality";
}

/// Flat indexing of node-group bits x_ik and (slack mode) slack bits y_kd.
struct VariableLayout {
  std::size_t n = 0;
  std::size_t K = 0;
  ConstraintMode mode = ConstraintMode::native_inequality;

  VariableLayout() = default;
  VariableLayout(std::size_t nodes, std::size_t groups, ConstraintMode m)
      : n(nodes), K(groups), mode(m) {
    if (groups < 1) throw DomainError("group count must be at least 1");
  }

  std::size_t node_block() const noexcept { return n * K; }
  std::size_t dimension() const noexcept {
    return mode == ConstraintMode::slack_qubo ? n * K + K * n : n * K;
  }
  std::size_t index(std::size_t node, std::size_t group) const noexcept {
    return node * K + group;
  }
  /// Bit meaning "group `group` holds exactly level + 1 nodes".
  std::size_t slack_index(std::size_t group, std::size_t level) const noexcept {
    return n * K + group * n + level;
  }
  bool is_node_variable(std::size_t a) const noexcept { return a < n * K; }
  std::size_t node_of(std::size_t a) const noexcept { return a / K; }
  std::size_t group_of(std::size_t a) const noexcept { return a % K; }
};

struct PenaltyWeights {
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  void validate() const {
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !std::isfinite(lambda1) ||
        !std::isfinite(lambda2))
      throw DomainError("penalty weights must be finite and non-negative");
  }
};

/// max over i, j (diagonal included) of |A_ij - gamma k_i k_j / 2m| / 2m.
inline double max_abs_modularity_entry(const Graph& g, const ModularityParams& p = {}) {
  const double m = g.total_edge_weight();
  if (!(m > 0.0)) throw DomainError("graph has no edges");
  const std::size_t n = g.node_count();
  std::vector<double> row(n, 0.0);
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (const Neighbor& nb : g.neighbors(i)) row[nb.node] = nb.weight;
    for (std::size_t j = 0; j < n; ++j)
      best = std::max(best, std::abs(row[j] - p.gamma * g.degree(i) * g.degree(j) / (2.0 * m)));
    for (const Neighbor& nb : g.neighbors(i)) row[nb.node] = 0.0;
  }
  return best / (2.0 * m);
}

/// Conservative multipliers lambda1 = lambda2 = 2 n max|B_ij|. Every
/// constraint violation then costs more than any objective gain, but the
/// landscape is too steep to anneal well in short budgets.
inline PenaltyWeights bound_penalty_weights(const Graph& g, const ModularityParams& p = {}) {
  const double lam = 2.0 * max_abs_modularity_entry(g, p) * static_cast<double>(g.node_count());
  return {lam, lam};
}

inline constexpr double kPenaltyScale = 0.5;

/// Default multipliers: lambda1 = lambda2 = 0.5 sqrt(mean k_i^2) / m, the
/// size of a typical single-node objective change.
inline PenaltyWeights default_penalty_weights(const Graph& g, const ModularityParams& p = {}) {
  p.validate();
  const double m = g.total_edge_weight();
  if (!(m > 0.0)) throw DomainError("graph has no edges");
  double sum_sq = 0.0;
  for (double k : g.degrees()) sum_sq += k * k;
  const double lam =
      kPenaltyScale * std::sqrt(sum_sq / static_cast<double>(g.node_count())) / m;
  return {lam, lam};
}

namespace detail {
inline void check_objective_inputs(const Graph& g, const ModularityParams& p,
                                   const VariableLayout& layout) {
  p.validate();
  if (layout.K < 1) throw DomainError("group count must be at least 1");
  if (layout.n != g.node_count()) throw DimensionError("layout node count does not match graph");
  if (!(g.total_edge_weight() > 0.0)) throw DomainError("graph has no edges");
}
}  // namespace detail

/// -Q as an explicit quadratic form: x_ik x_jk carries -2 B_ij (i < j) and
/// x_ik carries -B_ii. Dense per group; use the factored form for large n.
inline QuboMatrix build_modularity_objective(const Graph& g, std::size_t K,
                                             const ModularityParams& p,
                                             const VariableLayout& layout) {
  if (K < 1) throw DomainError("group count must be at least 1");
  detail::check_objective_inputs(g, p, layout);
  const std::size_t n = g.node_count();
  const double two_m = 2.0 * g.total_edge_weight();
  QuboBuilder qb(layout.dimension());
  std::vector<double> row(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const Neighbor& nb : g.neighbors(i)) row[nb.node] = nb.weight;
    for (std::size_t j = i; j < n; ++j) {
      const double b = (row[j] - p.gamma * g.degree(i) * g.degree(j) / two_m) / two_m;
      if (b == 0.0) continue;
      const double coef = (i == j) ? -b : -2.0 * b;
      for (std::size_t k = 0; k < K; ++k) qb.add(layout.index(i, k), layout.index(j, k), coef);
    }
    for (const Neighbor& nb : g.neighbors(i)) row[nb.node] = 0.0;
  }
  return qb.build();
}

/// Per-group rank-one energy sum_k coef * (sum_i weight_i x_ik)^2.
struct RankOneGroups {
  double coef = 0.0;
  std::vector<double> node_weights;
  std::size_t K = 0;

  double energy(std::span<const std::uint8_t> bits) const {
    const std::size_t n = node_weights.size();
    double e = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (bits[i * K + k]) d += node_weights[i];
      e += coef * d * d;
    }
    return e;
  }
};

/// -Q split into a sparse adjacency part and the implicit degree part, so the
/// dense k_i k_j block is never materialized.
struct FactoredObjective {
  QuboMatrix adjacency_part;
  RankOneGroups degree_part;

  double energy(std::span<const std::uint8_t> bits) const {
    return adjacency_part.energy(bits) + degree_part.energy(bits);
  }
};

inline FactoredObjective build_factored_objective(const Graph& g, std::size_t K,
                                                  const ModularityParams& p,
                                                  const VariableLayout& layout) {
  if (K < 1) throw DomainError("group count must be at least 1");
  detail::check_objective_inputs(g, p, layout);
  const double m = g.total_edge_weight();
  QuboBuilder qb(layout.dimension());
  for (const Edge& e : g.edges())
    for (std::size_t k = 0; k < K; ++k)
      qb.add(layout.index(e.u, k), layout.index(e.v, k), -e.w / m);
  FactoredObjective out{qb.build(), {}};
  out.degree_part.coef = p.gamma / (4.0 * m * m);
  out.degree_part.node_weights = g.degrees();
  out.degree_part.K = K;
  return out;
}

/// C1 = sum_i (sum_k x_ik - 1)^2.
inline QuboMatrix build_assignment_constraint(const VariableLayout& layout) {
  QuboBuilder qb(layout.dimension());
  std::vector<std::pair<std::size_t, double>> row(layout.K);
  for (std::size_t i = 0; i < layout.n; ++i) {
    for (std::size_t k = 0; k < layout.K; ++k) row[k] = {layout.index(i, k), 1.0};
    qb.add_squared_linear(row, -1.0);
  }
  return qb.build();
}

/// sum_k max(0, 1 - sum_i x_ik)^2 over the node block, tracked with occupancy counters.
struct InequalityPenalty {
  std::size_t n = 0;
  std::size_t K = 0;

  static double level(std::size_t occupancy) noexcept { return occupancy == 0 ? 1.0 : 0.0; }

  std::vector<std::size_t> occupancy(std::span<const std::uint8_t> bits) const {
    std::vector<std::size_t> s(K, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < K; ++k)
        if (bits[i * K + k]) ++s[k];
    return s;
  }

  double energy(std::span<const std::uint8_t> bits) const {
    double e = 0.0;
    for (std::size_t s : occupancy(bits)) e += level(s);
    return e;
  }

  /// Change of the penalty when a bit of a group at occupancy `s` turns on (+1) or off (-1).
  static double delta(std::size_t s, int direction) noexcept {
    if (direction > 0) return s == 0 ? -1.0 : 0.0;
    return s == 1 ? 1.0 : 0.0;
  }
};

using NonemptyConstraint = std::variant<QuboMatrix, InequalityPenalty>;

/// Slack mode: sum_k (sum_i x_ik - sum_d d y_kd - 1)^2 + sum_k (sum_d y_kd - 1)^2.
/// Native mode: the occupancy-counter penalty.
inline NonemptyConstraint build_nonempty_constraint(const VariableLayout& layout) {
  if (layout.mode == ConstraintMode::native_inequality)
    return InequalityPenalty{layout.n, layout.K};
  QuboBuilder qb(layout.dimension());
  std::vector<std::pair<std::size_t, double>> lin;
  for (std::size_t k = 0; k < layout.K; ++k) {
    lin.clear();
    for (std::size_t i = 0; i < layout.n; ++i) lin.emplace_back(layout.index(i, k), 1.0);
    for (std::size_t d = 1; d < layout.n; ++d)
      lin.emplace_back(layout.slack_index(k, d), -static_cast<double>(d));
    qb.add_squared_linear(lin, -1.0);
    lin.clear();
    for (std::size_t d = 0; d < layout.n; ++d) lin.emplace_back(layout.slack_index(k, d), 1.0);
    qb.add_squared_linear(lin, -1.0);
  }
  return qb.build();
}

struct ModelTerm {
  std::size_t other;
  double coef;
};

/// Assembled Hamiltonian H = M + lambda1 C1 + lambda2 C2: an explicit quadratic
/// part, an optional implicit degree part and an optional inequality penalty.
/// Precomputes a symmetric adjacency so single-flip deltas cost O(1).
class HybridModel {
public:
  HybridModel() = default;
  HybridModel(VariableLayout layout, QuboMatrix quadratic, std::optional<RankOneGroups> rank_one,
              std::optional<InequalityPenalty> inequality, double inequality_weight)
      : layout_(layout),
        quadratic_(std::move(quadratic)),
        rank_one_(std::move(rank_one)),
        inequality_(inequality),
        inequality_weight_(inequality_weight) {
    const std::size_t N = quadratic_.dimension();
    diag_.assign(N, 0.0);
    std::vector<std::size_t> counts(N + 1, 0);
    for (const QuboTerm& t : quadratic_.terms()) {
      if (t.a == t.b) {
        diag_[t.a] += t.coef;
      } else {
        ++counts[t.a + 1];
        ++counts[t.b + 1];
      }
    }
    for (std::size_t a = 0; a < N; ++a) counts[a + 1] += counts[a];
    offsets_ = counts;
    adjacency_.resize(offsets_.back());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const QuboTerm& t : quadratic_.terms()) {
      if (t.a == t.b) continue;
      adjacency_[fill[t.a]++] = {t.b, t.coef};
      adjacency_[fill[t.b]++] = {t.a, t.coef};
    }
  }

  const VariableLayout& layout() const noexcept { return layout_; }
  std::size_t dimension() const noexcept { return quadratic_.dimension(); }
  const QuboMatrix& quadratic() const noexcept { return quadratic_; }
  const std::optional<RankOneGroups>& rank_one() const noexcept { return rank_one_; }
  const std::optional<InequalityPenalty>& inequality() const noexcept { return inequality_; }
  double inequality_weight() const noexcept { return inequality_weight_; }
  bool is_pure_qubo() const noexcept { return !rank_one_ && !inequality_; }

  double diagonal(std::size_t a) const noexcept { return diag_[a]; }
  std::span<const ModelTerm> couplings(std::size_t a) const noexcept {
    return {adjacency_.data() + offsets_[a], offsets_[a + 1] - offsets_[a]};
  }

  double energy(std::span<const std::uint8_t> bits) const {
    double e = quadratic_.energy(bits);
    if (rank_one_) e += rank_one_->energy(bits);
    if (inequality_) e += inequality_weight_ * inequality_->energy(bits);
    return e;
  }

private:
  VariableLayout layout_;
  QuboMatrix quadratic_;
  std::optional<RankOneGroups> rank_one_;
  std::optional<InequalityPenalty> inequality_;
  double inequality_weight_ = 0.0;
  std::vector<double> diag_;
  std::vector<std::size_t> offsets_{0};
  std::vector<ModelTerm> adjacency_;
};

using ModularityObjective = std::variant<QuboMatrix, FactoredObjective>;

inline HybridModel assemble(const VariableLayout& layout, const ModularityObjective& objective,
                            const QuboMatrix& c1, const NonemptyConstraint& c2,
                            const PenaltyWeights& w) {
  w.validate();
  const QuboMatrix& obj_quadratic = std::holds_alternative<QuboMatrix>(objective)
                                        ? std::get<QuboMatrix>(objective)
                                        : std::get<FactoredObjective>(objective).adjacency_part;
  const std::size_t N = layout.dimension();
  if (obj_quadratic.dimension() != N || c1.dimension() != N)
    throw DimensionError("objective and constraint dimensions differ from the layout");
  QuboBuilder qb(N);
  qb.add_scaled(obj_quadratic, 1.0);
  if (w.lambda1 != 0.0) qb.add_scaled(c1, w.lambda1);
  std::optional<InequalityPenalty> ineq;
  if (const auto* q2 = std::get_if<QuboMatrix>(&c2)) {
    if (q2->dimension() != N) throw DimensionError("C2 dimension differs from the layout");
    if (w.lambda2 != 0.0) qb.add_scaled(*q2, w.lambda2);
  } else {
    const auto& pen = std::get<InequalityPenalty>(c2);
    if (pen.n != layout.n || pen.K != layout.K)
      throw DimensionError("inequality penalty does not match the layout");
    ineq = pen;
  }
  std::optional<RankOneGroups> rank_one;
  if (const auto* f = std::get_if<FactoredObjective>(&objective)) rank_one = f->degree_part;
  return HybridModel(layout, qb.build(), std::move(rank_one), ineq, w.lambda2);
}

struct ModelOptions {
  ConstraintMode mode = ConstraintMode::native_inequality;
  ModularityParams modularity;
  std::optional<double> lambda1;  // nullopt: default_penalty_weights
  std::optional<double> lambda2;
  /// Materialize dense per-group blocks only while K n (n + 1) / 2 stays below this.
  std::size_t dense_term_threshold = 200'000;
};

struct BuiltModel {
  HybridModel model;
  PenaltyWeights weights;
  bool factored = false;
};

/// Graph to assembled Hamiltonian with penalty defaults resolved.
inline BuiltModel build_partition_model(const Graph& g, std::size_t K, const ModelOptions& opt) {
  VariableLayout layout(g.node_count(), K, opt.mode);
  PenaltyWeights w;
  if (!opt.lambda1 || !opt.lambda2) w = default_penalty_weights(g, opt.modularity);
  if (opt.lambda1) w.lambda1 = *opt.lambda1;
  if (opt.lambda2) w.lambda2 = *opt.lambda2;
  const std::size_t n = g.node_count();
  const bool factored = K * n * (n + 1) / 2 > opt.dense_term_threshold;
  ModularityObjective objective =
      factored ? ModularityObjective(build_factored_objective(g, K, opt.modularity, layout))
               : ModularityObjective(build_modularity_objective(g, K, opt.modularity, layout));
  return {assemble(layout, objective, build_assignment_constraint(layout),
                   build_nonempty_constraint(layout), w),
          w, factored};
}

/// Node-block bits for an assignment; in slack mode y_{k, size_k - 1} is set
/// for every non-empty group and y_{k, 0} for empty ones.
inline Bits encode(const CommunityAssignment& a, const VariableLayout& layout) {
  a.validate(layout.n);
  if (a.group_count != layout.K) throw DimensionError("assignment group count differs from layout");
  Bits bits(layout.dimension(), 0);
  for (std::size_t i = 0; i < layout.n; ++i) bits[layout.index(i, a.labels[i])] = 1;
  if (layout.mode == ConstraintMode::slack_qubo) {
    for (std::size_t k = 0; k < layout.K; ++k) {
      const std::size_t size = static_cast<std::size_t>(
          std::count(a.labels.begin(), a.labels.end(), k));
      bits[layout.slack_index(k, size == 0 ? 0 : size - 1)] = 1;
    }
  }
  return bits;
}

struct DecodeResult {
  CommunityAssignment assignment;
  std::size_t repaired_rows = 0;
};

/// Reads the node block. Strict mode throws on any row that is not one-hot;
/// repair mode takes the first set bit of a row (group 0 for an all-zero row).
inline DecodeResult decode(std::span<const std::uint8_t> bits, const VariableLayout& layout,
                           bool repair) {
  if (bits.size() < layout.node_block())
    throw DimensionError("bit vector shorter than the node block");
  DecodeResult out;
  out.assignment.group_count = layout.K;
  out.assignment.labels.resize(layout.n);
  for (std::size_t i = 0; i < layout.n; ++i) {
    std::size_t ones = 0, first = layout.K;
    for (std::size_t k = 0; k < layout.K; ++k) {
      if (bits[layout.index(i, k)]) {
        ++ones;
        if (first == layout.K) first = k;
      }
    }
    if (ones != 1) {
      if (!repair)
        throw FeasibilityError(i, "row " + std::to_string(i) + " has " + std::to_string(ones) +
                                      " set bits");
      ++out.repaired_rows;
    }
    out.assignment.labels[i] = first == layout.K ? 0 : first;
  }
  return out;
}

}  // namespace qcomm

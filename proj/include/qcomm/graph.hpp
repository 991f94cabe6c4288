#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qcomm/errors.hpp"

namespace qcomm {

namespace detail {

// Neumaier summation; m and k_i feed every modularity evaluation.
class CompensatedSum {
public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i == line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool parse_real(std::string_view tok, double& out) {
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

// Maps string labels to dense indices in first-appearance order.
class LabelIndex {
public:
  std::size_t intern(std::string_view label) {
    auto [it, inserted] = index_.try_emplace(std::string(label), labels_.size());
    if (inserted) labels_.emplace_back(label);
    return it->second;
  }
  std::vector<std::string> take_labels() { return std::move(labels_); }

private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> labels_;
};

inline std::uint64_t pair_key(std::size_t u, std::size_t v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint64_t>(v);
}

}  // namespace detail

struct Edge {
  std::size_t u;
  std::size_t v;
  double w;
};

struct Neighbor {
  std::size_t node;
  double weight;
};

/// Weighted undirected simple graph with dense node indices 0..n-1.
/// Immutable after construction.
class Graph {
public:
  Graph() = default;

  /// Validates and indexes `edges`. Throws DomainError on self-loops,
  /// non-positive weights, out-of-range endpoints and parallel edges.
  Graph(std::size_t node_count, std::vector<Edge> edges, std::vector<std::string> labels = {})
      : n_(node_count), edges_(std::move(edges)), labels_(std::move(labels)) {
    if (!labels_.empty() && labels_.size() != n_)
      throw DomainError("label count does not match node count");
    std::unordered_map<std::uint64_t, std::size_t> seen;
    seen.reserve(edges_.size() * 2);
    std::vector<std::size_t> counts(n_ + 1, 0);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const Edge& ed = edges_[e];
      if (ed.u >= n_ || ed.v >= n_) throw DomainError("edge endpoint out of range");
      if (ed.u == ed.v) throw DomainError("self-loop on node " + std::to_string(ed.u));
      if (!(ed.w > 0.0) || !std::isfinite(ed.w))
        throw DomainError("edge weight must be positive and finite");
      if (!seen.emplace(detail::pair_key(ed.u, ed.v), e).second)
        throw DomainError("duplicate edge " + std::to_string(ed.u) + "-" + std::to_string(ed.v));
      ++counts[ed.u + 1];
      ++counts[ed.v + 1];
    }
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    offsets_ = counts;
    adjacency_.resize(2 * edges_.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const Edge& ed : edges_) {
      adjacency_[fill[ed.u]++] = {ed.v, ed.w};
      adjacency_[fill[ed.v]++] = {ed.u, ed.w};
    }

    std::vector<detail::CompensatedSum> deg(n_);
    detail::CompensatedSum total;
    for (const Edge& ed : edges_) {
      deg[ed.u].add(ed.w);
      deg[ed.v].add(ed.w);
      total.add(ed.w);
    }
    degrees_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) degrees_[i] = deg[i].value();
    total_weight_ = total.value();
  }

  std::size_t node_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// m = sum of edge weights, each undirected edge counted once.
  double total_edge_weight() const noexcept { return total_weight_; }
  double degree(std::size_t i) const { return degrees_.at(i); }
  const std::vector<double>& degrees() const noexcept { return degrees_; }

  std::span<const Neighbor> neighbors(std::size_t i) const {
    return {adjacency_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  /// 0 when the nodes are not adjacent.
  double weight(std::size_t u, std::size_t v) const {
    for (const Neighbor& nb : neighbors(u))
      if (nb.node == v) return nb.weight;
    return 0.0;
  }

  std::string label(std::size_t i) const {
    return labels_.empty() ? std::to_string(i) : labels_.at(i);
  }

private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::string> labels_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adjacency_;
  std::vector<double> degrees_;
  double total_weight_ = 0.0;
};

struct CommunityAssignment {
  std::vector<std::size_t> labels;
  std::size_t group_count = 0;

  void validate(std::size_t node_count) const {
    if (labels.size() != node_count)
      throw DomainError("assignment length " + std::to_string(labels.size()) +
                        " does not match node count " + std::to_string(node_count));
    for (std::size_t c : labels)
      if (c >= group_count) throw DomainError("group label out of range");
  }

  std::vector<std::size_t> group_sizes() const {
    std::vector<std::size_t> sizes(group_count, 0);
    for (std::size_t c : labels) ++sizes.at(c);
    return sizes;
  }

  std::size_t empty_groups() const {
    auto sizes = group_sizes();
    return static_cast<std::size_t>(std::count(sizes.begin(), sizes.end(), std::size_t{0}));
  }

  bool operator==(const CommunityAssignment&) const = default;
};

struct ModularityParams {
  double gamma = 1.0;

  void validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be positive");
  }
};

/// Parses "u v" / "u v w" lines. Labels are arbitrary tokens mapped to dense
/// indices in order of first appearance. With `weighted` false a third column
/// is ignored and every weight is 1.
inline Graph load_edge_list(std::istream& in, bool weighted) {
  detail::LabelIndex index;
  std::vector<Edge> edges;
  std::unordered_map<std::uint64_t, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    auto tok = detail::split_ws(view);
    if (tok.empty()) continue;
    if (tok.size() < 2 || tok.size() > 3)
      throw ParseError(lineno, "expected 'u v' or 'u v w', got " + std::to_string(tok.size()) +
                                   " columns");
    double w = 1.0;
    if (tok.size() == 3) {
      double parsed = 0.0;
      if (!detail::parse_real(tok[2], parsed))
        throw ParseError(lineno, "invalid weight '" + std::string(tok[2]) + "'");
      if (weighted) w = parsed;
    }
    if (tok[0] == tok[1]) throw DomainError("line " + std::to_string(lineno) + ": self-loop");
    if (!(w > 0.0))
      throw DomainError("line " + std::to_string(lineno) + ": weight must be positive");
    const std::size_t u = index.intern(tok[0]);
    const std::size_t v = index.intern(tok[1]);
    if (!seen.emplace(detail::pair_key(u, v), lineno).second)
      throw DomainError("line " + std::to_string(lineno) + ": duplicate edge " +
                        std::string(tok[0]) + " " + std::string(tok[1]));
    edges.push_back({u, v, w});
  }
  auto labels = index.take_labels();
  const std::size_t n = labels.size();
  return Graph(n, std::move(edges), std::move(labels));
}

inline Graph load_edge_list(std::string_view text, bool weighted) {
  std::istringstream in{std::string(text)};
  return load_edge_list(in, weighted);
}

/// Parses "u v r x" branch lines into a graph weighted by 1/|r + jx|.
/// Parallel branches keep the first occurrence; each dropped branch appends
/// a message to `warnings` when given.
inline Graph load_branch_table(std::istream& in, std::vector<std::string>* warnings = nullptr) {
  detail::LabelIndex index;
  std::vector<Edge> edges;
  std::unordered_map<std::uint64_t, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    auto tok = detail::split_ws(view);
    if (tok.empty()) continue;
    if (tok.size() != 4)
      throw ParseError(lineno, "expected 'u v r x', got " + std::to_string(tok.size()) + " columns");
    double r = 0.0, x = 0.0;
    if (!detail::parse_real(tok[2], r) || !detail::parse_real(tok[3], x))
      throw ParseError(lineno, "invalid impedance");
    if (tok[0] == tok[1]) throw DomainError("line " + std::to_string(lineno) + ": self-loop");
    const double z = std::hypot(r, x);
    if (!(z > 0.0))
      throw DomainError("line " + std::to_string(lineno) + ": zero impedance");
    const std::size_t u = index.intern(tok[0]);
    const std::size_t v = index.intern(tok[1]);
    auto [it, inserted] = seen.emplace(detail::pair_key(u, v), lineno);
    if (!inserted) {
      if (warnings)
        warnings->push_back("line " + std::to_string(lineno) + ": parallel branch " +
                            std::string(tok[0]) + "-" + std::string(tok[1]) +
                            " dropped (first seen on line " + std::to_string(it->second) + ")");
      continue;
    }
    edges.push_back({u, v, 1.0 / z});
  }
  auto labels = index.take_labels();
  const std::size_t n = labels.size();
  return Graph(n, std::move(edges), std::move(labels));
}

inline Graph load_branch_table(std::string_view text, std::vector<std::string>* warnings = nullptr) {
  std::istringstream in{std::string(text)};
  return load_branch_table(in, warnings);
}

enum class GraphFormat { edge_list, branch_table };

inline Graph load_graph_file(const std::string& path, GraphFormat format, bool weighted,
                             std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return format == GraphFormat::branch_table ? load_branch_table(in, warnings)
                                             : load_edge_list(in, weighted);
}

inline std::vector<double> degree_vector(const Graph& g) { return g.degrees(); }

/// Q = sum_c [ in_c / m - gamma (tot_c / 2m)^2 ], in_c counting each internal edge once.
inline double modularity(const Graph& g, const CommunityAssignment& a,
                         const ModularityParams& p = {}) {
  p.validate();
  a.validate(g.node_count());
  const double m = g.total_edge_weight();
  if (!(m > 0.0)) throw DomainError("modularity is undefined on a graph without edges");
  std::vector<detail::CompensatedSum> inner(a.group_count), total(a.group_count);
  for (const Edge& e : g.edges())
    if (a.labels[e.u] == a.labels[e.v]) inner[a.labels[e.u]].add(e.w);
  for (std::size_t i = 0; i < g.node_count(); ++i) total[a.labels[i]].add(g.degree(i));
  detail::CompensatedSum q;
  for (std::size_t c = 0; c < a.group_count; ++c) {
    const double t = total[c].value() / (2.0 * m);
    q.add(inner[c].value() / m);
    q.add(-p.gamma * t * t);
  }
  return q.value();
}

/// Direct O(n^2) double sum over node pairs. Slow; kept as a second route for tests.
inline double modularity_pairwise(const Graph& g, const CommunityAssignment& a,
                                  const ModularityParams& p = {}) {
  p.validate();
  a.validate(g.node_count());
  const double m = g.total_edge_weight();
  if (!(m > 0.0)) throw DomainError("modularity is undefined on a graph without edges");
  const std::size_t n = g.node_count();
  std::vector<double> row(n, 0.0);
  detail::CompensatedSum q;
  for (std::size_t i = 0; i < n; ++i) {
    for (const Neighbor& nb : g.neighbors(i)) row[nb.node] = nb.weight;
    for (std::size_t j = 0; j < n; ++j) {
      if (a.labels[i] != a.labels[j]) continue;
      q.add(row[j] - p.gamma * g.degree(i) * g.degree(j) / (2.0 * m));
    }
    for (const Neighbor& nb : g.neighbors(i)) row[nb.node] = 0.0;
  }
  return q.value() / (2.0 * m);
}

}  // namespace qcomm

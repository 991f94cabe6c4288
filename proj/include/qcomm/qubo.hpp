#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qcomm/errors.hpp"
#include "qcomm/graph.hpp"

namespace qcomm {

using Bits = std::vector<std::uint8_t>;

struct QuboTerm {
  std::size_t a;  // a <= b; a == b is a linear term since x*x = x
  std::size_t b;
  double coef;
};

/// Upper-triangular sparse quadratic form over {0,1}^N plus a constant.
/// Terms are sorted by (a, b), merged and free of zero coefficients.
class QuboMatrix {
public:
  QuboMatrix() = default;
  explicit QuboMatrix(std::size_t dimension) : dim_(dimension) {}

  std::size_t dimension() const noexcept { return dim_; }
  double constant() const noexcept { return constant_; }
  std::span<const QuboTerm> terms() const noexcept { return terms_; }
  std::size_t term_count() const noexcept { return terms_.size(); }

  double coefficient(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    auto it = std::lower_bound(terms_.begin(), terms_.end(), std::pair{a, b},
                               [](const QuboTerm& t, const std::pair<std::size_t, std::size_t>& k) {
                                 return t.a < k.first || (t.a == k.first && t.b < k.second);
                               });
    return (it != terms_.end() && it->a == a && it->b == b) ? it->coef : 0.0;
  }

  /// Full recomputation; the reference every incremental update is checked against.
  double energy(std::span<const std::uint8_t> bits) const {
    if (bits.size() != dim_)
      throw DimensionError("bit vector has length " + std::to_string(bits.size()) +
                           ", model dimension is " + std::to_string(dim_));
    double e = constant_;
    for (const QuboTerm& t : terms_)
      if (bits[t.a] && bits[t.b]) e += t.coef;
    return e;
  }

private:
  friend class QuboBuilder;
  std::size_t dim_ = 0;
  std::vector<QuboTerm> terms_;
  double constant_ = 0.0;
};

/// Accumulates terms in any order; build() canonicalizes.
class QuboBuilder {
public:
  explicit QuboBuilder(std::size_t dimension) : dim_(dimension) {}

  std::size_t dimension() const noexcept { return dim_; }

  QuboBuilder& add(std::size_t a, std::size_t b, double coef) {
    if (a >= dim_ || b >= dim_) throw DimensionError("term index out of range");
    if (a > b) std::swap(a, b);
    pending_.push_back({a, b, coef});
    return *this;
  }

  QuboBuilder& add_constant(double c) {
    constant_ += c;
    return *this;
  }

  /// Adds scale * (sum_a c_a x_a + offset)^2, expanded with x*x = x.
  QuboBuilder& add_squared_linear(std::span<const std::pair<std::size_t, double>> linear,
                                  double offset, double scale = 1.0) {
    for (std::size_t p = 0; p < linear.size(); ++p) {
      const auto [a, ca] = linear[p];
      add(a, a, scale * (ca * ca + 2.0 * offset * ca));
      for (std::size_t q = p + 1; q < linear.size(); ++q) {
        const auto [b, cb] = linear[q];
        add(a, b, scale * 2.0 * ca * cb);
      }
    }
    add_constant(scale * offset * offset);
    return *this;
  }

  QuboBuilder& add_scaled(const QuboMatrix& other, double scale) {
    if (other.dimension() > dim_) throw DimensionError("added matrix is larger than the builder");
    for (const QuboTerm& t : other.terms()) pending_.push_back({t.a, t.b, scale * t.coef});
    constant_ += scale * other.constant();
    return *this;
  }

  QuboMatrix build() const {
    std::vector<QuboTerm> terms = pending_;
    std::sort(terms.begin(), terms.end(), [](const QuboTerm& x, const QuboTerm& y) {
      return x.a < y.a || (x.a == y.a && x.b < y.b);
    });
    QuboMatrix out(dim_);
    out.constant_ = constant_;
    for (const QuboTerm& t : terms) {
      if (!out.terms_.empty() && out.terms_.back().a == t.a && out.terms_.back().b == t.b)
        out.terms_.back().coef += t.coef;
      else
        out.terms_.push_back(t);
    }
    std::erase_if(out.terms_, [](const QuboTerm& t) { return t.coef == 0.0; });
    return out;
  }

private:
  std::size_t dim_;
  std::vector<QuboTerm> pending_;
  double constant_ = 0.0;
};

/// Couplings keyed by (i, j). The energy sums over every stored key, so a
/// symmetric J lists both (i, j) and (j, i).
using IsingCouplings = std::map<std::pair<std::size_t, std::size_t>, double>;

/// E(s) = -sum_{(i,j)} J_ij s_i s_j - sum_i h_i s_i with s in {-1, +1}.
inline double ising_energy(const IsingCouplings& couplings, std::span<const double> field,
                           std::span<const int> spins) {
  double e = 0.0;
  for (const auto& [key, w] : couplings) e -= w * spins[key.first] * spins[key.second];
  for (std::size_t i = 0; i < field.size(); ++i) e -= field[i] * spins[i];
  return e;
}

/// Rewrites an Ising energy over b = (s + 1) / 2. Exact for every spin vector.
inline QuboMatrix ising_to_qubo(const IsingCouplings& couplings, std::span<const double> field) {
  std::size_t n = field.size();
  for (const auto& [key, w] : couplings) n = std::max({n, key.first + 1, key.second + 1});
  QuboBuilder qb(n);
  for (const auto& [key, w] : couplings) {
    const auto [i, j] = key;
    if (i == j) {
      qb.add_constant(-w);
      continue;
    }
    // -w (2b_i - 1)(2b_j - 1)
    qb.add(i, j, -4.0 * w);
    qb.add(i, i, 2.0 * w);
    qb.add(j, j, 2.0 * w);
    qb.add_constant(-w);
  }
  for (std::size_t i = 0; i < field.size(); ++i) {
    qb.add(i, i, -2.0 * field[i]);
    qb.add_constant(field[i]);
  }
  return qb.build();
}

/// Text export: first line "N constant", then one "a b coeff" line per term.
inline void write_qubo_text(std::ostream& out, const QuboMatrix& q) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", q.constant());
  out << q.dimension() << ' ' << buf << '\n';
  for (const QuboTerm& t : q.terms()) {
    std::snprintf(buf, sizeof buf, "%.17g", t.coef);
    out << t.a << ' ' << t.b << ' ' << buf << '\n';
  }
}

inline QuboMatrix read_qubo_text(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&](std::vector<std::string_view>& tok) {
    while (std::getline(in, line)) {
      ++lineno;
      tok = detail::split_ws(line);
      if (!tok.empty()) return true;
    }
    return false;
  };
  std::vector<std::string_view> tok;
  if (!next_line(tok) || tok.size() != 2) throw ParseError(lineno, "expected header 'N constant'");
  double n_real = 0.0, constant = 0.0;
  if (!detail::parse_real(tok[0], n_real) || !detail::parse_real(tok[1], constant) || n_real < 0)
    throw ParseError(lineno, "invalid header");
  QuboBuilder qb(static_cast<std::size_t>(n_real));
  qb.add_constant(constant);
  while (next_line(tok)) {
    double a = 0, b = 0, c = 0;
    if (tok.size() != 3 || !detail::parse_real(tok[0], a) || !detail::parse_real(tok[1], b) ||
        !detail::parse_real(tok[2], c))
      throw ParseError(lineno, "expected 'a b coeff'");
    qb.add(static_cast<std::size_t>(a), static_cast<std::size_t>(b), c);
  }
  return qb.build();
}

}  // namespace qcomm

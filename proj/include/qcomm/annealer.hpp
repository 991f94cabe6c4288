#pragma once

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qcomm/errors.hpp"
#include "qcomm/model.hpp"
#include "qcomm/rng.hpp"

namespace qcomm {

struct SolverConfig {
  double time_limit_sec = 10.0;
  std::uint64_t seed = 42;
  std::optional<double> t_initial;         // nullopt: auto_tune
  std::optional<double> t_final;           // nullopt: t_initial * final_ratio
  std::optional<double> decay;             // per-sweep factor; nullopt: spread over the budget
  std::optional<double> offset_increment;  // nullopt: auto_tune
  std::optional<Bits> initial_bits;        // nullopt: all zeros
  /// Fixed sweep count. The schedule then advances per sweep instead of per
  /// elapsed second and time_limit_sec is ignored, which makes runs
  /// bit-for-bit reproducible.
  std::optional<std::size_t> sweeps;
  std::optional<std::size_t> steps_per_sweep;  // nullopt: about 2^20 candidate evaluations
  double final_ratio = 1e-2;
  std::size_t tune_samples = 1000;
  std::size_t workers = 1;
  std::size_t audit_every_sweeps = 0;  // 0 disables the energy audit
  bool record_trace = true;

  void validate() const {
    if (!(time_limit_sec > 0.0)) throw DomainError("time_limit_sec must be positive");
    if (t_initial && !(*t_initial > 0.0)) throw DomainError("t_initial must be positive");
    if (t_final && !(*t_final > 0.0)) throw DomainError("t_final must be positive");
    if (decay && !(*decay > 0.0 && *decay < 1.0)) throw DomainError("decay must lie in (0, 1)");
    if (offset_increment && !(*offset_increment >= 0.0))
      throw DomainError("offset_increment must be non-negative");
    if (sweeps && *sweeps == 0) throw DomainError("sweeps must be positive");
    if (steps_per_sweep && *steps_per_sweep == 0) throw DomainError("steps_per_sweep must be positive");
    if (!(final_ratio > 0.0 && final_ratio <= 1.0)) throw DomainError("final_ratio must lie in (0, 1]");
    if (workers == 0) throw DomainError("workers must be at least 1");
  }
};

/// Current configuration plus everything needed for O(1) flip deltas.
struct SolverState {
  Bits bits;
  std::vector<double> fields;           // sum_b W_ab x_b over explicit couplings
  std::vector<double> group_load;       // sum_i k_i x_ik, rank-one part
  std::vector<std::size_t> occupancy;   // sum_i x_ik, inequality part
  double energy = 0.0;
  double offset = 0.0;
  std::uint64_t step = 0;
};

/// Rebuilds fields, counters and energy from `bits`.
inline void recompute(const HybridModel& model, SolverState& s) {
  const std::size_t N = model.dimension();
  s.fields.assign(N, 0.0);
  for (std::size_t a = 0; a < N; ++a) {
    if (!s.bits[a]) continue;
    for (const ModelTerm& t : model.couplings(a)) s.fields[t.other] += t.coef;
  }
  const VariableLayout& L = model.layout();
  s.group_load.assign(L.K, 0.0);
  s.occupancy.assign(L.K, 0);
  for (std::size_t i = 0; i < L.n; ++i) {
    for (std::size_t k = 0; k < L.K; ++k) {
      if (!s.bits[L.index(i, k)]) continue;
      ++s.occupancy[k];
      if (model.rank_one()) s.group_load[k] += model.rank_one()->node_weights[i];
    }
  }
  s.energy = model.energy(s.bits);
}

inline SolverState init_state(const HybridModel& model, const SolverConfig& config = {}) {
  const std::size_t N = model.dimension();
  if (N == 0) throw DimensionError("model has no variables");
  SolverState s;
  if (config.initial_bits) {
    if (config.initial_bits->size() != N)
      throw DimensionError("initial state has length " + std::to_string(config.initial_bits->size()) +
                           ", model dimension is " + std::to_string(N));
    s.bits = *config.initial_bits;
    for (auto& b : s.bits) b = b ? 1 : 0;
  } else {
    s.bits.assign(N, 0);
  }
  recompute(model, s);
  return s;
}

inline double flip_delta(const HybridModel& model, const SolverState& s, std::size_t a) {
  const bool on = s.bits[a] != 0;
  double d = (on ? -1.0 : 1.0) * (model.diagonal(a) + s.fields[a]);
  const VariableLayout& L = model.layout();
  if (L.is_node_variable(a)) {
    const std::size_t k = L.group_of(a);
    if (const auto& r = model.rank_one()) {
      const double w = r->node_weights[L.node_of(a)];
      d += r->coef * ((on ? -2.0 : 2.0) * s.group_load[k] * w + w * w);
    }
    if (model.inequality())
      d += model.inequality_weight() * InequalityPenalty::delta(s.occupancy[k], on ? -1 : 1);
  }
  return d;
}

inline void apply_flip(const HybridModel& model, SolverState& s, std::size_t a) {
  const double delta = flip_delta(model, s, a);
  const bool turning_on = s.bits[a] == 0;
  const double sign = turning_on ? 1.0 : -1.0;
  s.bits[a] = turning_on ? 1 : 0;
  s.energy += delta;
  for (const ModelTerm& t : model.couplings(a)) s.fields[t.other] += sign * t.coef;
  const VariableLayout& L = model.layout();
  if (L.is_node_variable(a)) {
    const std::size_t k = L.group_of(a);
    if (turning_on)
      ++s.occupancy[k];
    else
      --s.occupancy[k];
    if (const auto& r = model.rank_one()) s.group_load[k] += sign * r->node_weights[L.node_of(a)];
  }
  s.offset = 0.0;
}

namespace detail {

// Runs one job on `workers` threads (the caller is worker 0) and waits for all.
class ScanPool {
public:
  explicit ScanPool(std::size_t workers) : start_(workers), done_(workers) {
    for (std::size_t w = 1; w < workers; ++w)
      threads_.emplace_back([this, w] {
        for (;;) {
          start_.arrive_and_wait();
          if (stop_.load(std::memory_order_acquire)) return;
          (*job_)(w);
          done_.arrive_and_wait();
        }
      });
  }
  ScanPool(const ScanPool&) = delete;
  ScanPool& operator=(const ScanPool&) = delete;
  ~ScanPool() {
    stop_.store(true, std::memory_order_release);
    start_.arrive_and_wait();
    for (auto& t : threads_) t.join();
  }

  std::size_t size() const noexcept { return threads_.size() + 1; }

  void run(const std::function<void(std::size_t)>& job) {
    job_ = &job;
    start_.arrive_and_wait();
    job(0);
    done_.arrive_and_wait();
  }

private:
  std::barrier<> start_;
  std::barrier<> done_;
  std::atomic<bool> stop_{false};
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::vector<std::thread> threads_;
};

}  // namespace detail

/// One Digital-Annealer style Monte-Carlo step at a time: every single-bit flip
/// is tried against the same state, one accepted flip is applied.
///
/// Candidate a is accepted with probability min(1, exp(-(delta_a - offset) / T)).
/// The uniform for candidate a at step t is CounterRng(seed).uniform(2t, a) and
/// the selection among accepted candidates uses stream 2t + 1, so the outcome
/// does not depend on how the scan is split across workers.
class ParallelTrial {
public:
  ParallelTrial(const HybridModel& model, std::uint64_t seed, double offset_increment,
                std::size_t workers = 1)
      : model_(model), rng_(seed), increment_(offset_increment) {
    const std::size_t N = model.dimension();
    workers = std::max<std::size_t>(1, std::min(workers, N));
    bounds_.resize(workers + 1);
    for (std::size_t w = 0; w <= workers; ++w) bounds_[w] = N * w / workers;
    accepted_.resize(workers);
    for (std::size_t w = 0; w < workers; ++w) accepted_[w].items.resize(bounds_[w + 1] - bounds_[w]);
    if (workers > 1) pool_.emplace(workers);
  }

  double offset_increment() const noexcept { return increment_; }

  /// Candidates accepted by the most recent step, in index order.
  std::vector<std::size_t> last_accepted() const {
    std::vector<std::size_t> out;
    for (const auto& buf : accepted_)
      out.insert(out.end(), buf.items.begin(), buf.items.begin() + static_cast<std::ptrdiff_t>(buf.count));
    return out;
  }

  /// Returns the applied flip, or nullopt when nothing was accepted (the
  /// offset then grows by the increment).
  std::optional<std::size_t> step(SolverState& s, double temperature) {
    if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
    const double inv_t = 1.0 / temperature;
    const std::uint64_t stream = 2 * s.step;
    if (pool_) {
      const std::function<void(std::size_t)> job = [&](std::size_t w) {
        scan(s, inv_t, stream, bounds_[w], bounds_[w + 1], accepted_[w]);
      };
      pool_->run(job);
    } else {
      scan(s, inv_t, stream, 0, model_.dimension(), accepted_[0]);
    }
    std::size_t total = 0;
    for (const auto& buf : accepted_) total += buf.count;
    ++s.step;
    if (total == 0) {
      s.offset += increment_;
      return std::nullopt;
    }
    std::size_t pick = rng_.below(total, stream + 1, 0);
    std::size_t chosen = 0;
    for (const auto& buf : accepted_) {
      if (pick < buf.count) {
        chosen = buf.items[pick];
        break;
      }
      pick -= buf.count;
    }
    apply_flip(model_, s, chosen);
    return chosen;
  }

private:
  struct Buffer {
    std::vector<std::size_t> items;
    std::size_t count = 0;
  };

  // Acceptance test for one candidate; see the class comment.
  static bool accept(double z, const CounterRng::Stream& draws, std::size_t a) {
    if (z <= 0.0) return true;
    // exp(-40) is below the smallest uniform we can draw, so such candidates never pass.
    if (z >= 40.0) return false;
    const double u = draws.uniform(a);
    // 1 - z <= exp(-z) <= 1 / (1 + z + z^2/2 + z^3/6) brackets the exact test.
    if (u < 1.0 - z) return true;
    if (u * (1.0 + z * (1.0 + z * (0.5 + z * (1.0 / 6.0)))) >= 1.0) return false;
    return u < std::exp(-z);
  }

  void scan(const SolverState& s, double inv_t, std::uint64_t stream, std::size_t lo,
            std::size_t hi, Buffer& out) const {
    const CounterRng::Stream draws = rng_.stream(stream);
    out.count = 0;
    std::size_t* dst = out.items.data();
    std::size_t count = 0;
    const VariableLayout& L = model_.layout();
    const std::size_t node_end = std::min(hi, L.node_block());
    const RankOneGroups* rank_one = model_.rank_one() ? &*model_.rank_one() : nullptr;
    const bool has_ineq = model_.inequality().has_value();
    const double ineq_w = model_.inequality_weight();
    const double offset = s.offset;
    const std::uint8_t* bits = s.bits.data();
    const double* fields = s.fields.data();
    std::size_t a = lo;
    if (a < node_end) {
      std::size_t i = a / L.K, k = a % L.K;
      for (; a < node_end; ++a) {
        const double sign = bits[a] ? -1.0 : 1.0;
        double d = sign * (model_.diagonal(a) + fields[a]);
        if (rank_one) {
          const double w = rank_one->node_weights[i];
          d += rank_one->coef * (2.0 * sign * s.group_load[k] * w + w * w);
        }
        if (has_ineq) d += ineq_w * InequalityPenalty::delta(s.occupancy[k], bits[a] ? -1 : 1);
        dst[count] = a;
        count += accept((d - offset) * inv_t, draws, a) ? 1 : 0;
        if (++k == L.K) {
          k = 0;
          ++i;
        }
      }
    }
    for (; a < hi; ++a) {
      const double d = (bits[a] ? -1.0 : 1.0) * (model_.diagonal(a) + fields[a]);
      dst[count] = a;
      count += accept((d - offset) * inv_t, draws, a) ? 1 : 0;
    }
    out.count = count;
  }

  const HybridModel& model_;
  CounterRng rng_;
  double increment_;
  std::vector<Buffer> accepted_;
  std::vector<std::size_t> bounds_;
  std::optional<detail::ScanPool> pool_;
};

inline std::optional<std::size_t> parallel_trial_step(const HybridModel& model, SolverState& s,
                                                      double temperature, double offset_increment,
                                                      std::uint64_t seed) {
  ParallelTrial trial(model, seed, offset_increment);
  return trial.step(s, temperature);
}

struct Schedule {
  double t_initial = 1.0;
  double t_final = 1e-2;
  std::optional<double> decay;
  double offset_increment = 0.0;
  std::size_t steps_per_sweep = 1;
};

namespace detail {
inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

// Stream tag for tuning draws; disjoint from the step streams for any practical run length.
inline constexpr std::uint64_t kTuneStream = 0xfffffffffff00000ULL;
}  // namespace detail

/// t_initial makes the median uphill delta pass with probability 1/2,
/// offset_increment is 0.1 x the median |delta|. Deltas come from a random walk
/// of `samples` flips starting at the initial state. Zero models fall back to
/// t_initial = 1.
inline Schedule tune_from_deltas(std::span<const double> deltas, const SolverConfig& config) {
  std::vector<double> uphill, magnitude;
  for (double d : deltas) {
    if (d > 0.0) uphill.push_back(d);
    magnitude.push_back(std::abs(d));
  }
  Schedule sch;
  const double med_up = detail::median(uphill);
  sch.t_initial = config.t_initial ? *config.t_initial
                                   : (med_up > 0.0 ? med_up / std::log(2.0) : 1.0);
  sch.t_final = config.t_final ? *config.t_final : sch.t_initial * config.final_ratio;
  if (sch.t_final > sch.t_initial) sch.t_final = sch.t_initial;
  sch.decay = config.decay;
  sch.offset_increment =
      config.offset_increment ? *config.offset_increment : 0.1 * detail::median(magnitude);
  return sch;
}

inline Schedule auto_tune(const HybridModel& model, const SolverConfig& config) {
  config.validate();
  const std::size_t N = model.dimension();
  std::vector<double> deltas;
  const bool need_samples = !config.t_initial || !config.offset_increment;
  if (need_samples) {
    SolverState s = init_state(model, config);
    CounterRng rng(config.seed);
    deltas.reserve(config.tune_samples);
    for (std::size_t t = 0; t < config.tune_samples; ++t) {
      const std::size_t a = rng.below(N, detail::kTuneStream, t);
      deltas.push_back(flip_delta(model, s, a));
      apply_flip(model, s, a);
    }
  }
  Schedule sch = tune_from_deltas(deltas, config);
  sch.steps_per_sweep = config.steps_per_sweep
                            ? *config.steps_per_sweep
                            : std::max<std::size_t>(1, (std::size_t{1} << 20) / N);
  return sch;
}

struct TracePoint {
  double elapsed_sec;
  double best_energy;
};

struct SolveResult {
  Bits best_bits;
  double best_energy = 0.0;
  double solve_time = 0.0;
  double time_limit_sec = 0.0;
  std::size_t sweeps = 0;
  std::uint64_t steps = 0;
  std::uint64_t accepted_flips = 0;
  std::uint64_t offset_events = 0;
  double max_sweep_sec = 0.0;
  bool hit_time_limit = false;
  Schedule schedule;
  std::vector<TracePoint> energy_trace;
};

class EnergyAuditError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// |incremental - recomputed| <= 1e-9 (1 + |incremental|), else throws.
inline void audit(const HybridModel& model, const SolverState& s) {
  const double full = model.energy(s.bits);
  if (std::abs(full - s.energy) > 1e-9 * (1.0 + std::abs(s.energy)))
    throw EnergyAuditError("incremental energy " + std::to_string(s.energy) +
                           " drifted from recomputed " + std::to_string(full));
}

/// Anneals until the wall-clock budget is spent (or `config.sweeps` sweeps are
/// done). The clock is read once per sweep, so the overshoot is at most one
/// sweep plus result assembly.
inline SolveResult anneal(const HybridModel& model, const SolverConfig& config) {
  using clock = std::chrono::steady_clock;
  config.validate();
  const auto started = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - started).count(); };

  SolveResult res;
  res.time_limit_sec = config.time_limit_sec;
  res.schedule = auto_tune(model, config);
  const Schedule& sch = res.schedule;

  SolverState s = init_state(model, config);
  ParallelTrial trial(model, config.seed, sch.offset_increment, config.workers);
  res.best_bits = s.bits;
  res.best_energy = s.energy;
  if (config.record_trace) res.energy_trace.push_back({elapsed(), res.best_energy});

  const double log_ratio = std::log(sch.t_final / sch.t_initial);
  double temperature = sch.t_initial;
  double last_mark = elapsed();
  for (;;) {
    bool improved = false;
    for (std::size_t t = 0; t < sch.steps_per_sweep; ++t) {
      ++res.steps;
      if (trial.step(s, temperature)) {
        ++res.accepted_flips;
        if (s.energy < res.best_energy) {
          res.best_energy = s.energy;
          res.best_bits = s.bits;
          improved = true;
        }
      } else {
        ++res.offset_events;
      }
    }
    ++res.sweeps;
    if (config.audit_every_sweeps && res.sweeps % config.audit_every_sweeps == 0) {
      audit(model, s);
      recompute(model, s);
    }
    const double now = elapsed();
    res.max_sweep_sec = std::max(res.max_sweep_sec, now - last_mark);
    last_mark = now;
    if (improved && config.record_trace) res.energy_trace.push_back({now, res.best_energy});

    double progress = 0.0;
    if (config.sweeps) {
      if (res.sweeps >= *config.sweeps) break;
      progress = static_cast<double>(res.sweeps) / static_cast<double>(*config.sweeps);
    } else {
      progress = now / config.time_limit_sec;
    }
    if (!config.sweeps && now >= config.time_limit_sec) {
      res.hit_time_limit = true;
      break;
    }
    if (sch.decay)
      temperature = std::max(sch.t_final, temperature * *sch.decay);
    else
      temperature = sch.t_initial * std::exp(log_ratio * std::min(1.0, progress));
  }
  // Incremental energies can drift by rounding; report the recomputed value.
  res.best_energy = model.energy(res.best_bits);
  res.solve_time = elapsed();
  return res;
}

}  // namespace qcomm

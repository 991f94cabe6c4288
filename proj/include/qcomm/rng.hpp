#pragma once

#include <cstdint>

namespace qcomm {

/// Stateless counter-based generator: every draw is a pure function of
/// (key, stream, counter), so draws can be skipped or taken out of order
/// without changing any other draw.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed) noexcept : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  /// Draws of one stream. Keying the stream once per step keeps the per-draw
  /// cost at a single mix.
  class Stream {
  public:
    explicit Stream(std::uint64_t key) noexcept : key_(key) {}

    std::uint64_t bits(std::uint64_t counter) const noexcept {
      return mix(key_ + counter * 0x9e3779b97f4a7c15ULL);
    }
    double uniform(std::uint64_t counter) const noexcept {
      return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }
    std::uint64_t below(std::uint64_t bound, std::uint64_t counter) const noexcept {
      return static_cast<std::uint64_t>(
          (static_cast<unsigned __int128>(bits(counter)) * bound) >> 64);
    }

  private:
    std::uint64_t key_;
  };

  Stream stream(std::uint64_t id) const noexcept { return Stream(mix(key_ ^ mix(id))); }

  std::uint64_t bits(std::uint64_t stream_id, std::uint64_t counter) const noexcept {
    return stream(stream_id).bits(counter);
  }

  /// Uniform in the open interval (0, 1); never below 2^-54.
  double uniform(std::uint64_t stream_id, std::uint64_t counter) const noexcept {
    return stream(stream_id).uniform(counter);
  }

  /// Uniform integer in [0, bound) by multiply-shift; bound > 0.
  std::uint64_t below(std::uint64_t bound, std::uint64_t stream_id,
                      std::uint64_t counter) const noexcept {
    return stream(stream_id).below(bound, counter);
  }

  // SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t key_;
};

}  // namespace qcomm

#pragma once

#include <cstdint>
#include <random>

namespace hubnet {

// SplitMix64 finaliser applied to (base, index). Used to derive replication
// seeds from a root seed and per-purpose substreams from a replication seed,
// so that adding a station never perturbs the draws of another stream.
std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) noexcept;

// Mutable random source. One stream must never be shared between threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Exponential by inversion.
  double exponential(double rate) noexcept;

  std::uint64_t next_u64() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hubnet

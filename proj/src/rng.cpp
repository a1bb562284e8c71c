#include "hubnet/rng.hpp"

#include <cmath>

namespace hubnet {

std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) noexcept {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double RngStream::exponential(double rate) noexcept {
  return -std::log1p(-uniform()) / rate;
}

}  // namespace hubnet

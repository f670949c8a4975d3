#include "tgeval/rng.hpp"

#include <cmath>
#include <numbers>

namespace tgeval {

std::size_t SplitMix64::below(std::size_t n) {
  // Lemire's multiply-shift with rejection; exact for every n.
  const auto bound = static_cast<std::uint64_t>(n);
  auto product = static_cast<unsigned __int128>(next()) * bound;
  auto low = static_cast<std::uint64_t>(product);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      product = static_cast<unsigned __int128>(next()) * bound;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::size_t>(product >> 64);
}

double SplitMix64::normal_pair(double& second) {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  second = radius * std::sin(angle);
  return radius * std::cos(angle);
}

}  // namespace tgeval

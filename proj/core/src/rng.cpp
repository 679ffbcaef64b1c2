#include "proxident/rng.hpp"

#include <cmath>
#include <numbers>

namespace proxident {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix(std::uint64_t z) noexcept {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::mix(std::uint64_t key, std::uint64_t counter) noexcept {
  // Two rounds keep adjacent keys and adjacent counters decorrelated.
  return splitmix(splitmix(key) ^ (counter * kGolden + 0x632BE59BD9B4E019ULL));
}

std::uint64_t CounterRng::derive(std::uint64_t key, std::uint64_t stream) noexcept {
  return splitmix(key ^ splitmix(stream + 0xD1B54A32D192ED03ULL));
}

double CounterRng::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::below(std::uint64_t n) noexcept {
  if (n <= 1) return 0;
  // Rejection keeps the result exactly uniform.
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t x;
  do {
    x = (*this)();
  } while (x >= limit);
  return x % n;
}

double CounterRng::normal() noexcept {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> CounterRng::simplex(std::size_t n) {
  // Normalized exponentials: Dirichlet(1, ..., 1).
  std::vector<double> out(n);
  double total = 0.0;
  for (auto& x : out) {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    x = -std::log(u);
    total += x;
  }
  for (auto& x : out) x /= total;
  return out;
}

}  // namespace proxident

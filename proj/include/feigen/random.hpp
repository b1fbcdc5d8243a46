#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace feigen {

// Counter-based random streams. A draw is a pure function of
// (seed, stream, index, attempt), so results never depend on how sample
// indices are distributed over workers.
enum class Stream : std::uint64_t {
  Eta = 1,
  Xi = 2,
  Rho = 3,
  Kappa = 4,
  Omega = 5,
  NiceBoundary = 6,
  RealEta = 7,
  RealXi = 8,
  WildAttractor = 9,
  Test = 99,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct CounterKey {
  std::uint64_t seed = 0;
  Stream stream = Stream::Test;
  std::uint64_t level = 0;
  std::uint64_t index = 0;
  std::uint64_t attempt = 0;
};

constexpr std::uint64_t counter_hash(const CounterKey& k, std::uint64_t lane) noexcept {
  std::uint64_t h = splitmix64(k.seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(k.stream));
  h = splitmix64(h ^ k.level);
  h = splitmix64(h ^ k.index);
  h = splitmix64(h ^ k.attempt);
  return splitmix64(h ^ lane);
}

// Uniform on [0, 1) with 53 random bits.
constexpr double uniform01(const CounterKey& k, std::uint64_t lane) noexcept {
  return static_cast<double>(counter_hash(k, lane) >> 11) * 0x1.0p-53;
}

// Uniform (Lebesgue) point in the open unit disk.
inline std::complex<double> unit_disk_point(const CounterKey& k) {
  const double radius = std::sqrt(uniform01(k, 0));
  const double angle = 2.0 * std::numbers::pi * uniform01(k, 1);
  return std::polar(radius, angle);
}

}  // namespace feigen

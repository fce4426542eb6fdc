#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace stochlyap {

/// Seed for Monte Carlo trial `t` of an ensemble started from `base`.
constexpr std::uint64_t trial_seed(std::uint64_t base, std::uint64_t t) noexcept { return base ^ t; }

/// Seed of independent sub-stream `stream` within one run (splitmix64 mix,
/// so neighbouring runs do not share sub-streams).
constexpr std::uint64_t stream_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// mt19937_64 with portable uniform and categorical draws (the std
/// distributions are implementation-defined, which would break
/// reproducibility across standard libraries).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform01() < p; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform01() * static_cast<double>(n)) % n; }

  /// Index drawn with probability proportional to weights[i].
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform01() * total;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      last_positive = i;
      if (u < weights[i]) return i;
      u -= weights[i];
    }
    return last_positive;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace stochlyap

#pragma once

#include <cstdint>
#include <random>

namespace slugbot {

/// Seeded standard-normal stream. Each simulation subsystem owns its own
/// stream so that adding draws in one does not perturb another.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed, std::uint64_t stream = 0) { reseed(seed, stream); }

  void reseed(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
    normal_.reset();
  }

  double standard_normal() { return normal_(engine_); }

  /// Always consumes one draw, even when sigma is zero.
  double gaussian(double sigma) { return sigma * standard_normal(); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace slugbot

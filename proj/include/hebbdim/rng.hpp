#pragma once

#include <cstdint>
#include <random>

namespace hebbdim {

/// Caller-owned random stream. Copying an Rng snapshots its full state,
/// including the cached second normal deviate, so a copy replays the
/// same draws as the original.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_(engine_); }

  /// Random sign, +1 or -1 with equal probability.
  double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }

  /// Chi-square with `dof` degrees of freedom (any positive real dof).
  double chi_square(double dof) {
    std::chi_squared_distribution<double> dist(dof);
    return dist(engine_);
  }

  std::uint64_t bits() { return engine_(); }

  friend bool operator==(const Rng& a, const Rng& b) {
    return a.engine_ == b.engine_ && a.normal_ == b.normal_;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Deterministic seed derivation for (base, stream, substream) triples,
/// built from splitmix64 finalizers so neighbouring indices decorrelate.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                          std::uint64_t substream = 0);

}  // namespace hebbdim

#ifndef ADSG_RNG_HPP
#define ADSG_RNG_HPP

#include <cstdint>
#include <random>

namespace adsg {

/// Independent seeded streams for sample draws, block draws and snapshot
/// draws. Every solver form consumes them in the same pattern, so equal seeds
/// give equal draw sequences across the reference/efficient/stable solvers.
class RngStreams {
 public:
  explicit RngStreams(std::uint64_t seed)
      : seed_(seed), samples_(make(seed, 1)), blocks_(make(seed, 2)), snapshots_(make(seed, 3)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::size_t sample(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(samples_);
  }
  std::size_t block(std::size_t blocks) {
    return std::uniform_int_distribution<std::size_t>(0, blocks - 1)(blocks_);
  }
  /// Uniform in [0, 1) from the snapshot stream.
  double snapshot_uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(snapshots_); }

 private:
  static std::mt19937_64 make(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      stream, 0x9e3779b9u};
    return std::mt19937_64(seq);
  }

  std::uint64_t seed_;
  std::mt19937_64 samples_;
  std::mt19937_64 blocks_;
  std::mt19937_64 snapshots_;
};

}  // namespace adsg

#endif

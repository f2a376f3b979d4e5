#pragma once

#include <cstdint>
#include <random>

namespace seqembed {

/// Fixed stream tags: every component draws from its own stream derived from
/// the master seed, so changing one component's draw count never perturbs
/// another's sequence.
enum class RngComponent : std::uint64_t {
  kParamInit = 1,
  kSampler = 2,
  kNoise = 3,
  kDatagen = 4,
  kSplit = 5,
  kGradCheck = 6,
  kEval = 7,
};

/// Deterministic random stream. The engine is mt19937_64, whose raw output is
/// pinned by the standard; the distribution helpers below are hand-rolled
/// because std::*_distribution results are implementation-defined and would
/// break bit-reproducibility across standard libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  static RngStream derive(std::uint64_t master_seed, RngComponent component,
                          std::uint64_t index = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n); n must be >= 1. Unbiased via 128-bit
  /// fixed-point multiply plus rejection.
  std::size_t uniform_index(std::size_t n);

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used for seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace seqembed

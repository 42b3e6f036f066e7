#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace ccfnet {

/// Independent purposes that draw randomness. Each gets its own stream so that,
/// for example, changing the number of Monte-Carlo samples never perturbs the
/// layout drawn for the same seed.
enum class Stream : std::uint64_t {
  kLayout = 0x4c41594fULL,
  kFading = 0x46414449ULL,
  kBaseline = 0x4241534cULL,
  kSolver = 0x534f4c56ULL,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Mixes `base`, the stream tag and an index path into a new 64-bit seed.
std::uint64_t derive_seed(std::uint64_t base, Stream stream,
                          std::initializer_list<std::uint64_t> path = {});

/// mt19937_64 with hand-written conversions. The standard distributions are
/// implementation-defined, so they are avoided to keep draws identical across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller.
  double normal();

  /// Circularly-symmetric complex Gaussian with unit variance, CN(0, 1).
  std::complex<double> complex_normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ccfnet

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "qchain/common.hpp"

namespace qchain {

// Identifies one member of a family of statistically independent RNG
// streams. Derivation from (master_seed, stream_index) is a pure function,
// so any consumer can recreate its stream without coordination.
struct RngStreamSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_stream_seed(const RngStreamSpec& spec) {
  std::uint64_t s = spec.master_seed;
  std::uint64_t a = splitmix64(s);
  s = a ^ (0xD1B54A32D192ED03ull * (spec.stream_index + 1));
  return splitmix64(s);
}

}  // namespace detail

// Deterministic Gaussian stream. Normals are produced by Box-Muller over
// explicitly constructed uniforms so that the sequence depends only on the
// mt19937_64 output, not on library distribution internals.
class RngStream {
 public:
  explicit RngStream(const RngStreamSpec& spec)
      : engine_(detail::derive_stream_seed(spec)) {}

  double uniform() {  // in (0,1]
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace qchain

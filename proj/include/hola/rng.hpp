#pragma once

#include <cmath>
#include <cstdint>

namespace hola {

// Counter-based splittable random stream. A stream is keyed by
// (seed, chain, step); draws are a pure function of the key and a draw
// counter, so output is bit-reproducible under any execution order and
// independent streams never share state.
//
// The generator is SplitMix64 run in counter mode: the 64-bit finalizer is
// applied to key + counter * odd-constant. This passes standard statistical
// batteries and is the usual choice for embarrassingly parallel simulation.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t chain, std::uint64_t step) {
    key_ = finalize(seed + 0x9e3779b97f4a7c15ull);
    key_ = finalize(key_ ^ finalize(chain + 0xbf58476d1ce4e5b9ull));
    key_ = finalize(key_ ^ finalize(step + 0x94d049bb133111ebull));
  }

  std::uint64_t next_u64() {
    return finalize(key_ + (counter_++) * 0x9e3779b97f4a7c15ull);
  }

  // Uniform on (0, 1), never exactly 0 or 1.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; draws come in cached pairs.
  double next_normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

 private:
  static std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace hola

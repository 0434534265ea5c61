#ifndef POSECAL_RNG_H_
#define POSECAL_RNG_H_

#include <cstdint>
#include <utility>

namespace posecal {

// Counter-based generator. Output n of stream (seed, stream) is
//
//   mix64(key + (n + 1) * 0x9E3779B97F4A7C15),  key = mix64(seed ^ mix64(stream))
//
// with mix64 the SplitMix64 finalizer. Results depend only on integer
// arithmetic, so draws are identical across platforms and across any
// scheduling of streams onto threads.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  // Standard normal by the Box-Muller transform; consumes two uniforms per
  // pair of outputs.
  double normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace posecal

#endif  // POSECAL_RNG_H_

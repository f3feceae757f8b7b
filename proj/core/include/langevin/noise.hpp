#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace langevin {

// Counter-based pseudorandom stream.
//
// Output i is splitmix64_mix(key + i * GOLDEN), i.e. the splitmix64 sequence
// whose internal state starts at `key`.  The key folds together a global seed
// and a stream id, so (seed, stream_id) fully determines the sequence and
// independent stream ids give statistically independent streams.  There is no
// shared state anywhere; replaying a run replays the exact noise.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(mix(mix(seed) + stream_id)) {}

  std::uint64_t next_u64() {
    ++counter_;
    return mix(key_ + counter_ * 0x9E3779B97F4A7C15ull);
  }

  // Strictly inside (0,1): ((x >> 11) + 0.5) * 2^-53.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // One draw in {0, ..., n-1} via 128-bit multiply-shift.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Box-Muller, cosine branch only, so every call costs exactly two u64
  // draws.  Keeps the counter advance per Gaussian fixed, which the coupling
  // and budget accounting rely on.
  double gaussian() {
    double u1 = uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  void fill_gaussian(std::span<double> out) {
    for (double& v : out) v = gaussian();
  }

  std::vector<double> gaussian_vector(std::size_t n) {
    std::vector<double> out(n);
    fill_gaussian(out);
    return out;
  }

  // Total u64 draws consumed so far.
  std::uint64_t draws() const { return counter_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace langevin

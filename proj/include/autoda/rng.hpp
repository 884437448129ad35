#ifndef AUTODA_RNG_HPP
#define AUTODA_RNG_HPP

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>

namespace autoda {

/// Philox4x32-10 counter-based generator.
///
/// A stream is identified by a 64-bit key; the output is a pure function of
/// (key, counter), so independent streams for workers, batches and examples
/// are derived by hashing a path of integers into the key instead of sharing
/// or advancing one engine.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key = 0) : key_(key) {}

  /// Stream for `seed` refined by each element of `path`.
  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t key = mix(seed ^ 0x243f6a8885a308d3ULL);
    for (auto p : path) key = mix(key ^ mix(p + 0x9e3779b97f4a7c15ULL));
    return Rng(key);
  }

  /// Child stream; does not perturb this generator.
  Rng split(std::uint64_t index) const { return stream(key_, {index}); }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (avail_ == 0) refill();
    --avail_;
    return (static_cast<std::uint64_t>(block_[2 * avail_ + 1]) << 32) | block_[2 * avail_];
  }

  std::uint64_t key() const { return key_; }

  /// One Philox4x32-10 block.
  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> c,
                                             std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * c[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
      k[0] += 0x9E3779B9u;
      k[1] += 0xBB67AE85u;
    }
    return c;
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(*this);
  }

  /// Uniform double in [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(*this); }

  double gaussian() { return normal_(*this); }

  void gaussian(std::span<double> out) {
    for (auto &v : out) v = normal_(*this);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  void refill() {
    block_ = philox({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32), 0, 0},
                    {static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)});
    ++counter_;
    avail_ = 2;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  unsigned avail_ = 0;
  std::normal_distribution<double> normal_{};
};

}

#endif //AUTODA_RNG_HPP

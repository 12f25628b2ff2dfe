#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace fedsim {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a master seed plus up to three
// labels (purpose tag, round, client id). Used everywhere a component needs
// its own random stream so that results do not depend on scheduling order.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t tag,
                                    std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t s = splitmix64(master ^ 0x6a09e667f3bcc909ULL);
  s = splitmix64(s ^ tag);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  return s;
}

// Stream tags. Values are arbitrary but frozen: changing them changes every
// seeded result.
namespace streams {
inline constexpr std::uint64_t kInit = 0x01;
inline constexpr std::uint64_t kSelection = 0x02;
inline constexpr std::uint64_t kLocalTrain = 0x03;
inline constexpr std::uint64_t kFim = 0x04;
inline constexpr std::uint64_t kPool = 0x05;
inline constexpr std::uint64_t kGlobalShuffle = 0x06;
inline constexpr std::uint64_t kClientPerm = 0x07;
inline constexpr std::uint64_t kClassPerm = 0x08;
inline constexpr std::uint64_t kShardAssign = 0x09;
inline constexpr std::uint64_t kDataGen = 0x0a;
}  // namespace streams

// Deterministic random stream. mt19937_64 has a standard-specified output
// sequence and all distributions below are implemented by hand, so a given
// seed produces the same values on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform double in (0, 1]; safe as a log() argument.
  double uniform01_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the paired value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01_pos();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Unbiased uniform integer in [0, n). Rejection sampling on the top bits.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(below(static_cast<std::uint64_t>(n)));
  }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fedsim

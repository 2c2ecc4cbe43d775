#ifndef ZRP_RANDOM_HPP
#define ZRP_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <limits>

namespace zrp {

namespace detail {
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Counter-based generator: the i-th output is a bijective mix of
/// (key, i), so a stream is fully determined by its key and position.
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr explicit CounterRng(std::uint64_t key = 0) : key_(detail::mix64(key ^ 0x5851f42d4c957f2dULL)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return detail::mix64(key_ + counter_);
  }

  constexpr std::uint64_t position() const { return counter_ / 0x9e3779b97f4a7c15ULL; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Seed of replica `r` under `master_seed`.
constexpr std::uint64_t replica_seed(std::uint64_t master_seed, std::uint64_t r) {
  return detail::mix64(detail::mix64(master_seed) ^ (r * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
}

/// Uniform in the open interval (0,1).
template <class Rng>
double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform integer in [0, n).
template <class Rng>
std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const unsigned __int128 m = static_cast<unsigned __int128>(rng()) * n;
  return static_cast<std::uint64_t>(m >> 64);
}

template <class Rng>
double exponential(Rng& rng, double rate) {
  return -std::log(uniform_open(rng)) / rate;
}

}  // namespace zrp

#endif  // ZRP_RANDOM_HPP

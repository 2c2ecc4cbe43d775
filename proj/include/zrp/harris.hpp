#ifndef ZRP_HARRIS_HPP
#define ZRP_HARRIS_HPP

#include "zrp/env.hpp"
#include "zrp/random.hpp"

#include <cstdint>
#include <stdexcept>

namespace zrp {

/// One potential jump: at time t, site x, with mark u ∈ (0,1) and direction z.
struct HarrisEvent {
  double t = 0.0;
  std::int64_t x = 0;
  double u = 0.0;
  int z = 1;
};

/// Poisson stream of Harris events with intensity 1 per site: the next
/// event after `from` over `range` is at rate |range|, site uniform, z = +1
/// with probability p.
class EventStream {
 public:
  EventStream(std::uint64_t seed, double p) : rng_(seed), p_(p) {
    if (!(p > 0.5 && p <= 1.0)) throw std::invalid_argument("event stream: p must lie in (1/2, 1]");
  }

  HarrisEvent next(const Window& range, double from) {
    HarrisEvent e;
    const auto n = static_cast<std::uint64_t>(range.size());
    e.t = from + exponential(rng_, static_cast<double>(n));
    e.x = range.left + static_cast<std::int64_t>(uniform_index(rng_, n));
    e.u = uniform_open(rng_);
    e.z = p_ == 1.0 || uniform_open(rng_) < p_ ? 1 : -1;
    return e;
  }

  double p() const { return p_; }
  CounterRng& rng() { return rng_; }

 private:
  CounterRng rng_;
  double p_;
};

}  // namespace zrp

#endif  // ZRP_HARRIS_HPP

#ifndef ZRP_CONFIGURATION_HPP
#define ZRP_CONFIGURATION_HPP

#include "zrp/env.hpp"
#include "zrp/occupancy.hpp"

#include <string>
#include <vector>

namespace zrp {

enum class BoundaryMode { closed, reservoir };

/// Boundary treatment at each end of the window. A reservoir end holds the
/// ∞ sentinel at its boundary site, so it emits into the window at rate
/// (p or q)·α(boundary) and absorbs every arrival.
struct Boundaries {
  BoundaryMode left = BoundaryMode::closed;
  BoundaryMode right = BoundaryMode::closed;
  friend bool operator==(const Boundaries&, const Boundaries&) = default;
};

std::string to_string(BoundaryMode m);
BoundaryMode parse_boundary_mode(const std::string& s);

/// Occupation numbers in N ∪ {∞} over a window.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(Window window, Boundaries boundaries = {});
  Configuration(Window window, std::vector<Occupancy> occ, Boundaries boundaries = {});

  const Window& window() const { return window_; }
  const Boundaries& boundaries() const { return boundaries_; }
  Occupancy operator[](std::int64_t x) const { return occ_[static_cast<std::size_t>(x - window_.left)]; }
  Occupancy& operator[](std::int64_t x) { return occ_[static_cast<std::size_t>(x - window_.left)]; }
  Occupancy at(std::int64_t x) const;
  const std::vector<Occupancy>& occupancies() const { return occ_; }
  std::vector<Occupancy>& occupancies() { return occ_; }

  /// Σ occ over `range` ∩ window; +∞ if any site there is infinite.
  ExtendedInt mass(Window range) const;
  ExtendedInt mass() const { return mass(window_); }
  /// Number of finite particles over the whole window (∞ sites ignored).
  std::int64_t finite_mass() const;

  /// Pointwise η ≤ ξ on a common window.
  bool leq(const Configuration& other) const;

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  void apply_boundaries();

  Window window_;
  std::vector<Occupancy> occ_;
  Boundaries boundaries_;
};

/// F_{x0}(x, η): Σ_{y=x0+1}^{x} η(y) for x > x0, −Σ_{y=x}^{x0} η(y) for x ≤ x0.
ExtendedInt cumulative_F(std::int64_t x0, std::int64_t x, const Configuration& config);

/// η^{*,y}: ∞ on [L, y], 0 on (y, R], closed boundaries.
Configuration make_source(std::int64_t y, Window window);

/// Sites [a,b] with a pattern repeated from site `a` (e.g. {1,0} for …1,0,1,0…).
Configuration make_pattern(Window window, Window support, const std::vector<std::int64_t>& pattern,
                           Boundaries boundaries = {});

}  // namespace zrp

#endif  // ZRP_CONFIGURATION_HPP

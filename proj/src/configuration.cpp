#include "zrp/configuration.hpp"

#include <stdexcept>

namespace zrp {

std::string to_string(BoundaryMode m) { return m == BoundaryMode::closed ? "closed" : "reservoir"; }

BoundaryMode parse_boundary_mode(const std::string& s) {
  if (s == "closed") return BoundaryMode::closed;
  if (s == "reservoir") return BoundaryMode::reservoir;
  throw std::invalid_argument("unknown boundary mode '" + s + "'");
}

Configuration::Configuration(Window window, Boundaries boundaries)
    : window_(window), occ_(static_cast<std::size_t>(std::max<std::int64_t>(window.size(), 0))), boundaries_(boundaries) {
  if (window.empty()) throw std::invalid_argument("configuration: empty window");
  apply_boundaries();
}

Configuration::Configuration(Window window, std::vector<Occupancy> occ, Boundaries boundaries)
    : window_(window), occ_(std::move(occ)), boundaries_(boundaries) {
  if (window.empty()) throw std::invalid_argument("configuration: empty window");
  if (static_cast<std::int64_t>(occ_.size()) != window.size())
    throw std::invalid_argument("configuration: occupancy count does not match window");
  apply_boundaries();
}

void Configuration::apply_boundaries() {
  if (boundaries_.left == BoundaryMode::reservoir) occ_.front() = Occupancy::infinite();
  if (boundaries_.right == BoundaryMode::reservoir) occ_.back() = Occupancy::infinite();
}

Occupancy Configuration::at(std::int64_t x) const {
  if (!window_.contains(x)) throw std::out_of_range("configuration: site " + std::to_string(x) + " outside window");
  return (*this)[x];
}

ExtendedInt Configuration::mass(Window range) const {
  const std::int64_t lo = std::max(range.left, window_.left);
  const std::int64_t hi = std::min(range.right, window_.right);
  std::int64_t s = 0;
  for (std::int64_t x = lo; x <= hi; ++x) {
    const Occupancy o = (*this)[x];
    if (o.is_infinite()) return ExtendedInt::plus_infinity();
    s += o.count();
  }
  return s;
}

std::int64_t Configuration::finite_mass() const {
  std::int64_t s = 0;
  for (Occupancy o : occ_)
    if (!o.is_infinite()) s += o.count();
  return s;
}

bool Configuration::leq(const Configuration& other) const {
  if (!(window_ == other.window_)) throw std::invalid_argument("configuration: windows differ");
  for (std::size_t i = 0; i < occ_.size(); ++i)
    if (occ_[i] > other.occ_[i]) return false;
  return true;
}

ExtendedInt cumulative_F(std::int64_t x0, std::int64_t x, const Configuration& config) {
  if (x > x0) return config.mass(Window{x0 + 1, x});
  return -config.mass(Window{x, x0});
}

Configuration make_source(std::int64_t y, Window window) {
  if (!window.contains(y)) throw std::out_of_range("make_source: y outside window");
  Configuration c(window);
  for (std::int64_t x = window.left; x <= y; ++x) c[x] = Occupancy::infinite();
  return c;
}

Configuration make_pattern(Window window, Window support, const std::vector<std::int64_t>& pattern,
                           Boundaries boundaries) {
  if (pattern.empty()) throw std::invalid_argument("make_pattern: empty pattern");
  Configuration c(window, boundaries);
  const std::int64_t lo = std::max(window.left, support.left);
  const std::int64_t hi = std::min(window.right, support.right);
  const auto period = static_cast<std::int64_t>(pattern.size());
  for (std::int64_t x = lo; x <= hi; ++x) {
    if ((x == window.left && boundaries.left == BoundaryMode::reservoir) ||
        (x == window.right && boundaries.right == BoundaryMode::reservoir))
      continue;
    const std::int64_t k = ((x - support.left) % period + period) % period;
    c[x] = Occupancy(pattern[static_cast<std::size_t>(k)]);
  }
  return c;
}

}  // namespace zrp

#ifndef ZRP_STATS_HPP
#define ZRP_STATS_HPP

#include "zrp/measures.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace zrp {

/// Sample mean with standard error; the acceptance band is mean ± 3·SE.
struct Band {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;

  double lo() const { return mean - 3.0 * se; }
  double hi() const { return mean + 3.0 * se; }
  bool contains(double x) const { return lo() <= x && x <= hi(); }
  nlohmann::json to_json() const;
};

Band band(const std::vector<double>& samples);

/// Counts of occupancy values 0, 1, 2, … (∞ is not representable).
class Histogram {
 public:
  void add(std::int64_t n, std::int64_t weight = 1);
  void merge(const Histogram& other);
  std::int64_t total() const { return total_; }
  std::int64_t count(std::int64_t n) const;
  double frequency(std::int64_t n) const;
  std::int64_t max_value() const { return static_cast<std::int64_t>(counts_.size()) - 1; }
  double mean() const;

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

/// ½ Σ_n |ν(n) − target(n)| with the target tail beyond the histogram included.
double total_variation(const Histogram& h, const std::vector<double>& target_pmf, double target_tail);
double total_variation(const Histogram& h, const ThetaMarginal& target);
/// Mixture target: average of the given marginals.
double total_variation(const Histogram& h, const std::vector<ThetaMarginal>& targets);
double total_variation(const Histogram& a, const Histogram& b);

/// Least-squares slope of y against x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
/// Hex FNV-1a of the canonical (sorted-key, compact) JSON dump.
std::string config_hash(const nlohmann::json& cfg);

}  // namespace zrp

#endif  // ZRP_STATS_HPP

#ifndef ZRP_TESTS_SUPPORT_HPP
#define ZRP_TESTS_SUPPORT_HPP

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace testing {

/// Pearson chi-square p-value of observed counts against expected
/// probabilities; cells with expected count below 5 are pooled into the tail.
inline double chi_square_pvalue(const std::vector<std::int64_t>& counts, const std::vector<double>& probs) {
  double total = 0.0;
  for (std::int64_t c : counts) total += static_cast<double>(c);
  double stat = 0.0, obs_used = 0.0, exp_used = 0.0;
  int cells = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double exp = probs[i] * total;
    if (exp < 5.0) continue;
    const double obs = i < counts.size() ? static_cast<double>(counts[i]) : 0.0;
    stat += (obs - exp) * (obs - exp) / exp;
    obs_used += obs;
    exp_used += exp;
    ++cells;
  }
  const double rest_exp = total - exp_used, rest_obs = total - obs_used;
  if (rest_exp > 1e-9 * total) {
    stat += (rest_obs - rest_exp) * (rest_obs - rest_exp) / rest_exp;
    ++cells;
  }
  const boost::math::chi_squared dist(cells - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Asymptotic Kolmogorov–Smirnov p-value of a sample against a continuous cdf.
inline double ks_pvalue(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) q += 2.0 * (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(q, 0.0, 1.0);
}

}  // namespace testing

#endif  // ZRP_TESTS_SUPPORT_HPP

#include "zrp/stats.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace zrp {

nlohmann::json Band::to_json() const {
  return {{"mean", mean}, {"se", se}, {"n", n}, {"lo", lo()}, {"hi", hi()}};
}

Band band(const std::vector<double>& samples) {
  Band b;
  b.n = samples.size();
  if (samples.empty()) return b;
  b.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(b.n);
  if (b.n > 1) {
    double ss = 0.0;
    for (double s : samples) ss += (s - b.mean) * (s - b.mean);
    b.se = std::sqrt(ss / static_cast<double>(b.n - 1) / static_cast<double>(b.n));
  }
  return b;
}

void Histogram::add(std::int64_t n, std::int64_t weight) {
  if (n < 0) throw std::invalid_argument("histogram: negative value");
  if (static_cast<std::size_t>(n) >= counts_.size()) counts_.resize(static_cast<std::size_t>(n) + 1, 0);
  counts_[static_cast<std::size_t>(n)] += weight;
  total_ += weight;
}

void Histogram::merge(const Histogram& other) {
  for (std::size_t n = 0; n < other.counts_.size(); ++n)
    if (other.counts_[n] != 0) add(static_cast<std::int64_t>(n), other.counts_[n]);
}

std::int64_t Histogram::count(std::int64_t n) const {
  return n >= 0 && static_cast<std::size_t>(n) < counts_.size() ? counts_[static_cast<std::size_t>(n)] : 0;
}

double Histogram::frequency(std::int64_t n) const {
  return total_ == 0 ? 0.0 : static_cast<double>(count(n)) / static_cast<double>(total_);
}

double Histogram::mean() const {
  double s = 0.0;
  for (std::size_t n = 0; n < counts_.size(); ++n) s += static_cast<double>(n) * static_cast<double>(counts_[n]);
  return total_ == 0 ? 0.0 : s / static_cast<double>(total_);
}

double total_variation(const Histogram& h, const std::vector<double>& target_pmf, double target_tail) {
  if (h.total() == 0) throw std::invalid_argument("total_variation: empty histogram");
  // target_pmf covers 0..target_pmf.size()-1; target_tail is the mass beyond.
  const std::int64_t top = std::max<std::int64_t>(h.max_value(), static_cast<std::int64_t>(target_pmf.size()) - 1);
  double tv = 0.0;
  for (std::int64_t n = 0; n <= top; ++n) {
    const double t = static_cast<std::size_t>(n) < target_pmf.size() ? target_pmf[static_cast<std::size_t>(n)] : 0.0;
    tv += std::abs(h.frequency(n) - t);
  }
  return 0.5 * (tv + target_tail);
}

namespace {

std::int64_t pmf_span(const ThetaMarginal& m, std::int64_t at_least) {
  std::int64_t n = std::max<std::int64_t>(at_least, 0);
  while (m.survival(n) > 1e-13 && n < 1'000'000) ++n;
  return n;
}

}  // namespace

double total_variation(const Histogram& h, const ThetaMarginal& target) {
  return total_variation(h, std::vector<ThetaMarginal>{target});
}

double total_variation(const Histogram& h, const std::vector<ThetaMarginal>& targets) {
  if (targets.empty()) throw std::invalid_argument("total_variation: no target");
  std::int64_t top = h.max_value();
  for (const ThetaMarginal& m : targets) top = std::max(top, pmf_span(m, h.max_value()));
  std::vector<double> pmf(static_cast<std::size_t>(top) + 1, 0.0);
  double tail = 0.0;
  for (const ThetaMarginal& m : targets) {
    for (std::int64_t n = 0; n <= top; ++n) pmf[static_cast<std::size_t>(n)] += m.pmf(n) / static_cast<double>(targets.size());
    tail += m.survival(top) / static_cast<double>(targets.size());
  }
  return total_variation(h, pmf, tail);
}

double total_variation(const Histogram& a, const Histogram& b) {
  if (a.total() == 0 || b.total() == 0) throw std::invalid_argument("total_variation: empty histogram");
  const std::int64_t top = std::max(a.max_value(), b.max_value());
  double tv = 0.0;
  for (std::int64_t n = 0; n <= top; ++n) tv += std::abs(a.frequency(n) - b.frequency(n));
  return 0.5 * tv;
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols_slope: need two or more points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("ols_slope: constant abscissa");
  return sxy / sxx;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const nlohmann::json& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.dump())));
  return buf;
}

}  // namespace zrp

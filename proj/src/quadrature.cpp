#include "zrp/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

namespace zrp {

namespace {

GaussRule compute_rule(int n) {
  GaussRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes(i) = x;
    rule.weights(i) = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

double panel(const std::function<double(double)>& f, double a, double b, const GaussRule& rule) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double s = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) s += rule.weights(i) * f(mid + half * rule.nodes(i));
  return half * s;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b, int panels, int order) {
  const GaussRule& rule = gauss_legendre(order);
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int k = 0; k < panels; ++k) s += panel(f, a + k * h, a + (k + 1) * h, rule);
  return s;
}

GradedIntegral graded_integral(const std::function<double(double)>& f, double lo, double hi, int total_nodes,
                               double blowup) {
  constexpr int kOrder = 16;
  const GaussRule& rule = gauss_legendre(kOrder);
  const int panels = std::max(total_nodes / kOrder, 4);
  const int upper_panels = panels / 4;
  const double width = hi - lo;

  GradedIntegral out;
  // Upper half: uniform panels.
  const double h = 0.5 * width / upper_panels;
  for (int k = 0; k < upper_panels; ++k) out.value += panel(f, lo + 0.5 * width + k * h, lo + 0.5 * width + (k + 1) * h, rule);
  out.panels_used = upper_panels;

  // Lower half: dyadic panels [lo + w 2^-(j+1), lo + w 2^-j], down to a
  // relative width of 2^-kDepth.
  constexpr int kDepth = 44;
  constexpr int kSpan = 10;
  std::vector<double> contrib;
  int small_run = 0;
  for (int j = 1; j <= kDepth; ++j) {
    const double b = lo + width * std::ldexp(1.0, -j);
    const double a = lo + width * std::ldexp(1.0, -j - 1);
    const double c = panel(f, a, b, rule);
    contrib.push_back(c);
    ++out.panels_used;
    out.value += c;
    if (!std::isfinite(out.value) || out.value > blowup) {
      out.divergent = true;
      return out;
    }
    if (j >= panels - upper_panels && c <= 1e-17 * out.value) {
      if (++small_run >= 3) return out;
    } else {
      small_run = 0;
    }
  }
  // Contributions still matter at the finest panel: estimate their decay
  // ratio over the last kSpan panels and either extrapolate geometrically or
  // declare divergence when the decay has stalled.
  const double last = contrib.back();
  const double earlier = contrib[contrib.size() - 1 - kSpan];
  if (!(last > 0.0) || !(earlier > 0.0)) return out;
  const double ratio = std::pow(last / earlier, 1.0 / kSpan);
  if (ratio >= 0.999) {
    out.divergent = true;
    return out;
  }
  out.value += last * ratio / (1.0 - ratio);
  if (out.value > blowup) out.divergent = true;
  return out;
}

}  // namespace zrp

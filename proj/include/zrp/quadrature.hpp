#ifndef ZRP_QUADRATURE_HPP
#define ZRP_QUADRATURE_HPP

#include <Eigen/Dense>

#include <functional>

namespace zrp {

/// Gauss–Legendre rule on [-1,1].
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Nodes/weights of the n-point Gauss–Legendre rule (Newton on P_n).
const GaussRule& gauss_legendre(int n);

/// Composite Gauss–Legendre on [a,b] with `panels` equal panels.
double integrate(const std::function<double(double)>& f, double a, double b, int panels, int order = 16);

struct GradedIntegral {
  double value = 0.0;
  bool divergent = false;
  int panels_used = 0;
};

/// Integral over [lo,hi] of a nonnegative integrand that may be singular at
/// `lo`. The upper half is covered by uniform panels; the lower half by
/// dyadically shrinking panels toward `lo`, continued until panel
/// contributions become negligible. Declares divergence when partial sums
/// exceed `blowup` or when contributions have stopped decaying at the
/// finest dyadic panel; otherwise the remainder is extrapolated
/// geometrically.
GradedIntegral graded_integral(const std::function<double(double)>& f, double lo, double hi,
                               int total_nodes = 512, double blowup = 1e12);

}  // namespace zrp

#endif  // ZRP_QUADRATURE_HPP

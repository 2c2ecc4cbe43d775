#ifndef ZRP_HYDRO_HPP
#define ZRP_HYDRO_HPP

#include "zrp/measures.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <functional>
#include <iosfwd>
#include <vector>

namespace zrp {

/// Cell averages on a uniform grid: cell i covers [x_min + i dx, x_min + (i+1) dx].
struct GridProfile {
  double x_min = 0.0;
  double dx = 1.0;
  Eigen::VectorXd rho;
  double time = 0.0;

  Eigen::Index size() const { return rho.size(); }
  double x_max() const { return x_min + dx * static_cast<double>(rho.size()); }
  double center(Eigen::Index i) const { return x_min + (static_cast<double>(i) + 0.5) * dx; }
  double mass() const { return dx * rho.sum(); }
};

/// Cell averages of `fn` on [x_min, x_max] with `cells` cells, using
/// `samples` midpoint samples per cell.
GridProfile cell_average(const std::function<double(double)>& fn, double x_min, double x_max, Eigen::Index cells,
                         int samples = 64);

/// ρ_0 = values[j] on (breakpoints[j-1], breakpoints[j]).
struct PiecewiseConstant {
  std::vector<double> breakpoints;
  std::vector<double> values;  // breakpoints.size() + 1 entries

  double operator()(double x) const;
  /// Exact average over [a, b].
  double average(double a, double b) const;
  GridProfile discretize(double x_min, double x_max, Eigen::Index cells) const;

  static PiecewiseConstant from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Exact-Riemann numerical flux: min of f over [ρ_l, ρ_r] when ρ_l ≤ ρ_r,
/// max over [ρ_r, ρ_l] otherwise (table nodes plus endpoints).
double godunov_flux(const FluxFunction& f, double rho_left, double rho_right);

struct EvolveStats {
  int steps = 0;
  double dt = 0.0;
  double influx = 0.0;   // ∫ flux through the left boundary
  double outflux = 0.0;  // ∫ flux through the right boundary
};

/// Explicit conservative Godunov update up to time profile.time + T with
/// zero-gradient outflow boundaries. The step is cfl·dx / (1.1·max slope).
GridProfile evolve(const FluxFunction& f, const GridProfile& profile, double T, double cfl = 0.9,
                   EvolveStats* stats = nullptr);

struct RiemannValue {
  double value;  // ρ(ξ+)
  double lower;  // inf of the optimizer set
  double upper;  // sup of the optimizer set
};

/// Entropy solution of the Riemann problem at ξ = x/t: the optimizer set
/// of r ↦ f(r) − ξ r (argmax over [ρ_r, ρ_l] when ρ_l ≥ ρ_r, argmin over
/// [ρ_l, ρ_r] otherwise).
RiemannValue riemann_exact(const FluxFunction& f, double rho_l, double rho_r, double xi);

struct SourceLimits {
  double lower;
  double upper;
};

/// inf and sup of argmax over [0, ρ] of r ↦ f(r) − (u/t) r.
SourceLimits riemann_source_limits(const FluxFunction& f, double rho, double t, double u);

/// dx Σ |a − b| over a common grid.
double l1_distance(const GridProfile& a, const GridProfile& b);
/// Total variation Σ |ρ_{i+1} − ρ_i|.
double total_variation(const GridProfile& p);

void write_profile_csv(std::ostream& out, const GridProfile& p);
/// Reads x,rho rows with uniformly spaced cell centres.
GridProfile read_profile_csv(std::istream& in);

}  // namespace zrp

#endif  // ZRP_HYDRO_HPP

#include "zrp/hydro.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace zrp;

namespace {

const FluxFunction& mm1() {
  static const FluxFunction f = [] {
    FluxFunction::Options opts;
    opts.rho_max = 4.0;
    return FluxFunction::tabulate(RateFunction::indicator(), DisorderLaw::dirac(1.0), 1.0, 1.0, opts);
  }();
  return f;
}

// f(ρ) = ρ/(1+ρ) below 1, 1/2 above.
const FluxFunction& slow_site() {
  static const FluxFunction f = [] {
    FluxFunction::Options opts;
    opts.rho_max = 4.0;
    return FluxFunction::tabulate(RateFunction::indicator(), DisorderLaw::dirac(1.0), 0.5, 1.0, opts);
  }();
  return f;
}

// Characteristics for ρ/(1+ρ) with data (1, 0): ρ = ξ^{-1/2} − 1 on [1/4, 1].
double rarefaction(double xi) {
  if (xi <= 0.25) return 1.0;
  if (xi >= 1.0) return 0.0;
  return 1.0 / std::sqrt(xi) - 1.0;
}

GridProfile riemann_grid(double rl, double rr, double a, double b, double dx) {
  const PiecewiseConstant pc{{0.0}, {rl, rr}};
  return pc.discretize(a, b, static_cast<Eigen::Index>(std::llround((b - a) / dx)));
}

}  // namespace

TEST_SUITE("hydro") {

TEST_CASE("piecewise-constant data") {
  const PiecewiseConstant pc{{0.0, 0.5}, {1.0, 0.2, 3.0}};
  CHECK(pc(-1.0) == 1.0);
  CHECK(pc(0.25) == 0.2);
  CHECK(pc(0.75) == 3.0);
  CHECK(pc.average(-0.5, 1.0) == doctest::Approx((0.5 * 1.0 + 0.5 * 0.2 + 0.5 * 3.0) / 1.5).epsilon(1e-14));
  const GridProfile g = pc.discretize(-1.0, 1.0, 8);
  CHECK(g.mass() == doctest::Approx(1.0 + 0.1 + 1.5).epsilon(1e-14));
  CHECK(PiecewiseConstant::from_json(pc.to_json()).values == pc.values);
  CHECK_THROWS(PiecewiseConstant::from_json(nlohmann::json{{"breakpoints", {0.0}}, {"values", {1.0}}}));
}

TEST_CASE("Godunov flux") {
  for (double r : {0.0, 0.3, 1.0, 2.5}) CHECK(godunov_flux(mm1(), r, r) == doctest::Approx(mm1()(r)).epsilon(1e-14));
  // Brute-force min/max over a 10^4-point grid.
  for (const FluxFunction* f : {&mm1(), &slow_site()})
    for (auto [rl, rr] : {std::pair{0.2, 1.7}, std::pair{1.7, 0.2}, std::pair{0.0, 3.5}, std::pair{3.0, 0.9}}) {
      double lo = INFINITY, hi = -INFINITY;
      for (int i = 0; i <= 10000; ++i) {
        const double v = (*f)(std::min(rl, rr) + std::abs(rr - rl) * i / 10000.0);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      const double g = godunov_flux(*f, rl, rr);
      CHECK(g == doctest::Approx(rl <= rr ? lo : hi).epsilon(1e-12));
      CHECK(g == doctest::Approx((*f)(rl)).epsilon(1e-12));
    }
  CHECK(godunov_flux(slow_site(), 1.5, 3.0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("uniform profiles are stationary") {
  for (double rho : {0.0, 0.5, 2.0}) {
    const GridProfile p0 = PiecewiseConstant{{}, {rho}}.discretize(-1.0, 1.0, 200);
    const GridProfile p1 = evolve(mm1(), p0, 2.0);
    CHECK((p1.rho.array() - rho).abs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("rarefaction value at x/t = 4/9") {
  CHECK(std::abs(riemann_exact(mm1(), 1.0, 0.0, 4.0 / 9.0).value - 0.5) < 1e-6);
  const GridProfile p = evolve(mm1(), riemann_grid(1.0, 0.0, -0.5, 1.5, 1.0 / 1800.0), 1.0);
  const auto i = static_cast<Eigen::Index>(std::floor((4.0 / 9.0 - p.x_min) / p.dx));
  CHECK(std::abs(p.rho(i) - 0.5) < 0.01);
}

TEST_CASE("max principle, total variation and mass balance") {
  const PiecewiseConstant data{{-0.3, 0.0, 0.2, 0.6}, {0.4, 2.5, 0.1, 1.2, 0.0}};
  for (const FluxFunction* f : {&mm1(), &slow_site()}) {
    GridProfile p = data.discretize(-1.0, 1.5, 500);
    const double lo = p.rho.minCoeff(), hi = p.rho.maxCoeff();
    double tv = total_variation(p);
    for (int step = 0; step < 40; ++step) {
      EvolveStats st;
      const GridProfile next = evolve(*f, p, 0.01, 0.9, &st);
      CHECK(next.rho.minCoeff() >= lo - 1e-14);
      CHECK(next.rho.maxCoeff() <= hi + 1e-14);
      const double tv_next = total_variation(next);
      CHECK(tv_next <= tv + 1e-12);
      CHECK(std::abs(next.mass() - p.mass() - (st.influx - st.outflux)) < 1e-13);
      CHECK(next.time == doctest::Approx(p.time + 0.01).epsilon(1e-12));
      tv = tv_next;
      p = next;
    }
  }
  CHECK_THROWS(evolve(mm1(), riemann_grid(1.0, 0.0, 0.0, 1.0, 0.01), 1.0, 1.5));
}

TEST_CASE("L1 self-convergence") {
  std::vector<GridProfile> levels;
  for (int n : {100, 200, 400, 800, 1600}) levels.push_back(evolve(mm1(), riemann_grid(1.0, 0.0, -0.5, 1.5, 2.0 / n), 1.0));
  std::vector<double> err;
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    const GridProfile& c = levels[k];
    const GridProfile& f = levels[k + 1];
    double e = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) e += c.dx * std::abs(c.rho(i) - 0.5 * (f.rho(2 * i) + f.rho(2 * i + 1)));
    err.push_back(e);
  }
  for (std::size_t k = 0; k + 1 < err.size(); ++k) CHECK(err[k] / err[k + 1] >= 1.3);
}

TEST_CASE("exact rarefaction against characteristics and the scheme") {
  for (double xi : {-0.5, 0.1, 0.25, 0.3, 0.5, 0.8, 0.99, 1.2}) {
    const RiemannValue r = riemann_exact(mm1(), 1.0, 0.0, xi);
    CHECK(std::abs(r.value - rarefaction(xi)) < 1e-6);
    CHECK(std::abs(r.lower - r.upper) < 1e-6);
  }
  const GridProfile p = evolve(mm1(), riemann_grid(1.0, 0.0, -0.5, 1.5, 1.0 / 800.0), 1.0);
  const GridProfile exact = cell_average([](double x) { return rarefaction(x); }, p.x_min, p.x_max(), p.size(), 64);
  CHECK(l1_distance(p, exact) < 0.01);
}

TEST_CASE("continuity and splitting at the origin for source data") {
  // ρ ≤ ρ_c: both one-sided limits equal ρ at ξ = 0.
  for (double rho : {0.3, 0.9}) {
    const RiemannValue r = riemann_exact(slow_site(), rho, 0.0, 0.0);
    CHECK(std::abs(r.lower - rho) < 1e-6);
    CHECK(std::abs(r.upper - rho) < 1e-6);
    const SourceLimits s = riemann_source_limits(slow_site(), rho, 1.0, 0.0);
    CHECK(std::abs(s.lower - rho) < 1e-6);
    CHECK(std::abs(s.upper - rho) < 1e-6);
  }
  // ρ > ρ_c: the limits split into ρ_c and ρ.
  for (double rho : {1.5, 3.0}) {
    const RiemannValue r = riemann_exact(slow_site(), rho, 0.0, 0.0);
    CHECK(std::abs(r.lower - 1.0) < 1e-6);
    CHECK(std::abs(r.upper - rho) < 1e-6);
    const SourceLimits s = riemann_source_limits(slow_site(), rho, 2.0, 0.0);
    CHECK(std::abs(s.lower - 1.0) < 1e-6);
    CHECK(std::abs(s.upper - rho) < 1e-6);
  }
}

TEST_CASE("source limits against brute-force argmax") {
  for (double slope : {0.05, 0.2, 0.25, 0.6, 1.5, 3.0}) {
    const double rho = 3.0;
    double best = -INFINITY, arg_lo = 0.0, arg_hi = 0.0;
    for (int i = 0; i <= 100000; ++i) {
      const double r = rho * i / 100000.0;
      const double v = slow_site().exact(r) - slope * r;
      if (v > best + 1e-12) {
        best = v;
        arg_lo = arg_hi = r;
      } else if (v > best - 1e-12) {
        arg_hi = r;
      }
    }
    const SourceLimits s = riemann_source_limits(slow_site(), rho, 1.0, slope);
    CAPTURE(slope);
    CHECK(std::abs(s.lower - arg_lo) < 1e-3);
    CHECK(std::abs(s.upper - arg_hi) < 1e-3);
  }
  const SourceLimits s = riemann_source_limits(mm1(), 2.0, 1.0, 1.1 * mm1().max_slope());
  CHECK(s.lower == 0.0);
  CHECK(s.upper == 0.0);
}

TEST_CASE("shock from an empty left state") {
  for (double rr : {0.5, 2.0}) {
    const double speed = (mm1()(rr) - mm1()(0.0)) / rr;
    CHECK(riemann_exact(mm1(), 0.0, rr, speed - 0.01).value == doctest::Approx(0.0));
    CHECK(riemann_exact(mm1(), 0.0, rr, speed + 0.01).value == doctest::Approx(rr).epsilon(1e-6));
    const RiemannValue at = riemann_exact(mm1(), 0.0, rr, speed);
    CHECK(at.lower == doctest::Approx(0.0));
    CHECK(at.upper == doctest::Approx(rr).epsilon(1e-6));
  }
}

TEST_CASE("profile CSV round trip") {
  const GridProfile p = PiecewiseConstant{{0.0}, {1.0, 0.25}}.discretize(-1.0, 1.0, 16);
  std::stringstream ss;
  write_profile_csv(ss, p);
  CHECK(ss.str().rfind("x,rho\n", 0) == 0);
  const GridProfile back = read_profile_csv(ss);
  CHECK(back.size() == p.size());
  CHECK(back.x_min == doctest::Approx(p.x_min).epsilon(1e-12));
  CHECK(back.dx == doctest::Approx(p.dx).epsilon(1e-12));
  CHECK((back.rho - p.rho).cwiseAbs().maxCoeff() < 1e-15);
}

}  // TEST_SUITE

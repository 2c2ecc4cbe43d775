#include "support.hpp"

#include "zrp/measures.hpp"

#include <doctest.h>

#include <cmath>

using namespace zrp;

namespace {

const DisorderLaw& linear_law() {
  static const DisorderLaw law = DisorderLaw::power_density(0.5, 1.0, 1.0);
  return law;
}

// Composite Simpson rule, independent of the library quadrature.
double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Brute-force Z and R by direct summation of β^n / g(n)!.
std::pair<double, double> brute_series(const RateFunction& g, double beta, int terms) {
  double z = 0.0, m = 0.0, w = 1.0;
  for (int n = 0; n < terms; ++n) {
    if (n > 0) w *= beta / g(static_cast<std::int64_t>(n));
    z += w;
    m += n * w;
  }
  return {z, m / z};
}

}  // namespace

TEST_SUITE("measures") {

TEST_CASE("rate function validation") {
  CHECK_THROWS(RateFunction({0.5, 1.0}));
  CHECK_THROWS(RateFunction({0.0, 0.0, 1.0}));
  CHECK_THROWS(RateFunction({0.0, 0.8, 0.6, 1.0}));
  CHECK_THROWS(RateFunction({0.0, 0.5, 0.9}));
  const RateFunction g = RateFunction::normalized({0.0, 1.0, 2.0});
  CHECK(g(1) == 0.5);
  CHECK(g(7) == 1.0);
  CHECK(g(Occupancy::infinite()) == 1.0);
}

TEST_CASE("geometric marginal") {
  const ThetaMarginal m = marginal(RateFunction::indicator(), 0.5);
  CHECK(m.Z() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.mean() == doctest::Approx(1.0).epsilon(1e-12));
  for (int n = 0; n < 40; ++n) CHECK(m.pmf(n) == doctest::Approx(std::pow(0.5, n + 1)).epsilon(1e-12));
}

TEST_CASE("zero fugacity is a point mass at zero") {
  const ThetaMarginal m = marginal(RateFunction::indicator(), 0.0);
  CHECK(m.Z() == 1.0);
  CHECK(m.mean() == 0.0);
  CHECK(m.pmf(0) == 1.0);
  CHECK(m.pmf(1) == 0.0);
  CounterRng rng(3);
  for (int i = 0; i < 1000; ++i) CHECK(sample_marginal(m, rng) == 0);
}

TEST_CASE("marginal against brute-force series") {
  const RateFunction g({0.0, 0.5, 1.0});
  const ThetaMarginal m = marginal(g, 0.4);
  const auto [z, r] = brute_series(g, 0.4, 10000);
  CHECK(std::abs(m.Z() - z) < 1e-12);
  CHECK(std::abs(m.mean() - r) < 1e-12);
}

TEST_CASE("marginal domain errors") {
  CHECK_THROWS_AS(marginal(RateFunction::indicator(), 1.0), std::domain_error);
  CHECK_THROWS_AS(marginal(RateFunction::indicator(), -0.1), std::domain_error);
  CHECK_THROWS_AS(marginal(RateFunction::indicator(), 1.5), std::domain_error);
}

TEST_CASE("normalization, mean consistency and product form") {
  for (const RateFunction& g : {RateFunction::indicator(), RateFunction({0.0, 0.5, 1.0}), RateFunction({0.0, 0.2, 0.7, 0.9, 1.0})}) {
    for (double beta : {0.01, 0.2, 0.5, 0.8, 0.95, 0.999}) {
      CAPTURE(beta);
      const ThetaMarginal m = marginal(g, beta);
      double s = 0.0, mean = 0.0;
      for (std::int64_t n = 0; n <= m.tail_cut(); ++n) {
        s += m.pmf(n);
        mean += static_cast<double>(n) * m.pmf(n);
      }
      CHECK(std::abs(s + m.survival(m.tail_cut()) - 1.0) < 1e-12);
      CHECK(m.survival(m.tail_cut()) < 1e-12);
      // The mean sum stops at the tail cut; the remainder is bounded separately.
      CHECK(std::abs(mean - m.mean()) < 1e-10 * std::max(1.0, m.mean()) + 1e-9 * (m.tail_cut() + 1.0 / (1.0 - beta)));
      for (std::int64_t n = 1; n < 30; ++n) CHECK(m.pmf(n) / m.pmf(n - 1) == doctest::Approx(beta / g(n)).epsilon(1e-12));
    }
  }
}

TEST_CASE("marginal sampling") {
  const ThetaMarginal m = marginal(RateFunction::indicator(), 0.5);
  CounterRng rng(11);
  const int n = 1000000;
  std::vector<std::int64_t> counts;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::int64_t k = sample_marginal(m, rng);
    if (k >= static_cast<std::int64_t>(counts.size())) counts.resize(static_cast<std::size_t>(k) + 1, 0);
    ++counts[static_cast<std::size_t>(k)];
    sum += static_cast<double>(k);
  }
  CHECK(std::abs(sum / n - 1.0) < 0.01);
  std::vector<double> probs;
  for (std::int64_t k = 0; k <= m.tail_cut(); ++k) probs.push_back(m.pmf(k));
  CHECK(testing::chi_square_pvalue(counts, probs) > 0.001);
}

TEST_CASE("saturating marginal sampling") {
  const ThetaMarginal m = marginal(RateFunction({0.0, 0.5, 1.0}), 0.4);
  CounterRng rng(12);
  std::vector<std::int64_t> counts;
  for (int i = 0; i < 1000000; ++i) {
    const auto k = static_cast<std::size_t>(sample_marginal(m, rng));
    if (k >= counts.size()) counts.resize(k + 1, 0);
    ++counts[k];
  }
  std::vector<double> probs;
  for (std::int64_t k = 0; k <= m.tail_cut(); ++k) probs.push_back(m.pmf(k));
  CHECK(testing::chi_square_pvalue(counts, probs) > 0.001);
}

TEST_CASE("quantile is nondecreasing in U") {
  const ThetaMarginal m = marginal(RateFunction({0.0, 0.3, 1.0}), 0.7);
  std::int64_t last = 0;
  for (int i = 1; i < 10000; ++i) {
    const std::int64_t k = m.quantile(i / 10000.0);
    CHECK(k >= last);
    last = k;
  }
}

TEST_CASE("homogeneous density map reduces to R") {
  const DisorderLaw one = DisorderLaw::dirac(1.0);
  for (double beta : {0.0, 0.1, 0.5, 0.9}) CHECK(rbar(RateFunction::indicator(), one, beta) == doctest::Approx(beta / (1.0 - beta)).epsilon(1e-12));
  CHECK(std::isinf(rho_critical(RateFunction::indicator(), one)));
}

TEST_CASE("density map for the linear law") {
  const RateFunction g = RateFunction::indicator();
  const double quarter = rbar(g, linear_law(), 0.25);
  // ∫ 8(a-1/2) (1/4)/(a-1/4) da over [1/2,1] = 1 - ln(3)/2.
  CHECK(std::abs(quarter - (1.0 - 0.5 * std::log(3.0))) < 1e-6);
  const double fine = simpson([](double a) { return 8.0 * (a - 0.5) * 0.25 / (a - 0.25); }, 0.5, 1.0, 200000);
  CHECK(std::abs(quarter - fine) < 1e-6);
  CHECK(std::abs(rbar(g, linear_law(), 0.5) - 2.0) < 1e-6);
  CHECK(std::abs(rho_critical(g, linear_law()) - 2.0) < 1e-6);
  CHECK_THROWS(rbar(g, linear_law(), 0.6));
}

TEST_CASE("divergent density map") {
  // Uniform law on [1/2,1]: R̄(1/2) = ∫ 2·(1/2)/(a-1/2) da diverges.
  CHECK(std::isinf(rbar(RateFunction::indicator(), DisorderLaw::power_density(0.5, 1.0, 0.0), 0.5)));
  CHECK(std::isinf(rho_critical(RateFunction::indicator(), DisorderLaw::atoms({{0.6, 0.5}, {1.0, 0.5}}))));
  // Atom sum: ½R(0.6/1) + ½R(1) at β = 0.6 with the slow atom saturated.
  const double half = rbar(RateFunction::indicator(), DisorderLaw::atoms({{0.6, 0.5}, {1.0, 0.5}}), 0.3);
  CHECK(half == doctest::Approx(0.5 * (0.5 / 0.5) + 0.5 * (0.3 / 0.7)).epsilon(1e-12));
}

TEST_CASE("density maps are strictly increasing") {
  const RateFunction g({0.0, 0.4, 0.8, 1.0});
  double last_r = -1.0, last_rbar = -1.0;
  for (int i = 0; i < 200; ++i) {
    const double beta = 0.5 * i / 200.0;
    const double r = mean_density(g, beta);
    const double rb = rbar(g, linear_law(), beta);
    CHECK(r > last_r);
    CHECK(rb > last_rbar);
    last_r = r;
    last_rbar = rb;
  }
}

TEST_CASE("inverse density map") {
  const RateFunction g = RateFunction::indicator();
  CHECK(rbar_inverse(g, DisorderLaw::dirac(1.0), 0.0) == 0.0);
  CHECK(rbar_inverse(g, DisorderLaw::dirac(1.0), 1.0) == doctest::Approx(0.5).epsilon(1e-9));
  const double beta = rbar_inverse(g, linear_law(), 1.0);
  CHECK(std::abs(rbar(g, linear_law(), beta) - 1.0) < 1e-10);
  double last = -1.0;
  for (double rho : {0.0, 0.1, 0.5, 1.0, 1.5, 1.9, 1.999}) {
    const double b = rbar_inverse(g, linear_law(), rho);
    CHECK(std::abs(rbar(g, linear_law(), b) - rho) < 1e-10);
    CHECK(b > last);
    last = b;
  }
  CHECK_THROWS(rbar_inverse(g, linear_law(), 2.5));
  CHECK_THROWS(rbar_inverse(g, linear_law(), -0.1));
}

TEST_CASE("M/M/1 flux") {
  const RateFunction g = RateFunction::indicator();
  const DisorderLaw one = DisorderLaw::dirac(1.0);
  FluxFunction::Options opts;
  opts.rho_max = 10.0;
  const FluxFunction f = FluxFunction::tabulate(g, one, 1.0, 1.0, opts);
  CHECK(f(0.0) == 0.0);
  for (double rho : {0.1, 0.5, 1.0, 3.0, 9.0}) {
    CHECK(flux_eval(g, one, 1.0, 1.0, rho) == doctest::Approx(rho / (1.0 + rho)).epsilon(1e-9));
    CHECK(f.exact(rho) == doctest::Approx(rho / (1.0 + rho)).epsilon(1e-9));
    CHECK(std::abs(f(rho) - rho / (1.0 + rho)) < 1e-5);
  }
}

TEST_CASE("single slow site flux") {
  const RateFunction g = RateFunction::indicator();
  const DisorderLaw one = DisorderLaw::dirac(1.0);
  const FluxFunction f = FluxFunction::tabulate(g, one, 0.5, 1.0);
  CHECK(f.plateau_start() == doctest::Approx(1.0).epsilon(1e-10));
  for (double rho : {0.0, 0.2, 0.7, 0.99}) CHECK(f.exact(rho) == doctest::Approx(rho / (1.0 + rho)).epsilon(1e-9));
  for (double rho : {1.0, 1.5, 3.0}) CHECK(f.exact(rho) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("flux properties") {
  const RateFunction g({0.0, 0.6, 1.0});
  for (double p : {1.0, 0.8}) {
    for (double gamma : {0.5, 0.4}) {
      const FluxFunction f = FluxFunction::tabulate(g, linear_law(), gamma, p);
      const double pq = 2.0 * p - 1.0;
      const Eigen::VectorXd& v = f.values();
      CHECK(v(0) == 0.0);
      for (Eigen::Index i = 1; i < v.size(); ++i) {
        CHECK(v(i) >= v(i - 1));
        CHECK(v(i) / pq <= gamma + 1e-12);
        if (f.grid()(i) >= f.plateau_start()) CHECK(v(i) == doctest::Approx(pq * gamma).epsilon(1e-12));
      }
      CHECK(flux_eval(g, linear_law(), gamma, p, 0.0) == 0.0);
    }
  }
  CHECK_THROWS(flux_eval(g, linear_law(), 0.5, 0.5, 1.0));
  CHECK_THROWS(flux_eval(g, linear_law(), 0.7, 1.0, 1.0));
}

TEST_CASE("flux CSV round trip") {
  const FluxFunction f = FluxFunction::tabulate(RateFunction::indicator(), DisorderLaw::dirac(1.0), 0.5, 1.0);
  std::stringstream ss;
  f.write_csv(ss);
  CHECK(ss.str().rfind("rho,f\n", 0) == 0);
  const FluxFunction back = FluxFunction::read_csv(ss, 1.0);
  CHECK(back.grid().size() == f.grid().size());
  CHECK((back.values() - f.values()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("product measure sampling") {
  const RateFunction g = RateFunction::indicator();
  SUBCASE("zero fugacity") {
    const Environment env = build_environment(ExplicitSpec{std::vector<double>(101, 1.0), {}, {}}, Window{-50, 50}, 0);
    CounterRng rng(1);
    CHECK(sample_product(env, g, 0.0, env.window(), rng).mass() == ExtendedInt(0));
  }
  SUBCASE("law of large numbers") {
    const Environment env = build_environment(ExplicitSpec{std::vector<double>(100000, 1.0), {}, {}}, Window{0, 99999}, 0);
    CounterRng rng(2);
    const Configuration c = sample_product(env, g, 0.5, env.window(), rng);
    CHECK(std::abs(static_cast<double>(c.mass().value()) / 100000.0 - 1.0) < 0.02);
  }
  SUBCASE("saturated slow site") {
    std::vector<double> a(21, 1.0);
    a[10] = 0.5;
    const Environment env = build_environment(ExplicitSpec{a, 0.5, {}}, Window{-10, 10}, 0);
    CounterRng rng(3);
    const Configuration c = sample_product(env, g, 0.5, env.window(), rng);
    CHECK(c[0].is_infinite());
    for (std::int64_t x = -10; x <= 10; ++x)
      if (x != 0) CHECK_FALSE(c[x].is_infinite());
    CounterRng rng2(3);
    CHECK_THROWS(sample_product(env, g, 0.6, env.window(), rng2));
  }
  SUBCASE("monotone in the fugacity under a common stream") {
    const Environment env = build_environment(IidSpec{linear_law()}, Window{-200, 200}, 4);
    CounterRng r1(5), r2(5);
    const Configuration lo = sample_product(env, g, 0.2, env.window(), r1);
    const Configuration hi = sample_product(env, g, 0.45, env.window(), r2);
    CHECK(lo.leq(hi));
  }
}

}  // TEST_SUITE

#include "zrp/env.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace zrp;
using nlohmann::json;

namespace {

Environment explicit_env(Window w, std::vector<double> alpha, std::optional<double> c = std::nullopt) {
  ExplicitSpec s;
  s.alpha = std::move(alpha);
  s.c = c;
  return build_environment(s, w, 0);
}

DisorderLaw two_atoms() { return DisorderLaw::atoms({{1.0, 0.5}, {0.6, 0.5}}); }

void check_invariants(const Environment& env) {
  for (std::int64_t x = env.window().left; x <= env.window().right; ++x) {
    CHECK(env(x) > 0.0);
    CHECK(env(x) <= 1.0);
    CHECK(env.c() <= env(x));
  }
  CHECK(env.c() <= env.law().support_min());
}

}  // namespace

TEST_SUITE("env") {

TEST_CASE("disorder law validation") {
  CHECK_THROWS(DisorderLaw::atoms({{0.5, 0.5}, {1.0, 0.4}}));
  CHECK_THROWS(DisorderLaw::atoms({{1.2, 1.0}}));
  CHECK_THROWS(DisorderLaw::atoms({{0.0, 1.0}}));
  CHECK_NOTHROW(DisorderLaw::atoms({{0.5, 0.5 - 1e-13}, {1.0, 0.5}}));
  CHECK_THROWS(DisorderLaw::density([](double) { return 1.0; }, 0.0, 1.0));
  CHECK_THROWS(DisorderLaw::density([](double a) { return a < 0.7 ? -1.0 : 4.0; }, 0.5, 1.0));
}

TEST_CASE("power density cdf and quantile are inverse") {
  const DisorderLaw law = DisorderLaw::power_density(0.5, 1.0, 1.0);
  CHECK(law.support_min() == doctest::Approx(0.5));
  CHECK(law.pdf(0.75) == doctest::Approx(8.0 * 0.25).epsilon(1e-12));
  for (double u : {0.01, 0.25, 0.5, 0.9, 0.999}) CHECK(law.cdf(law.quantile(u)) == doctest::Approx(u).epsilon(1e-9));
  // F(a) = 4(a - 1/2)^2 on [1/2, 1].
  for (double a : {0.55, 0.7, 0.95}) CHECK(law.cdf(a) == doctest::Approx(4.0 * (a - 0.5) * (a - 0.5)).epsilon(1e-9));
}

TEST_CASE("atomic quantile is right-continuous") {
  const DisorderLaw law = DisorderLaw::atoms({{0.6, 0.25}, {1.0, 0.75}});
  CHECK(law.quantile(0.1) == 0.6);
  CHECK(law.quantile(0.25) == 1.0);
  CHECK(law.quantile(0.9) == 1.0);
}

TEST_CASE("explicit homogeneous environment") {
  const Environment env = explicit_env({-10, 10}, std::vector<double>(21, 1.0));
  CHECK(env.c() == 1.0);
  for (std::int64_t x = -10; x <= 10; ++x) CHECK(env(x) == 1.0);
  check_invariants(env);
}

TEST_CASE("construction errors") {
  CHECK_THROWS(build_environment(IidSpec{two_atoms()}, Window{1, 0}, 0));
  CHECK_THROWS(build_environment(DeterministicSpec{two_atoms(), 1.0, std::nullopt, {}}, Window{-5, 5}, 0));
  CHECK_THROWS(explicit_env({0, 2}, {1.0, 1.0}));
  CHECK_THROWS(explicit_env({0, 1}, {1.0, 1.5}));
  CHECK_THROWS(explicit_env({0, 1}, {1.0, 0.5}, 0.7));
}

TEST_CASE("defect sites for kappa = 2") {
  const auto sites = defect_sites(2.0, Window{-10, 10});
  for (std::int64_t x : {-16, -9, -4, -1, 0, 1, 4, 9, 16}) CHECK(std::find(sites.begin(), sites.end(), x) != sites.end());
  CHECK(std::is_sorted(sites.begin(), sites.end()));
  CHECK(std::find(sites.begin(), sites.end(), 2) == sites.end());
}

TEST_CASE("iid two-atom environment") {
  const std::int64_t n = 100000;
  const Environment env = build_environment(IidSpec{two_atoms()}, Window{-n, n}, 17);
  check_invariants(env);
  std::int64_t slow = 0;
  for (std::int64_t x = 1; x <= n; ++x) {
    CHECK((env(x) == 1.0 || env(x) == 0.6));
    slow += env(x) == 0.6;
  }
  CHECK(std::abs(static_cast<double>(slow) / n - 0.5) < 0.01);
  CHECK(total_variation(empirical_disorder(env, n, Side::right), env.law()) <= 0.02);
  CHECK(total_variation(empirical_disorder(env, n, Side::left), env.law()) <= 0.02);
  CHECK_THROWS(empirical_disorder(env, n + 1, Side::right));
}

TEST_CASE("iid empirical law approaches Q0 as n grows") {
  // Average over seeds: the distance decreases stochastically.
  const DisorderLaw law = DisorderLaw::power_density(0.5, 1.0, 1.0);
  double d[3] = {0, 0, 0};
  const std::int64_t ns[3] = {100, 1000, 10000};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Environment env = build_environment(IidSpec{law}, Window{-10000, 10000}, seed);
    for (int i = 0; i < 3; ++i) d[i] += kolmogorov_distance(empirical_disorder(env, ns[i], Side::right), law);
  }
  CHECK(d[0] > d[1]);
  CHECK(d[1] > d[2]);
}

TEST_CASE("homogeneous empirical law is a point mass") {
  const Environment env = explicit_env({-100, 100}, std::vector<double>(201, 1.0));
  const DiscreteLaw e = empirical_disorder(env, 100, Side::right);
  REQUIRE(e.size() == 1);
  CHECK(e.front().first == 1.0);
  CHECK(e.front().second == 1.0);
}

TEST_CASE("deterministic environment converges to an atomic Q0") {
  const DisorderLaw law = DisorderLaw::atoms({{0.25, 0.25}, {0.5, 0.25}, {0.75, 0.25}, {1.0, 0.25}});
  const Environment env = build_environment(DeterministicSpec{law, 2.0, std::nullopt, {}}, Window{-100000, 100000}, 0);
  check_invariants(env);
  // Oracle: between consecutive defects the values are F^{-1}(u) on an
  // evenly spaced u grid, so counts follow from the atom cut points.
  double previous = 1.0;
  for (std::int64_t n : {1000, 10000, 100000}) {
    const DiscreteLaw e = empirical_disorder(env, n, Side::right);
    std::map<double, double> counts;
    const auto sites = defect_sites(2.0, Window{0, n});
    for (std::size_t k = 0; k + 1 < sites.size(); ++k) {
      const std::int64_t a = sites[k], b = sites[k + 1];
      for (std::int64_t x = std::max<std::int64_t>(a, 0); x < b && x <= n; ++x) {
        const double u = static_cast<double>(x - a) / static_cast<double>(b - a);
        counts[u < 0.25 ? 0.25 : u < 0.5 ? 0.5 : u < 0.75 ? 0.75 : 1.0] += 1.0 / static_cast<double>(n + 1);
      }
    }
    if (n >= sites.back()) counts[0.25] += 1.0 / static_cast<double>(n + 1);
    for (const auto& [a, w] : e) CHECK(w == doctest::Approx(counts[a]).epsilon(1e-12));
    const double tv = total_variation(e, law);
    CHECK(tv < previous);
    previous = tv;
  }
}

TEST_CASE("defect bounds") {
  SUBCASE("homogeneous") {
    const DefectBounds b = defect_bounds(explicit_env({-10, 10}, std::vector<double>(21, 1.0)), 0.1);
    CHECK(b.left == 0);
    CHECK(b.right == 0);
  }
  SUBCASE("single slow site") {
    std::vector<double> a(21, 1.0);
    a[10] = 0.5;
    const DefectBounds b = defect_bounds(explicit_env({-10, 10}, a, 0.5), 0.1);
    CHECK(b.left == 0);
    CHECK(b.right == 0);
  }
  SUBCASE("no slow site in the window") {
    std::vector<double> a(21, 1.0);
    const DefectBounds b = defect_bounds(explicit_env({-10, 10}, a, 0.5), 0.1);
    CHECK_FALSE(b.left.has_value());
    CHECK_FALSE(b.right.has_value());
  }
  SUBCASE("deterministic defects") {
    DeterministicSpec s{DisorderLaw::power_density(0.5, 1.0, 0.0), 2.0, 0.2, {}};
    const Environment env = build_environment(s, Window{-3000, 3000}, 0);
    check_invariants(env);
    std::int64_t last = 0;
    for (double eps : {0.105, 0.045, 0.0195}) {
      // Defect n carries c + 1/(|n|+2); the first one below c + eps is at n*.
      const auto n = static_cast<std::int64_t>(std::ceil(1.0 / eps - 2.0));
      const DefectBounds b = defect_bounds(env, eps);
      REQUIRE(b.left.has_value());
      REQUIRE(b.right.has_value());
      CHECK(*b.right == n * n);
      CHECK(*b.left == -n * n);
      CHECK(*b.right > last);
      last = *b.right;
      CHECK(env(*b.left) <= env.c() + eps);
      for (std::int64_t x = *b.left + 1; x < *b.right; ++x) CHECK(env(x) > env.c() + eps);
    }
  }
}

TEST_CASE("environment JSON dump reloads exactly") {
  for (const json& spec : {json{{"kind", "iid"}, {"q0", {{"atoms", {{0.6, 0.5}, {1.0, 0.5}}}}}, {"window", {-30, 30}}, {"seed", 5}},
                           json{{"kind", "deterministic"}, {"q0", {{"density", {{"family", "power"}, {"lo", 0.5}, {"hi", 1.0}, {"k", 1.0}}}}},
                                {"c", 0.3}, {"window", {-40, 40}}},
                           json{{"kind", "explicit"}, {"default", 1.0}, {"sites", {{"0", 0.5}}}, {"c", 0.5}, {"window", {-5, 5}}}}) {
    const Environment env = build_environment(spec);
    const json dump = env.to_json();
    const Environment back = Environment::from_json(json::parse(dump.dump()));
    CHECK(back.to_json() == dump);
    CHECK(back.values() == env.values());
    CHECK(back.c() == env.c());
    CHECK(back.window() == env.window());
  }
}

TEST_CASE("environment is a pure function of spec, window and seed") {
  const json spec{{"kind", "iid"}, {"q0", {{"atoms", {{0.6, 0.5}, {1.0, 0.5}}}}}, {"window", {-200, 200}}, {"seed", 9}};
  CHECK(build_environment(spec).values() == build_environment(spec).values());
  json other = spec;
  other["seed"] = 10;
  CHECK(build_environment(spec).values() != build_environment(other).values());
}

}  // TEST_SUITE

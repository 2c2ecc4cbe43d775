// One PASS/FAIL line per criterion. Verdicts are recomputed here from the
// report metrics against fixed thresholds, not taken from the report checks.
#include "zrp/experiments.hpp"
#include "zrp/jackson.hpp"
#include "zrp/measures.hpp"
#include "zrp/stats.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#ifndef ZRP_CONFIG_DIR
#define ZRP_CONFIG_DIR "configs"
#endif

using namespace zrp;
using nlohmann::json;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_s;
  std::function<Verdict()> run;
};

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Report run_config(const std::string& file) {
  std::ifstream in(std::string(ZRP_CONFIG_DIR) + "/" + file);
  if (!in) throw std::runtime_error("cannot open config " + file);
  return run_experiment(ExperimentConfig::from_json(json::parse(in)));
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) out(i++) = a;
  return out;
}

Verdict jackson_stationarity() {
  const OpenNetwork net = make_network(-2, vec({0.5, 1, 1, 1, 0.5}), 0.7);
  const RateFunction g1 = RateFunction::indicator();
  double worst = 0.0;
  for (std::int64_t x = -1; x <= 1; ++x)
    for (std::int64_t k = 0; k <= 30; ++k) worst = std::max(worst, std::abs(stationarity_residual(net, g1, x, k).value));
  double perturbed = 0.0;
  for (std::int64_t k = 0; k <= 30; ++k)
    perturbed = std::max(perturbed, std::abs(stationarity_residual(net, g1, -1, k, 60, FugacityPerturbation{-1, 1.1}).value));
  return {worst < 1e-8 && perturbed > 1e-3, "max residual " + g(worst) + ", perturbed " + g(perturbed)};
}

Verdict lambda_exactness() {
  const LambdaProfile lam = lambda_profile(make_network(0, vec({0.4, 0.9, 0.8}), 0.75));
  const double err = std::abs(lam(1) - 0.5);
  double flat = 0.0;
  for (double p : {0.6, 0.8, 1.0}) {
    Eigen::VectorXd k = Eigen::VectorXd::Constant(7, 1.0);
    k(0) = k(6) = 0.4;
    k(3) = 0.7;
    const LambdaProfile c = lambda_profile(make_network(-3, k, p));
    for (std::int64_t x = -3; x <= 3; ++x) flat = std::max(flat, std::abs(c(x) - 0.4));
  }
  return {err < 1e-12 && flat < 1e-12, "|lambda(1) - 0.5| " + g(err) + ", constancy " + g(flat)};
}

Verdict equilibrium_current() {
  const Report r = run_config("current_stationary.json");
  const json& obs = r.json.at("metrics").at("observers").at(0);
  const json& rate = obs.at("rate");
  const double mean = rate.at("mean").get<double>(), se = rate.at("se").get<double>();
  const double bias = mean - 0.5;
  const bool ok = std::abs(bias) <= 3.0 * se && std::abs(bias) < 0.015 && rate.at("n").get<int>() == 50;
  return {ok, "rate " + g(mean) + " +- " + g(3.0 * se)};
}

Verdict source_current() {
  const Report r = run_config("current_source.json");
  const double mean = r.json.at("metrics").at("rate").at("mean").get<double>();
  return {std::abs(mean - 1.0) < 0.02, "t^-1 mass right " + g(mean)};
}

Verdict hydrodynamic_limit() {
  const Report r = run_config("hydro_rarefaction.json");
  const json& m = r.json.at("metrics");
  const double emp = m.at("l1_vs_exact").at("mean_profile").get<double>();
  const double scheme = m.at("scheme_l1_vs_exact").get<double>();
  return {emp < 0.05 && scheme < 0.01, "empirical L1 " + g(emp) + ", Godunov L1 " + g(scheme)};
}

Verdict local_equilibrium() {
  const Report r = run_config("local_equilibrium.json");
  const json& m = r.json.at("metrics");
  const double tv = m.at("tv").get<double>();
  const double beta = m.at("fugacity").get<double>();
  return {tv < 0.05 && std::abs(beta - 1.0 / 3.0) < 1e-9, "TV " + g(tv) + " at fugacity " + g(beta)};
}

Verdict mass_escape() {
  const Report r = run_config("condensation.json");
  const json& m = r.json.at("metrics");
  const double out = m.at("outflow").at("mean").get<double>();
  const double tv = m.at("fast_site_tv").get<double>();
  const Report c = run_config("condensation_control.json");
  const json& slope = c.json.at("metrics").at("slow_site_slope");
  const double s = slope.at("mean").get<double>(), se = slope.at("se").get<double>();
  const bool no_growth = s - 3.0 * se <= 0.0;
  return {std::abs(out / 0.5 - 1.0) < 0.05 && tv < 0.08 && no_growth,
          "outflow " + g(out) + ", fast-site TV " + g(tv) + ", control slope " + g(s) + " +- " + g(3.0 * se)};
}

Verdict coupling() {
  const Report r = run_config("coupling.json");
  const json& m = r.json.at("metrics");
  const int runs = m.at("runs").get<int>();
  bool ok = runs == 100;
  std::string detail;
  for (const char* k : {"attractiveness", "discrepancy_nonincreasing", "current_identity", "current_comparison",
                        "source_domination"}) {
    const int n = m.at(k).get<int>();
    ok = ok && n == runs;
    detail += std::string(detail.empty() ? "" : ", ") + k + " " + std::to_string(n) + "/" + std::to_string(runs);
  }
  return {ok, detail};
}

Verdict measure_machinery() {
  double norm = 0.0;
  for (const RateFunction& rf : {RateFunction::indicator(), RateFunction({0.0, 0.5, 1.0}), RateFunction({0.0, 0.2, 0.6, 0.9, 1.0})})
    for (double beta : {0.0, 0.3, 0.7, 0.95}) {
      const ThetaMarginal th = marginal(rf, beta);
      double s = th.survival(th.tail_cut());
      for (std::int64_t n = 0; n <= th.tail_cut(); ++n) s += th.pmf(n);
      norm = std::max(norm, std::abs(s - 1.0));
    }
  const RateFunction ind = RateFunction::indicator();
  const DisorderLaw law = DisorderLaw::power_density(0.5, 1.0, 1.0);
  double trip = 0.0;
  for (double rho : {0.05, 0.3, 1.0, 1.7, 1.99}) trip = std::max(trip, std::abs(rbar(ind, law, rbar_inverse(ind, law, rho)) - rho));
  const double rc = rho_critical(ind, law);
  // Closed form: ∫ 8(a−½)·½/(a−½) da over [½,1] = 2.
  const bool ok = norm < 1e-12 && trip < 1e-10 && std::abs(rc - 2.0) < 1e-6;
  return {ok, "normalization " + g(norm) + ", roundtrip " + g(trip) + ", rho_c " + g(rc)};
}

Verdict cesaro_trend() {
  const Report r = run_config("cesaro.json");
  const json& m = r.json.at("metrics");
  bool ok = m.at("supercritical").get<bool>();
  std::string detail = "TV";
  double last = INFINITY;
  for (const json& row : m.at("deltas")) {
    const double tv = row.at("tv").get<double>();
    ok = ok && tv <= last;
    last = tv;
    detail += " " + g(row.at("delta").get<double>()) + ":" + g(tv);
  }
  return {ok && m.at("deltas").size() == 3, detail};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"jackson_stationarity", 5.0, jackson_stationarity},
      {"lambda_profile_exactness", 5.0, lambda_exactness},
      {"equilibrium_current", 120.0, equilibrium_current},
      {"source_current", 120.0, source_current},
      {"hydrodynamic_limit", 300.0, hydrodynamic_limit},
      {"local_equilibrium_creation", 600.0, local_equilibrium},
      {"mass_escape", 600.0, mass_escape},
      {"pathwise_coupling", 120.0, coupling},
      {"measure_machinery", 5.0, measure_machinery},
      {"cesaro_trend", 600.0, cesaro_trend},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = v.pass && secs < c.budget_s;
    failed += !pass;
    std::cout << (pass ? "PASS " : "FAIL ") << c.name << " (" << g(secs) << " s, budget " << g(c.budget_s) << " s) "
              << v.detail << std::endl;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << failed << " of " << criteria.size() << " criteria failing" << std::endl;
  return failed ? 1 : 0;
}

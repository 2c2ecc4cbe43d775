#include "zrp/env.hpp"
#include "zrp/experiments.hpp"
#include "zrp/hydro.hpp"
#include "zrp/jackson.hpp"
#include "zrp/measures.hpp"
#include "zrp/simulate.hpp"
#include "zrp/stats.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

void write_text(const fs::path& path, const std::string& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

json stamp(const json& cfg, std::uint64_t seed) {
  return {{"config_hash", zrp::config_hash(cfg)}, {"seed", seed}, {"version", zrp::kCodeVersion}};
}

zrp::FluxFunction flux_from(const json& j) {
  const zrp::RateFunction g = j.contains("g") ? zrp::RateFunction::from_json(j.at("g")) : zrp::RateFunction::indicator();
  const zrp::DisorderLaw q0 = zrp::DisorderLaw::from_json(j.at("q0"));
  const double gamma = j.value("gamma", q0.support_min());
  zrp::FluxFunction::Options opts;
  opts.points = j.value("points", 4096);
  if (j.contains("rho_max")) opts.rho_max = j.at("rho_max").get<double>();
  return zrp::FluxFunction::tabulate(g, q0, gamma, j.value("p", 1.0), opts);
}

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicas;
  std::optional<int> threads;
};

int run_experiment(const std::string& name, const Common& c) {
  json j = read_json(c.config);
  if (j.contains("experiment") && j.at("experiment") != name)
    throw std::invalid_argument("config experiment '" + j.at("experiment").get<std::string>() + "' does not match '" + name + "'");
  j["experiment"] = name;
  if (c.seed) j["seed"] = *c.seed;
  if (c.replicas) j["replicas"] = *c.replicas;
  if (c.threads) j["threads"] = *c.threads;
  const zrp::ExperimentConfig cfg = zrp::ExperimentConfig::from_json(j);
  const auto t0 = std::chrono::steady_clock::now();
  zrp::Report report = zrp::run_experiment(cfg);
  report.json["runtime_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report.json["pass"] = report.passed();
  zrp::write_report(report, c.out);
  for (const auto& chk : report.json.at("checks"))
    std::printf("%s %s\n", chk.at("pass").get<bool>() ? "PASS" : "FAIL", chk.at("name").get<std::string>().c_str());
  std::printf("wrote %s\n", (fs::path(c.out) / "report.json").string().c_str());
  return report.passed() ? 0 : 1;
}

// {"environment": spec with window, "g", "p", "initial", "T", "snapshot_times", "observers": [{"site", "velocity"}]}
int run_simulate(const Common& c) {
  json j = read_json(c.config);
  const std::uint64_t seed = c.seed.value_or(j.value("seed", std::uint64_t{0}));
  j["seed"] = seed;
  auto env = std::make_shared<const zrp::Environment>(zrp::build_environment(j.at("environment")));
  const zrp::RateFunction g = j.contains("g") ? zrp::RateFunction::from_json(j.at("g")) : zrp::RateFunction::indicator();
  const double p = j.value("p", 1.0);
  const double T = j.at("T").get<double>();
  const zrp::Window w = env->window();
  const zrp::BoundaryMode mode = zrp::parse_boundary_mode(j.value("boundary", std::string("closed")));
  const zrp::Boundaries bounds{mode, mode};
  const zrp::InitialCondition ic = zrp::InitialCondition::from_json(j.at("initial"));
  zrp::CounterRng rng(zrp::replica_seed(seed, 1));
  zrp::Configuration init(w, bounds);
  switch (ic.kind) {
    case zrp::InitialCondition::Kind::empty:
      break;
    case zrp::InitialCondition::Kind::product: {
      const double beta = ic.fugacity ? *ic.fugacity : zrp::rbar_inverse(g, env->law(), *ic.density, env->c());
      init = zrp::sample_product(*env, g, beta, w, rng, bounds);
      break;
    }
    case zrp::InitialCondition::Kind::pattern: {
      const zrp::Window support = ic.support ? zrp::Window{ic.support->first, ic.support->second} : w;
      init = zrp::make_pattern(w, support, ic.pattern, bounds);
      break;
    }
    case zrp::InitialCondition::Kind::source:
      init = zrp::make_source(ic.site, w);
      break;
    case zrp::InitialCondition::Kind::profile:
      throw std::invalid_argument("simulate: use the hydro experiment for profile data");
  }
  zrp::CoupledState state({init}, env, g, p, zrp::replica_seed(seed, 3));
  zrp::EventStream stream(zrp::replica_seed(seed, 2), p);
  std::vector<zrp::CurrentObserver> obs;
  int id = 0;
  for (const auto& o : j.value("observers", json::array()))
    obs.push_back(zrp::CurrentObserver::linear(o.at("site").get<std::int64_t>(), o.value("velocity", 0.0), T, id++));
  const auto times = j.value("snapshot_times", std::vector<double>{});
  const zrp::Observations res = zrp::simulate(state, T, stream, obs, times);

  fs::create_directories(c.out);
  std::ostringstream snaps, currents;
  zrp::write_snapshot_header(snaps, 1);
  for (const zrp::Snapshot& s : res.snapshots) zrp::write_snapshot_rows(snaps, 0, s);
  zrp::write_current_header(currents);
  zrp::write_current_rows(currents, 0, res.currents);
  write_text(fs::path(c.out) / "snapshots.csv", snaps.str());
  write_text(fs::path(c.out) / "currents.csv", currents.str());
  json rep = stamp(j, seed);
  rep["events"] = res.events;
  rep["jumps"] = res.jumps;
  rep["final_mass"] = state.configs.front().mass().to_string();
  write_text(fs::path(c.out) / "report.json", rep.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-range process laboratory"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub, bool experiment) {
    sub->add_option("--config", common.config, "JSON configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, experiment ? "Output directory" : "Output path")->required();
    sub->add_option("--seed", common.seed, "Master seed");
    if (experiment) {
      sub->add_option("--replicas", common.replicas, "Replica count")->check(CLI::PositiveNumber);
      sub->add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
    }
  };

  const std::vector<std::pair<std::string, std::string>> experiments{
      {"hydro", "Particle profile against the Godunov and exact Riemann solutions"},
      {"local_equilibrium", "Occupancy law at a macroscopic point against the local equilibrium"},
      {"cesaro", "Time-averaged occupancy laws over shrinking windows"},
      {"convergence", "Marginals at fixed sites at increasing times"},
      {"current", "Stationary and source currents"},
      {"condensation", "Slow-site growth, downstream current and fast-site marginals"},
      {"coupling", "Pathwise coupling properties over seeded runs"}};
  for (const auto& [name, help] : experiments) add_common(app.add_subcommand(name, help), true);

  CLI::App* flux = app.add_subcommand("flux", "Tabulate the homogenized flux as rho,f CSV");
  add_common(flux, false);
  CLI::App* jackson = app.add_subcommand("jackson", "Open-network λ profile and stationarity residuals");
  add_common(jackson, false);
  CLI::App* evolve = app.add_subcommand("evolve", "Godunov evolution of piecewise-constant data as x,rho CSV");
  add_common(evolve, false);
  CLI::App* env = app.add_subcommand("env", "Build an environment and dump it as JSON");
  add_common(env, false);
  bool reload = false;
  env->add_flag("--reload", reload, "Reload the dump and check it round-trips");
  CLI::App* sim = app.add_subcommand("simulate", "Single run with snapshot and current CSVs");
  add_common(sim, true);

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [name, help] : experiments)
      if (app.got_subcommand(name)) return run_experiment(name, common);

    if (app.got_subcommand(flux)) {
      const json j = read_json(common.config);
      std::ostringstream os;
      flux_from(j).write_csv(os);
      write_text(common.out, os.str());
      return 0;
    }
    if (app.got_subcommand(jackson)) {
      const json j = read_json(common.config);
      const zrp::RateFunction g = j.contains("g") ? zrp::RateFunction::from_json(j.at("g")) : zrp::RateFunction::indicator();
      const double p = j.value("p", 1.0);
      json rep;
      if (j.contains("kappa")) {
        const auto k = j.at("kappa").get<std::vector<double>>();
        const zrp::OpenNetwork net = zrp::make_network(j.value("l", std::int64_t{0}),
                                                       Eigen::Map<const Eigen::VectorXd>(k.data(), static_cast<Eigen::Index>(k.size())), p);
        rep = zrp::jackson_report(net, g, j.value("k_max", 30), j.value("trunc", 60));
      } else {
        const zrp::Environment e = zrp::build_environment(j.at("environment"));
        const zrp::Truncation t = zrp::truncate_environment(e, j.at("eps").get<double>(), p);
        rep = zrp::jackson_report(t.network, g, j.value("k_max", 30), j.value("trunc", 60));
        rep["truncation"] = {{"l", t.l}, {"r", t.r}, {"r_prime", t.r_prime}, {"fallback", t.fallback}};
      }
      rep.update(stamp(j, common.seed.value_or(0)));
      write_text(common.out, rep.dump(2) + "\n");
      return rep.value("recurrent", false) ? 0 : 1;
    }
    if (app.got_subcommand(evolve)) {
      const json j = read_json(common.config);
      std::optional<zrp::FluxFunction> f;
      if (j.contains("flux_csv")) {
        std::ifstream in(j.at("flux_csv").get<std::string>());
        if (!in) throw std::runtime_error("cannot open flux table");
        f = zrp::FluxFunction::read_csv(in, j.value("p", 1.0));
      } else {
        f = flux_from(j.at("flux"));
      }
      const zrp::PiecewiseConstant pc = zrp::PiecewiseConstant::from_json(j.at("initial"));
      const double a = j.at("domain").at(0).get<double>();
      const double b = j.at("domain").at(1).get<double>();
      const double dx = j.value("dx", 1.0 / 400.0);
      const auto cells = static_cast<Eigen::Index>(std::ceil((b - a) / dx));
      const zrp::GridProfile out = zrp::evolve(*f, pc.discretize(a, a + cells * dx, cells), j.at("t").get<double>(), j.value("cfl", 0.9));
      std::ostringstream os;
      zrp::write_profile_csv(os, out);
      write_text(common.out, os.str());
      return 0;
    }
    if (app.got_subcommand(env)) {
      json j = read_json(common.config);
      if (common.seed) j["seed"] = *common.seed;
      const zrp::Environment e = zrp::build_environment(j);
      const json dump = e.to_json();
      write_text(common.out, dump.dump(2) + "\n");
      if (reload && zrp::Environment::from_json(read_json(common.out)).to_json() != dump) {
        std::fprintf(stderr, "environment dump does not round-trip\n");
        return 1;
      }
      return 0;
    }
    if (app.got_subcommand(sim)) return run_simulate(common);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "zrplab: %s\n", e.what());
    return 2;
  }
  return 0;
}

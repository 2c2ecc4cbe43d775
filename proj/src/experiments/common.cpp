#include "common.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#ifndef ZRP_VERSION
#define ZRP_VERSION "unknown"
#endif

namespace zrp {

const char* const kCodeVersion = ZRP_VERSION;

using nlohmann::json;

// ---------------------------------------------------------------- InitialCondition

InitialCondition InitialCondition::from_json(const json& j) {
  InitialCondition ic;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "empty") {
    ic.kind = Kind::empty;
  } else if (kind == "product") {
    ic.kind = Kind::product;
    if (j.contains("density")) ic.density = j.at("density").get<double>();
    if (j.contains("fugacity")) ic.fugacity = j.at("fugacity").get<double>();
    if (ic.density.has_value() == ic.fugacity.has_value())
      throw std::invalid_argument("initial product: give exactly one of density, fugacity");
  } else if (kind == "pattern") {
    ic.kind = Kind::pattern;
    ic.pattern = j.at("pattern").get<std::vector<std::int64_t>>();
    if (ic.pattern.empty()) throw std::invalid_argument("initial pattern: empty pattern");
    for (std::int64_t v : ic.pattern)
      if (v < 0) throw std::invalid_argument("initial pattern: negative occupancy");
    if (j.contains("support")) ic.support = std::pair{j.at("support").at(0).get<std::int64_t>(), j.at("support").at(1).get<std::int64_t>()};
  } else if (kind == "source") {
    ic.kind = Kind::source;
    ic.site = j.value("site", std::int64_t{0});
  } else if (kind == "profile") {
    ic.kind = Kind::profile;
    ic.profile = PiecewiseConstant::from_json(j);
  } else {
    throw std::invalid_argument("initial condition: unknown kind '" + kind + "'");
  }
  return ic;
}

json InitialCondition::to_json() const {
  switch (kind) {
    case Kind::empty:
      return {{"kind", "empty"}};
    case Kind::product: {
      json j{{"kind", "product"}};
      if (density) j["density"] = *density;
      if (fugacity) j["fugacity"] = *fugacity;
      return j;
    }
    case Kind::pattern: {
      json j{{"kind", "pattern"}, {"pattern", pattern}};
      if (support) j["support"] = {support->first, support->second};
      return j;
    }
    case Kind::source:
      return {{"kind", "source"}, {"site", site}};
    case Kind::profile: {
      json j = profile.to_json();
      j["kind"] = "profile";
      return j;
    }
  }
  return {};
}

std::optional<double> InitialCondition::constant_density(const RateFunction& g, const DisorderLaw& q0) const {
  switch (kind) {
    case Kind::empty:
      return 0.0;
    case Kind::product:
      return density ? *density : rbar(g, q0, *fugacity);
    case Kind::pattern:
      if (support) return std::nullopt;
      return static_cast<double>(std::accumulate(pattern.begin(), pattern.end(), std::int64_t{0})) /
             static_cast<double>(pattern.size());
    case Kind::profile: {
      const auto& v = profile.values;
      if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) return v.front();
      return std::nullopt;
    }
    case Kind::source:
      return std::nullopt;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- ExperimentConfig

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  c.experiment = j.at("experiment").get<std::string>();
  c.environment = j.value("environment", json{{"kind", "explicit"}, {"default", 1.0}});
  if (c.environment.contains("window")) throw std::invalid_argument("config: the experiment sets the environment window");
  if (j.contains("g")) c.g = RateFunction::from_json(j.at("g"));
  c.p = j.value("p", 1.0);
  if (!(c.p > 0.5 && c.p <= 1.0)) throw std::invalid_argument("config: p must lie in (1/2, 1]");
  c.initial = InitialCondition::from_json(j.value("initial", json{{"kind", "empty"}}));
  c.N = j.value("N", 1.0);
  c.t = j.value("t", 1.0);
  if (!(c.N > 0.0) || !(c.t > 0.0)) throw std::invalid_argument("config: N and t must be positive");
  c.replicas = j.value("replicas", 1);
  if (c.replicas < 1) throw std::invalid_argument("config: replicas must be positive");
  c.seed = j.value("seed", std::uint64_t{0});
  c.threads = j.value("threads", 1);
  c.V = j.value("V", 3.0);
  if (!(c.V > 0.0)) throw std::invalid_argument("config: V must be positive");
  if (j.contains("window")) c.window = std::pair{j.at("window").at(0).get<std::int64_t>(), j.at("window").at(1).get<std::int64_t>()};
  if (j.contains("boundary")) c.boundary = parse_boundary_mode(j.at("boundary").get<std::string>());
  c.params = j.value("params", json::object());
  return c;
}

json ExperimentConfig::to_json() const {
  json j{{"experiment", experiment}, {"environment", environment}, {"g", g.to_json()},
         {"p", p}, {"initial", initial.to_json()}, {"N", N},
         {"t", t}, {"replicas", replicas}, {"seed", seed},
         {"V", V}, {"boundary", to_string(boundary)}, {"params", params}};
  if (window) j["window"] = {window->first, window->second};
  return j;
}

// ---------------------------------------------------------------- Report

bool Report::passed() const {
  if (!json.contains("checks")) return true;
  for (const auto& c : json.at("checks"))
    if (!c.at("pass").get<bool>()) return false;
  return true;
}

void write_report(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << body;
  };
  put("report.json", report.json.dump(2) + "\n");
  for (const auto& [name, body] : report.files) put(name, body);
}

Report run_experiment(const ExperimentConfig& cfg) {
  const std::string& e = cfg.experiment;
  if (e == "hydro") return run_hydro_compare(cfg);
  if (e == "local_equilibrium") return run_local_equilibrium(cfg);
  if (e == "cesaro") return run_cesaro_marginal(cfg);
  if (e == "convergence") return run_convergence(cfg);
  if (e == "current") return run_current_checks(cfg);
  if (e == "condensation") return run_condensation(cfg);
  if (e == "coupling") return run_coupling_checks(cfg);
  throw std::invalid_argument("unknown experiment '" + e + "'");
}

namespace detail {

ReplicaSeeds seeds_for(std::uint64_t master, int replica) {
  const std::uint64_t r = replica_seed(master, static_cast<std::uint64_t>(replica));
  return {replica_seed(r, 1), replica_seed(r, 2), replica_seed(r, 3)};
}

Context make_context(const ExperimentConfig& cfg, Window region, bool check_cone, double horizon) {
  Context ctx;
  ctx.cfg = &cfg;
  ctx.T = horizon > 0.0 ? horizon : cfg.horizon();
  ctx.region = region;
  if (cfg.window) {
    ctx.window = Window{cfg.window->first, cfg.window->second};
  } else {
    const auto margin = static_cast<std::int64_t>(std::ceil(cfg.V * ctx.T));
    ctx.window = Window{region.left - margin, region.right + (cfg.p < 1.0 ? margin : 1)};
  }
  if (!ctx.window.contains(region)) throw std::invalid_argument("config: region of interest outside the window");
  if (check_cone) check_light_cone(ctx.window, region, cfg.V, ctx.T, cfg.p);

  json e = cfg.environment;
  e["window"] = {ctx.window.left, ctx.window.right};
  if (!e.contains("seed")) e["seed"] = cfg.seed;
  Environment env = build_environment(e);
  ctx.boundaries = Boundaries{cfg.boundary, cfg.boundary};
  ctx.c_env = env.c();
  ctx.flux = FluxFunction::tabulate(cfg.g, env.law(), env.c(), cfg.p);
  if (cfg.boundary == BoundaryMode::reservoir && cfg.initial.kind == InitialCondition::Kind::product) {
    ctx.env = std::make_shared<const Environment>(env);
    const double beta = product_fugacity(ctx);
    env = env.with_values({{ctx.window.left, beta}, {ctx.window.right, beta}}, std::min(env.c(), beta));
  }
  ctx.env = std::make_shared<const Environment>(std::move(env));
  return ctx;
}

double product_fugacity(const Context& ctx) {
  const InitialCondition& ic = ctx.cfg->initial;
  if (ic.kind != InitialCondition::Kind::product) throw std::logic_error("product_fugacity: initial state is not a product");
  if (ic.fugacity) return *ic.fugacity;
  if (!(*ic.density < ctx.critical_density()))
    throw std::invalid_argument("initial product: density must be below the critical density " +
                                std::to_string(ctx.critical_density()));
  return rbar_inverse(ctx.cfg->g, ctx.env->law(), *ic.density, ctx.c());
}

Configuration initial_configuration(const Context& ctx, std::uint64_t seed) {
  const ExperimentConfig& cfg = *ctx.cfg;
  const InitialCondition& ic = cfg.initial;
  const Window& w = ctx.window;
  switch (ic.kind) {
    case InitialCondition::Kind::empty:
      return Configuration(w, ctx.boundaries);
    case InitialCondition::Kind::product: {
      CounterRng rng(seed);
      return sample_product(*ctx.env, cfg.g, product_fugacity(ctx), w, rng, ctx.boundaries);
    }
    case InitialCondition::Kind::pattern: {
      const Window support = ic.support ? Window{ic.support->first, ic.support->second} : w;
      return make_pattern(w, support, ic.pattern, ctx.boundaries);
    }
    case InitialCondition::Kind::source:
      return make_source(ic.site, w);
    case InitialCondition::Kind::profile: {
      // Cumulative rounding: η(x) = ⌊M(x)⌋ − ⌊M(x−1)⌋ with M the profile mass
      // of [L/N, (x+1)/N) in microscopic units.
      std::vector<Occupancy> occ;
      occ.reserve(static_cast<std::size_t>(w.size()));
      long double mass = 0.0L;
      std::int64_t prev = 0;
      for (std::int64_t x = w.left; x <= w.right; ++x) {
        mass += ic.profile.average(static_cast<double>(x) / cfg.N, static_cast<double>(x + 1) / cfg.N);
        const auto cur = static_cast<std::int64_t>(std::floor(mass + 1e-9L));
        occ.emplace_back(cur - prev);
        prev = cur;
      }
      return Configuration(w, std::move(occ), ctx.boundaries);
    }
  }
  throw std::logic_error("initial_configuration: unhandled kind");
}

double fugacity_for_density(const Context& ctx, double rho) {
  if (!(rho >= 0.0)) throw std::invalid_argument("fugacity_for_density: negative density");
  if (rho >= ctx.critical_density()) return ctx.c();
  return rbar_inverse(ctx.cfg->g, ctx.env->law(), rho, ctx.c());
}

ThetaMarginal site_marginal(const Context& ctx, std::int64_t x, double beta) {
  return marginal_ratio(ctx.cfg->g, beta, (*ctx.env)(x));
}

RiemannValue hydro_density(const Context& ctx, double u, double t) {
  const ExperimentConfig& cfg = *ctx.cfg;
  if (const auto rho = cfg.initial.constant_density(cfg.g, ctx.env->law())) return {*rho, *rho, *rho};
  if (cfg.initial.kind != InitialCondition::Kind::profile)
    throw std::invalid_argument("hydro_density: initial state has no macroscopic profile");
  const PiecewiseConstant& pc = cfg.initial.profile;
  if (pc.breakpoints.size() == 1) return riemann_exact(*ctx.flux, pc.values[0], pc.values[1], (u - pc.breakpoints[0]) / t);
  const double lo = static_cast<double>(ctx.window.left) / cfg.N;
  const double hi = static_cast<double>(ctx.window.right + 1) / cfg.N;
  const auto cells = static_cast<Eigen::Index>(std::ceil((hi - lo) * 400.0));
  const GridProfile out = evolve(*ctx.flux, pc.discretize(lo, hi, cells), t);
  const auto i = std::clamp<Eigen::Index>(static_cast<Eigen::Index>((u - lo) / out.dx), 0, out.size() - 1);
  return {out.rho(i), out.rho(i), out.rho(i)};
}

json report_header(const ExperimentConfig& cfg) {
  return json{{"experiment", cfg.experiment},
              {"config_hash", config_hash(cfg.to_json())},
              {"seed", cfg.seed},
              {"version", kCodeVersion},
              {"replicas", cfg.replicas},
              {"config", cfg.to_json()},
              {"metrics", json::object()},
              {"checks", json::array()}};
}

void add_check(json& report, const std::string& name, double value, const std::string& relation, double threshold) {
  bool pass = false;
  if (relation == "<") pass = value < threshold;
  else if (relation == "<=") pass = value <= threshold;
  else if (relation == ">") pass = value > threshold;
  else if (relation == ">=") pass = value >= threshold;
  else throw std::invalid_argument("add_check: unknown relation " + relation);
  report["checks"].push_back({{"name", name}, {"value", value}, {"relation", relation}, {"threshold", threshold}, {"pass", pass}});
}

void add_check(json& report, const std::string& name, bool pass, const json& detail) {
  report["checks"].push_back({{"name", name}, {"detail", detail}, {"pass", pass}});
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

nlohmann::json num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace detail
}  // namespace zrp

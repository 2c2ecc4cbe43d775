#include "common.hpp"

#include "zrp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace zrp {

using nlohmann::json;
using detail::fmt;

namespace {

struct Probe {
  std::int64_t center = 0;  // x_N
  double u = 0.0;
  std::vector<std::int64_t> sites;
  Window region() const {
    return Window{*std::min_element(sites.begin(), sites.end()), *std::max_element(sites.begin(), sites.end())};
  }
};

// x_N = params.site, or round(u·N); test box x_N + S.
Probe make_probe(const ExperimentConfig& cfg) {
  const json& P = cfg.params;
  Probe pr;
  if (P.contains("site")) {
    pr.center = P.at("site").get<std::int64_t>();
    pr.u = static_cast<double>(pr.center) / cfg.N;
  } else {
    pr.u = P.value("u", 0.0);
    pr.center = std::llround(pr.u * cfg.N);
  }
  for (std::int64_t z : P.value("box", std::vector<std::int64_t>{0})) pr.sites.push_back(pr.center + z);
  if (pr.sites.empty()) throw std::invalid_argument("probe: empty test box");
  return pr;
}

std::int64_t finite_occupancy(const Configuration& c, std::int64_t x) {
  const Occupancy o = c[x];
  if (o.is_infinite()) throw std::runtime_error("probe: infinite occupancy at site " + std::to_string(x));
  return o.count();
}

std::vector<ThetaMarginal> targets_for(const detail::Context& ctx, const std::vector<std::int64_t>& sites, double beta) {
  std::vector<ThetaMarginal> out;
  for (std::int64_t x : sites) {
    if (!(beta < (*ctx.env)(x)))
      throw std::invalid_argument("probe: site " + std::to_string(x) + " has rate " + fmt((*ctx.env)(x)) +
                                  " not above the fugacity " + fmt(beta));
    out.push_back(detail::site_marginal(ctx, x, beta));
  }
  return out;
}

void write_marginal(std::ostringstream& os, const std::string& prefix, const Histogram& h,
                    const std::vector<ThetaMarginal>& targets) {
  std::int64_t top = h.max_value();
  for (const ThetaMarginal& m : targets) top = std::max(top, std::min<std::int64_t>(m.tail_cut(), 200));
  for (std::int64_t n = 0; n <= top; ++n) {
    double t = 0.0;
    for (const ThetaMarginal& m : targets) t += m.pmf(n) / static_cast<double>(targets.size());
    os << prefix << n << ',' << fmt(h.frequency(n)) << ',' << fmt(t) << '\n';
  }
}

double local_fugacity(const detail::Context& ctx, const ExperimentConfig& cfg, double u, double t, json& m) {
  double rho;
  if (cfg.params.contains("target_density")) {
    rho = cfg.params.at("target_density").get<double>();
  } else {
    const RiemannValue r = detail::hydro_density(ctx, u, t);
    if (r.lower != r.upper) throw std::invalid_argument("probe: (t,u) sits on a shock");
    rho = r.value;
  }
  const double beta = detail::fugacity_for_density(ctx, rho);
  m["density"] = rho;
  m["critical_density"] = detail::num(ctx.critical_density());
  m["supercritical"] = rho >= ctx.critical_density();
  m["fugacity"] = beta;
  return beta;
}

}  // namespace

// ---------------------------------------------------------------- local equilibrium

Report run_local_equilibrium(const ExperimentConfig& cfg) {
  const Probe pr = make_probe(cfg);
  const detail::Context ctx = detail::make_context(cfg, pr.region());
  const double max_tv = cfg.params.value("max_tv", 0.05);

  const auto samples = detail::run_replicas(cfg.replicas, cfg.threads, [&](int r) {
    const detail::ReplicaSeeds s = detail::seeds_for(cfg.seed, r);
    CoupledState state({detail::initial_configuration(ctx, s.init)}, ctx.env, cfg.g, cfg.p, s.labels);
    EventStream stream(s.events, cfg.p);
    std::vector<CurrentObserver> none;
    SimulationOptions opts;
    opts.record_snapshots = false;
    simulate(state, ctx.T, stream, none, {}, opts);
    std::vector<std::int64_t> occ;
    for (std::int64_t x : pr.sites) occ.push_back(finite_occupancy(state.configs.front(), x));
    return occ;
  });

  std::vector<Histogram> per_site(pr.sites.size());
  Histogram pooled;
  std::vector<double> box_means;
  for (const auto& occ : samples) {
    double s = 0.0;
    for (std::size_t i = 0; i < occ.size(); ++i) {
      per_site[i].add(occ[i]);
      pooled.add(occ[i]);
      s += static_cast<double>(occ[i]);
    }
    box_means.push_back(s / static_cast<double>(occ.size()));
  }

  json rep = detail::report_header(cfg);
  json& m = rep["metrics"];
  m["site"] = pr.center;
  m["sites"] = pr.sites;
  m["window"] = {ctx.window.left, ctx.window.right};
  m["mean_occupancy"] = band(box_means).to_json();
  std::ostringstream csv;
  csv << "n,empirical,target\n";

  const bool explicit_target = cfg.params.contains("target_density");
  const RiemannValue hv = explicit_target ? RiemannValue{0, 0, 0} : detail::hydro_density(ctx, pr.u, cfg.t);
  if (!explicit_target && hv.lower != hv.upper) {
    // Shock: the limits differ, report distances to both one-sided targets.
    for (const auto& [name, rho] : {std::pair{"lower", hv.lower}, std::pair{"upper", hv.upper}}) {
      const double beta = detail::fugacity_for_density(ctx, rho);
      const auto targets = targets_for(ctx, pr.sites, beta);
      m[std::string("tv_") + name] = total_variation(pooled, targets);
      m[std::string("density_") + name] = rho;
    }
    m["shock"] = true;
    write_marginal(csv, "", pooled, targets_for(ctx, pr.sites, detail::fugacity_for_density(ctx, hv.lower)));
  } else {
    const double beta = local_fugacity(ctx, cfg, pr.u, cfg.t, m);
    const auto targets = targets_for(ctx, pr.sites, beta);
    json tvs = json::array();
    for (std::size_t i = 0; i < pr.sites.size(); ++i) tvs.push_back(total_variation(per_site[i], targets[i]));
    m["tv_per_site"] = tvs;
    double target_mean = 0.0;
    for (const ThetaMarginal& t : targets) target_mean += t.mean() / static_cast<double>(targets.size());
    m["target_mean"] = target_mean;
    const double tv = total_variation(pooled, targets);
    m["tv"] = tv;
    detail::add_check(rep, "tv_to_local_equilibrium", tv, "<", max_tv);
    write_marginal(csv, "", pooled, targets);
  }
  rep["files"] = {"marginal.csv"};
  return Report{std::move(rep), {{"marginal.csv", csv.str()}}};
}

// ---------------------------------------------------------------- Cesàro averages

Report run_cesaro_marginal(const ExperimentConfig& cfg) {
  const json& P = cfg.params;
  const Probe pr = make_probe(cfg);
  const detail::Context ctx = detail::make_context(cfg, pr.region());
  std::vector<double> deltas = P.value("deltas", std::vector<double>{0.2, 0.1, 0.05});
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  if (deltas.empty() || !(deltas.back() > 0.0) || deltas.front() > cfg.t)
    throw std::invalid_argument("cesaro: deltas must lie in (0, t]");
  const double dt = P.value("sample_dt", 1.0);
  if (!(dt > 0.0)) throw std::invalid_argument("cesaro: sample_dt must be positive");

  const double T = ctx.T;
  const double first = T - cfg.N * deltas.front();
  std::vector<double> times;
  for (double s = T; s > first; s -= dt) times.push_back(s);
  std::reverse(times.begin(), times.end());

  struct Sample {
    std::vector<Histogram> cesaro;  // per δ
    Histogram instant;
  };
  const auto samples = detail::run_replicas(cfg.replicas, cfg.threads, [&](int r) {
    const detail::ReplicaSeeds s = detail::seeds_for(cfg.seed, r);
    CoupledState state({detail::initial_configuration(ctx, s.init)}, ctx.env, cfg.g, cfg.p, s.labels);
    EventStream stream(s.events, cfg.p);
    std::vector<CurrentObserver> none;
    const Observations obs = simulate(state, T, stream, none, times);
    Sample out{std::vector<Histogram>(deltas.size()), {}};
    for (const Snapshot& snap : obs.snapshots) {
      for (std::size_t d = 0; d < deltas.size(); ++d)
        if (snap.time > T - cfg.N * deltas[d])
          for (std::int64_t x : pr.sites) out.cesaro[d].add(finite_occupancy(snap.configs.front(), x));
      if (snap.time == T)
        for (std::int64_t x : pr.sites) out.instant.add(finite_occupancy(snap.configs.front(), x));
    }
    return out;
  });

  std::vector<Histogram> cesaro(deltas.size());
  Histogram instant;
  for (const Sample& s : samples) {
    for (std::size_t d = 0; d < deltas.size(); ++d) cesaro[d].merge(s.cesaro[d]);
    instant.merge(s.instant);
  }

  json rep = detail::report_header(cfg);
  json& m = rep["metrics"];
  m["site"] = pr.center;
  m["sites"] = pr.sites;
  m["window"] = {ctx.window.left, ctx.window.right};
  m["sample_times_per_replica"] = times.size();
  const double beta = local_fugacity(ctx, cfg, pr.u, cfg.t, m);
  const auto targets = targets_for(ctx, pr.sites, beta);

  json rows = json::array();
  std::vector<double> tv;
  std::ostringstream csv;
  csv << "delta,n,empirical,target\n";
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    tv.push_back(total_variation(cesaro[d], targets));
    rows.push_back({{"delta", deltas[d]},
                    {"samples", cesaro[d].total()},
                    {"tv", tv.back()},
                    {"tv_vs_instant", total_variation(cesaro[d], instant)},
                    {"mean", cesaro[d].mean()}});
    write_marginal(csv, fmt(deltas[d]) + ",", cesaro[d], targets);
  }
  m["deltas"] = rows;
  m["tv_instant"] = total_variation(instant, targets);

  if (P.value("check_trend", true) && deltas.size() > 1) {
    bool monotone = true;
    for (std::size_t d = 1; d < deltas.size(); ++d) monotone = monotone && tv[d] <= tv[d - 1];
    detail::add_check(rep, "tv_nonincreasing_as_delta_shrinks", monotone, json{{"deltas", deltas}, {"tv", tv}});
  }
  if (P.contains("max_tv")) detail::add_check(rep, "tv_smallest_delta", tv.back(), "<", P.at("max_tv").get<double>());
  if (P.contains("min_tv")) detail::add_check(rep, "tv_smallest_delta", tv.back(), ">", P.at("min_tv").get<double>());
  if (P.contains("max_tv_vs_instant")) {
    double worst = 0.0;
    for (const auto& row : rows) worst = std::max(worst, row.at("tv_vs_instant").get<double>());
    detail::add_check(rep, "tv_cesaro_vs_instant", worst, "<", P.at("max_tv_vs_instant").get<double>());
  }
  rep["files"] = {"cesaro.csv"};
  return Report{std::move(rep), {{"cesaro.csv", csv.str()}}};
}

// ---------------------------------------------------------------- convergence in time

Report run_convergence(const ExperimentConfig& cfg) {
  const json& P = cfg.params;
  const std::vector<std::int64_t> sites = P.value("sites", std::vector<std::int64_t>{0});
  std::vector<double> mult = P.value("multipliers", std::vector<double>{1.0, 2.0, 4.0});
  if (sites.empty() || mult.empty()) throw std::invalid_argument("convergence: need sites and multipliers");
  std::sort(mult.begin(), mult.end());
  if (!(mult.front() > 0.0)) throw std::invalid_argument("convergence: multipliers must be positive");
  const double base = cfg.horizon();
  const double horizon = base * mult.back();
  const Window region{*std::min_element(sites.begin(), sites.end()), *std::max_element(sites.begin(), sites.end())};
  const detail::Context ctx = detail::make_context(cfg, region, true, horizon);
  const int track = P.value("track", 0);

  // Left Cesàro density of the initial state.
  double rho;
  if (P.contains("target_density")) {
    rho = P.at("target_density").get<double>();
  } else if (cfg.initial.kind == InitialCondition::Kind::pattern) {
    std::int64_t s = 0;
    for (std::int64_t v : cfg.initial.pattern) s += v;
    rho = static_cast<double>(s) / static_cast<double>(cfg.initial.pattern.size());
  } else if (const auto c = cfg.initial.constant_density(cfg.g, ctx.env->law())) {
    rho = *c;
  } else {
    throw std::invalid_argument("convergence: give params.target_density for this initial state");
  }
  const double beta = detail::fugacity_for_density(ctx, rho);
  const auto targets = targets_for(ctx, sites, beta);
  std::vector<double> times;
  for (double k : mult) times.push_back(base * k);

  struct Sample {
    std::vector<std::vector<std::int64_t>> occ;  // per time, per site
    std::int64_t tracked = 0;
    std::int64_t crossed = 0;
  };
  const auto samples = detail::run_replicas(cfg.replicas, cfg.threads, [&](int r) {
    const detail::ReplicaSeeds s = detail::seeds_for(cfg.seed, r);
    Configuration xi = detail::initial_configuration(ctx, s.init);
    std::vector<Configuration> configs{xi};
    std::vector<std::int64_t> tag_sites;
    if (track > 0) {
      // Second-class particles: one excess ξ particle at each of the first
      // `track` occupied finite sites at or left of the origin.
      Configuration eta = xi;
      for (std::int64_t x = std::min<std::int64_t>(0, ctx.window.right); x >= ctx.window.left && static_cast<int>(tag_sites.size()) < track; --x)
        if (!eta[x].is_zero() && !eta[x].is_infinite()) {
          --eta[x];
          tag_sites.push_back(x);
        }
      configs = {eta, xi};
    }
    CoupledState state(configs, ctx.env, cfg.g, cfg.p, s.labels);
    if (track > 0) {
      state.set_classes(ClassStructure{{0}, 1});
      for (std::int64_t x : tag_sites) state.tag_xi(x);
    }
    EventStream stream(s.events, cfg.p);
    std::vector<CurrentObserver> none;
    const Observations obs = simulate(state, horizon, stream, none, times);
    Sample out;
    for (const Snapshot& snap : obs.snapshots) {
      std::vector<std::int64_t> row;
      for (std::int64_t x : sites) row.push_back(finite_occupancy(snap.configs.back(), x));
      out.occ.push_back(std::move(row));
    }
    for (const TaggedParticle& tp : state.tagged) {
      ++out.tracked;
      if (tp.alive && tp.site > 0) ++out.crossed;
    }
    return out;
  });

  json rep = detail::report_header(cfg);
  json& m = rep["metrics"];
  m["sites"] = sites;
  m["window"] = {ctx.window.left, ctx.window.right};
  m["density"] = rho;
  m["critical_density"] = detail::num(ctx.critical_density());
  m["fugacity"] = beta;
  std::ostringstream csv;
  csv << "time,n,empirical,target\n";
  std::vector<double> tv;
  json rows = json::array();
  for (std::size_t k = 0; k < times.size(); ++k) {
    Histogram h;
    for (const Sample& s : samples)
      for (std::int64_t v : s.occ.at(k)) h.add(v);
    tv.push_back(total_variation(h, targets));
    rows.push_back({{"time", times[k]}, {"tv", tv.back()}, {"mean", h.mean()}});
    write_marginal(csv, fmt(times[k]) + ",", h, targets);
  }
  m["times"] = rows;
  if (P.value("check_trend", true) && times.size() > 1) {
    bool decreasing = true;
    for (std::size_t k = 1; k < tv.size(); ++k) decreasing = decreasing && tv[k] <= tv[k - 1];
    detail::add_check(rep, "tv_nonincreasing_in_time", decreasing, json{{"times", times}, {"tv", tv}});
  }
  if (P.contains("max_tv")) detail::add_check(rep, "tv_final", tv.back(), "<", P.at("max_tv").get<double>());
  if (track > 0) {
    std::int64_t tracked = 0, crossed = 0;
    for (const Sample& s : samples) {
      tracked += s.tracked;
      crossed += s.crossed;
    }
    const double frac = tracked == 0 ? 0.0 : static_cast<double>(crossed) / static_cast<double>(tracked);
    m["tracked"] = tracked;
    m["crossed_fraction"] = frac;
    if (P.contains("min_crossed_fraction"))
      detail::add_check(rep, "crossed_fraction", frac, ">=", P.at("min_crossed_fraction").get<double>());
  }
  rep["files"] = {"convergence.csv"};
  return Report{std::move(rep), {{"convergence.csv", csv.str()}}};
}

}  // namespace zrp

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

double finite(const ExtendedInt& v, const char* what) {
  if (!v.is_finite()) throw std::runtime_error(std::string(what) + ": infinite value");
  return static_cast<double>(v.value());
}

}  // namespace

// ---------------------------------------------------------------- currents

Report run_current_checks(const ExperimentConfig& cfg) {
  const json& P = cfg.params;
  const std::string mode =
      P.value("mode", std::string(cfg.initial.kind == InitialCondition::Kind::source ? "source" : "stationary"));
  const double T = cfg.horizon();
  json rep = detail::report_header(cfg);
  json& m = rep["metrics"];
  std::ostringstream csv;
  write_current_header(csv);

  if (mode == "source") {
    if (cfg.initial.kind != InitialCondition::Kind::source) throw std::invalid_argument("current: source mode needs a source initial state");
    const std::int64_t y = cfg.initial.site;
    // Every site left of y is saturated, so only the right side needs room.
    ExperimentConfig local = cfg;
    if (!local.window) local.window = std::pair{y - 1, y + static_cast<std::int64_t>(std::ceil(cfg.V * T))};
    const detail::Context ctx = detail::make_context(local, Window{y, y}, false);
    const Window right{y + 1, ctx.window.right};
    const auto rates = detail::run_replicas(cfg.replicas, cfg.threads, [&](int r) {
      const detail::ReplicaSeeds s = detail::seeds_for(cfg.seed, r);
      CoupledState state({detail::initial_configuration(ctx, s.init)}, ctx.env, cfg.g, cfg.p, s.labels);
      EventStream stream(s.events, cfg.p);
      std::vector<CurrentObserver> none;
      SimulationOptions opts;
      opts.record_snapshots = false;
      simulate(state, T, stream, none, {}, opts);
      if (!state.configs.front()[ctx.window.right].is_zero())
        throw std::runtime_error("current: particles reached the right end of the window");
      return finite(state.configs.front().mass(right), "mass");
    });
    std::vector<double> per;
    for (std::size_t r = 0; r < rates.size(); ++r) {
      per.push_back(rates[r] / T);
      csv << r << ',' << fmt(T) << ",0," << fmt(rates[r]) << '\n';
    }
    const double c = ctx.c();
    const double bound = (2.0 * cfg.p - 1.0) * c + cfg.p * ((*ctx.env)(y) - c);
    const Band b = band(per);
    m["window"] = {ctx.window.left, ctx.window.right};
    m["rate"] = b.to_json();
    m["bound"] = bound;
    m["ratio"] = b.mean / bound;
    detail::add_check(rep, "rate_relative_error", std::abs(b.mean / bound - 1.0), "<", P.value("tolerance", 0.02));
    detail::add_check(rep, "rate_below_bound_plus_3se", b.mean - 3.0 * b.se, "<=", bound);
  } else if (mode == "stationary") {
    if (cfg.initial.kind != InitialCondition::Kind::product) throw std::invalid_argument("current: stationary mode needs a product initial state");
    const std::int64_t site = P.value("observer_site", std::int64_t{0});
    const std::vector<double> velocities = P.value("velocities", std::vector<double>{});
    std::int64_t lo = site, hi = site + 1;
    for (double v : velocities) {
      lo = std::min(lo, site - static_cast<std::int64_t>(std::ceil(std::max(0.0, -v) * T)));
      hi = std::max(hi, site + 1 + static_cast<std::int64_t>(std::ceil(std::max(0.0, v) * T)));
    }
    const Window region{lo, hi};
    ExperimentConfig local = cfg;
    const bool reservoir = cfg.boundary == BoundaryMode::reservoir;
    if (reservoir && !local.window) {
      // Reservoirs at the product fugacity keep the product measure invariant.
      const std::int64_t w = P.value("half_width", std::int64_t{20});
      local.window = std::pair{lo - w, hi + w};
    }
    const detail::Context ctx = detail::make_context(local, region, !reservoir);
    const double beta = detail::product_fugacity(ctx);
    const double rho = rbar(cfg.g, ctx.env->law(), beta);
    const double record_every = P.value("record_every", T / 10.0);
    std::vector<double> record_times;
    for (double s = record_every; s < T; s += record_every) record_times.push_back(s);

    const auto runs = detail::run_replicas(cfg.replicas, cfg.threads, [&](int r) {
      const detail::ReplicaSeeds s = detail::seeds_for(cfg.seed, r);
      CoupledState state({detail::initial_configuration(ctx, s.init)}, ctx.env, cfg.g, cfg.p, s.labels);
      EventStream stream(s.events, cfg.p);
      std::vector<CurrentObserver> obs{CurrentObserver::fixed(site, 0)};
      for (std::size_t i = 0; i < velocities.size(); ++i)
        obs.push_back(CurrentObserver::linear(site, velocities[i], T, static_cast<int>(i) + 1));
      SimulationOptions opts;
      opts.record_snapshots = false;
      return simulate(state, T, stream, obs, record_times, opts).currents;
    });
    std::vector<std::vector<double>> per(velocities.size() + 1);
    for (std::size_t r = 0; r < runs.size(); ++r) {
      write_current_rows(csv, static_cast<int>(r), runs[r]);
      for (const CurrentRecord& rec : runs[r])
        if (rec.time == T) per[static_cast<std::size_t>(rec.observer)].push_back(finite(rec.gamma.front(), "current") / T);
    }
    const double max_bias = P.value("max_bias", 0.015);
    json obs_json = json::array();
    for (std::size_t i = 0; i < per.size(); ++i) {
      const double v = i == 0 ? 0.0 : velocities[i - 1];
      const double expected = (2.0 * cfg.p - 1.0) * beta - v * rho;
      const Band b = band(per[i]);
      obs_json.push_back({{"id", i}, {"velocity", v}, {"rate", b.to_json()}, {"expected", expected}, {"bias", b.mean - expected}});
      const std::string tag = "observer_" + std::to_string(i);
      detail::add_check(rep, tag + "_within_3se", b.contains(expected), json{{"mean", b.mean}, {"se", b.se}, {"expected", expected}});
      detail::add_check(rep, tag + "_abs_bias", std::abs(b.mean - expected), "<", max_bias);
    }
    m["window"] = {ctx.window.left, ctx.window.right};
    m["fugacity"] = beta;
    m["density"] = rho;
    m["observers"] = obs_json;
  } else {
    throw std::invalid_argument("current: unknown mode '" + mode + "'");
  }
  rep["files"] = {"currents.csv"};
  return Report{std::move(rep), {{"currents.csv", csv.str()}}};
}

// ---------------------------------------------------------------- condensation

Report run_condensation(const ExperimentConfig& cfg) {
  const json& P = cfg.params;
  if (cfg.boundary != BoundaryMode::closed) throw std::invalid_argument("condensation: needs closed boundaries");
  const std::int64_t slow = P.value("slow_site", std::int64_t{0});
  std::vector<std::int64_t> offsets = P.value("fast_sites", std::vector<std::int64_t>{3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
  if (offsets.empty()) throw std::invalid_argument("condensation: need fast sites");
  std::vector<std::int64_t> fast;
  for (std::int64_t z : offsets) fast.push_back(slow + z);
  const double dt = P.value("sample_dt", 1.0);
  const double from = P.value("from_fraction", 0.5);
  const double T = cfg.horizon();
  const Window region{std::min(slow - 1, *std::min_element(fast.begin(), fast.end())),
                      std::max(slow, *std::max_element(fast.begin(), fast.end()))};
  const detail::Context ctx = detail::make_context(cfg, region);
  const auto rho0 = cfg.initial.constant_density(cfg.g, ctx.env->law());
  if (!rho0) throw std::invalid_argument("condensation: initial state needs a constant density");
  const bool supercritical = *rho0 > ctx.critical_density();

  std::vector<double> times;
  for (double s = from * T; s < T; s += dt) times.push_back(s);
  times.push_back(T);
  if (times.size() < 3) throw std::invalid_argument("condensation: too few sample times");

  struct Sample {
    std::vector<double> occ;  // slow-site occupancy at each sample time
    double inflow = 0.0;
    double outflow = 0.0;
    std::vector<std::int64_t> fast;
  };
  const Window in_right{slow, ctx.window.right};
  const Window out_right{slow + 1, ctx.window.right};
  const auto samples = detail::run_replicas(cfg.replicas, cfg.threads, [&](int r) {
    const detail::ReplicaSeeds s = detail::seeds_for(cfg.seed, r);
    CoupledState state({detail::initial_configuration(ctx, s.init)}, ctx.env, cfg.g, cfg.p, s.labels);
    EventStream stream(s.events, cfg.p);
    std::vector<CurrentObserver> none;
    const Observations obs = simulate(state, T, stream, none, times);
    Sample out;
    // Closed boundaries conserve mass, so the current across a bond equals
    // the change of the mass to its right.
    const Configuration& first = obs.snapshots.front().configs.front();
    const Configuration& last = obs.snapshots.back().configs.front();
    const double span = obs.snapshots.back().time - obs.snapshots.front().time;
    out.inflow = (finite(last.mass(in_right), "mass") - finite(first.mass(in_right), "mass")) / span;
    out.outflow = (finite(last.mass(out_right), "mass") - finite(first.mass(out_right), "mass")) / span;
    for (const Snapshot& snap : obs.snapshots) out.occ.push_back(static_cast<double>(snap.configs.front()[slow].count()));
    for (std::int64_t x : fast) out.fast.push_back(last[x].count());
    return out;
  });

  std::vector<double> inflow, outflow, slope;
  Histogram fast_hist;
  std::ostringstream occ_csv;
  occ_csv << "replica,time,occ\n";
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const Sample& s = samples[r];
    inflow.push_back(s.inflow);
    outflow.push_back(s.outflow);
    slope.push_back(ols_slope(times, s.occ));
    for (std::int64_t v : s.fast) fast_hist.add(v);
    for (std::size_t k = 0; k < times.size(); ++k) occ_csv << r << ',' << fmt(times[k]) << ',' << fmt(s.occ[k]) << '\n';
  }
  const Band bin = band(inflow), bout = band(outflow), bslope = band(slope);
  const double beta = supercritical ? ctx.c() : detail::fugacity_for_density(ctx, *rho0);
  std::vector<ThetaMarginal> targets;
  for (std::int64_t x : fast) targets.push_back(detail::site_marginal(ctx, x, beta));
  const double tv = total_variation(fast_hist, targets);
  const double plateau = ctx.flux->plateau_value();
  const double baseline = bin.mean - bout.mean;

  json rep = detail::report_header(cfg);
  json& m = rep["metrics"];
  m["window"] = {ctx.window.left, ctx.window.right};
  m["initial_density"] = *rho0;
  m["critical_density"] = detail::num(ctx.critical_density());
  m["supercritical"] = supercritical;
  m["plateau_flux"] = plateau;
  m["inflow"] = bin.to_json();
  m["outflow"] = bout.to_json();
  m["slow_site_slope"] = bslope.to_json();
  m["mass_balance_baseline"] = baseline;
  m["fast_site_fugacity"] = beta;
  m["fast_site_tv"] = tv;
  if (supercritical) {
    detail::add_check(rep, "downstream_current_relative_error", std::abs(bout.mean / plateau - 1.0), "<", P.value("current_tolerance", 0.05));
    detail::add_check(rep, "fast_site_tv", tv, "<", P.value("max_tv", 0.08));
    detail::add_check(rep, "slow_site_growth", bslope.mean > 0.0 && bslope.mean >= 0.5 * baseline,
                      json{{"slope", bslope.mean}, {"baseline", baseline}});
  } else {
    detail::add_check(rep, "slow_site_slope_consistent_with_zero", bslope.contains(0.0), bslope.to_json());
  }
  std::ostringstream marg;
  marg << "n,empirical,target\n";
  for (std::int64_t n = 0; n <= std::max<std::int64_t>(fast_hist.max_value(), 30); ++n) {
    double t = 0.0;
    for (const ThetaMarginal& th : targets) t += th.pmf(n) / static_cast<double>(targets.size());
    marg << n << ',' << fmt(fast_hist.frequency(n)) << ',' << fmt(t) << '\n';
  }
  rep["files"] = {"slow_site.csv", "fast_marginal.csv"};
  return Report{std::move(rep), {{"slow_site.csv", occ_csv.str()}, {"fast_marginal.csv", marg.str()}}};
}

// ---------------------------------------------------------------- pathwise coupling properties

Report run_coupling_checks(const ExperimentConfig& cfg) {
  const json& P = cfg.params;
  const std::int64_t hw = P.value("half_width", std::int64_t{40});
  const int max_occ = P.value("max_occupancy", 3);
  const double v = P.value("velocity", 0.5);
  const int checkpoints = P.value("checkpoints", 100);
  const std::int64_t a = P.value("a", std::int64_t{-5});
  const std::int64_t b = P.value("b", std::int64_t{5});
  const std::int64_t y = P.value("source_site", std::int64_t{0});
  const double T = cfg.horizon();
  if (!(a < b)) throw std::invalid_argument("coupling: need a < b");
  ExperimentConfig local = cfg;
  if (!local.window) local.window = std::pair{-hw, hw};
  const detail::Context ctx = detail::make_context(local, Window{a, b}, false);
  const Window w = ctx.window;
  std::vector<double> times;
  for (int k = 1; k <= checkpoints; ++k) times.push_back(T * k / checkpoints);

  enum { attractive, disc_monotone, identity, comparison, source_domination, kProps };
  const char* names[kProps] = {"attractiveness", "discrepancy_nonincreasing", "current_identity", "current_comparison",
                               "source_domination"};

  const auto results = detail::run_replicas(cfg.replicas, cfg.threads, [&](int r) {
    const detail::ReplicaSeeds s = detail::seeds_for(cfg.seed, r);
    CounterRng rng(s.init);
    std::vector<Occupancy> z1, z2, lo;
    for (std::int64_t x = w.left; x <= w.right; ++x) {
      const auto u1 = static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(max_occ) + 1));
      const auto u2 = static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(max_occ) + 1));
      z1.emplace_back(u1);
      z2.emplace_back(u2);
      lo.emplace_back(std::min(u1, u2));
    }
    const std::vector<Configuration> initial{Configuration(w, z1), Configuration(w, z2), Configuration(w, lo), make_source(y, w)};
    CoupledState state(initial, ctx.env, cfg.g, cfg.p, s.labels);
    EventStream stream(s.events, cfg.p);
    std::vector<CurrentObserver> obs{CurrentObserver::fixed(a, 0), CurrentObserver::fixed(b, 1),
                                     CurrentObserver::fixed(y, 2), CurrentObserver::linear(0, v, T, 3)};
    const Observations o = simulate(state, T, stream, obs, times);

    // sup_x [F_{x0}(x, ζ_0) − F_{x0}(x, ζ'_0)] for the finite configs.
    auto sup_gap = [&](std::size_t i, std::size_t j, std::int64_t x0) {
      std::int64_t best = 0;
      for (std::int64_t x = w.left; x <= w.right; ++x) {
        const ExtendedInt d = cumulative_F(x0, x, initial[i]) - cumulative_F(x0, x, initial[j]);
        best = std::max(best, d.value());
      }
      return best;
    };
    const std::pair<std::size_t, std::size_t> pairs[] = {{0, 1}, {1, 0}, {0, 2}, {2, 0}, {1, 2}, {2, 1}};
    std::vector<std::vector<std::int64_t>> gaps;
    for (const auto& [i, j] : pairs) {
      std::vector<std::int64_t> g;
      for (const CurrentObserver& ob : obs) g.push_back(sup_gap(i, j, ob.start()));
      gaps.push_back(std::move(g));
    }

    std::array<bool, kProps> ok{};
    ok.fill(true);
    ExtendedInt last_d01 = discrepancy_count(initial[0], initial[1]);
    ExtendedInt last_d20 = discrepancy_count(initial[2], initial[0]);
    std::size_t rec = 0;
    for (const Snapshot& snap : o.snapshots) {
      const auto& c = snap.configs;
      ok[attractive] = ok[attractive] && c[2].leq(c[0]) && c[2].leq(c[1]);
      const ExtendedInt d01 = discrepancy_count(c[0], c[1]);
      const ExtendedInt d20 = discrepancy_count(c[2], c[0]);
      ok[disc_monotone] = ok[disc_monotone] && d01 <= last_d01 && d20 <= last_d20;
      last_d01 = d01;
      last_d20 = d20;
      // Observer records at this time, in id order.
      std::vector<const CurrentRecord*> at;
      while (rec < o.currents.size() && o.currents[rec].time == snap.time) at.push_back(&o.currents[rec++]);
      if (at.size() != obs.size()) throw std::logic_error("coupling: missing current records");
      for (std::size_t k = 0; k < 3; ++k) {
        ExtendedInt lhs = at[1]->gamma[k] - at[0]->gamma[k];
        ExtendedInt rhs(0);
        for (std::int64_t x = a + 1; x <= b; ++x) rhs = rhs + ExtendedInt::from(initial[k][x]) - ExtendedInt::from(c[k][x]);
        ok[identity] = ok[identity] && lhs == rhs;
        ok[source_domination] = ok[source_domination] && at[2]->gamma[k] <= at[2]->gamma[3];
      }
      for (std::size_t p = 0; p < std::size(pairs); ++p)
        for (std::size_t q = 0; q < obs.size(); ++q) {
          const auto [i, j] = pairs[p];
          ok[comparison] = ok[comparison] && at[q]->gamma[i] - at[q]->gamma[j] >= ExtendedInt(-gaps[p][q]);
        }
    }
    return ok;
  });

  json rep = detail::report_header(cfg);
  json& m = rep["metrics"];
  m["window"] = {w.left, w.right};
  m["runs"] = cfg.replicas;
  for (int k = 0; k < kProps; ++k) {
    int passed = 0;
    for (const auto& ok : results) passed += ok[static_cast<std::size_t>(k)];
    m[names[k]] = passed;
    detail::add_check(rep, names[k], passed == cfg.replicas, json{{"runs_passed", passed}, {"runs", cfg.replicas}});
  }
  return Report{std::move(rep), {}};
}

}  // namespace zrp

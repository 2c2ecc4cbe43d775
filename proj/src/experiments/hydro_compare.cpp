#include "common.hpp"

#include "zrp/simulate.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace zrp {

using nlohmann::json;
using detail::fmt;

namespace {

// Exact average of a cell-average profile over [a, b].
double grid_average(const GridProfile& p, double a, double b) {
  double s = 0.0;
  const auto first = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor((a - p.x_min) / p.dx)));
  for (Eigen::Index i = first; i < p.size(); ++i) {
    const double lo = std::max(a, p.x_min + i * p.dx);
    const double hi = std::min(b, p.x_min + (i + 1) * p.dx);
    if (lo >= b) break;
    if (hi > lo) s += p.rho(i) * (hi - lo);
  }
  return s / (b - a);
}

}  // namespace

Report run_hydro_compare(const ExperimentConfig& cfg) {
  const json& P = cfg.params;
  const InitialCondition& ic = cfg.initial;
  if (ic.kind == InitialCondition::Kind::source) throw std::invalid_argument("hydro: source data have no bounded profile");
  const double a = P.at("domain").at(0).get<double>();
  const double b = P.at("domain").at(1).get<double>();
  if (!(b > a)) throw std::invalid_argument("hydro: empty domain");
  const std::int64_t box = P.value("box", std::max<std::int64_t>(1, std::llround(cfg.N / 10.0)));
  const double dx = P.value("dx", 1.0 / 400.0);
  const double max_l1 = P.value("max_l1", 0.05);
  const double scheme_max_l1 = P.value("scheme_max_l1", 0.01);

  const std::int64_t s0 = std::llround(a * cfg.N);
  const std::int64_t boxes = static_cast<std::int64_t>(std::floor((b - a) * cfg.N / static_cast<double>(box)));
  if (boxes < 1) throw std::invalid_argument("hydro: domain narrower than one box");
  const Window region{s0, s0 + boxes * box - 1};
  const detail::Context ctx = detail::make_context(cfg, region);
  const FluxFunction& f = *ctx.flux;
  const double h = static_cast<double>(box) / cfg.N;

  // Macroscopic initial profile.
  PiecewiseConstant profile;
  if (ic.kind == InitialCondition::Kind::profile) {
    profile = ic.profile;
  } else {
    profile.values = {*ic.constant_density(cfg.g, ctx.env->law())};
  }
  for (double v : profile.values)
    if (v > f.rho_max()) throw std::invalid_argument("hydro: density outside the flux table domain");

  // Particle system.
  const auto boxed = detail::run_replicas(cfg.replicas, cfg.threads, [&](int r) {
    const detail::ReplicaSeeds s = detail::seeds_for(cfg.seed, r);
    CoupledState state({detail::initial_configuration(ctx, s.init)}, ctx.env, cfg.g, cfg.p, s.labels);
    EventStream stream(s.events, cfg.p);
    std::vector<CurrentObserver> none;
    SimulationOptions opts;
    opts.record_snapshots = false;
    simulate(state, ctx.T, stream, none, {}, opts);
    const Configuration& c = state.configs.front();
    std::vector<double> dens(static_cast<std::size_t>(boxes));
    for (std::int64_t k = 0; k < boxes; ++k) {
      const ExtendedInt m = c.mass(Window{s0 + k * box, s0 + (k + 1) * box - 1});
      if (!m.is_finite()) throw std::runtime_error("hydro: infinite occupancy inside the domain");
      dens[static_cast<std::size_t>(k)] = static_cast<double>(m.value()) / static_cast<double>(box);
    }
    return dens;
  });

  // Godunov reference over the whole window.
  const double lo = static_cast<double>(ctx.window.left) / cfg.N;
  const double hi = static_cast<double>(ctx.window.right + 1) / cfg.N;
  const auto cells = static_cast<Eigen::Index>(std::ceil((hi - lo) / dx));
  EvolveStats st;
  const GridProfile godunov = evolve(f, profile.discretize(lo, lo + cells * dx, cells), cfg.t, 0.9, &st);

  auto box_lo = [&](std::int64_t k) { return static_cast<double>(s0 + k * box) / cfg.N; };
  std::vector<double> ref_godunov(static_cast<std::size_t>(boxes));
  for (std::int64_t k = 0; k < boxes; ++k) ref_godunov[static_cast<std::size_t>(k)] = grid_average(godunov, box_lo(k), box_lo(k) + h);

  // Exact Riemann solution for one-jump data.
  const bool riemann = profile.breakpoints.size() == 1;
  auto exact_at = [&](double u) {
    return riemann_exact(f, profile.values[0], profile.values[1], (u - profile.breakpoints[0]) / cfg.t).value;
  };
  std::vector<double> ref_exact;
  if (riemann) {
    const int samples = 256;
    for (std::int64_t k = 0; k < boxes; ++k) {
      double s = 0.0;
      for (int i = 0; i < samples; ++i) s += exact_at(box_lo(k) + (i + 0.5) * h / samples);
      ref_exact.push_back(s / samples);
    }
  } else if (profile.breakpoints.empty()) {
    ref_exact.assign(static_cast<std::size_t>(boxes), profile.values[0]);
  }

  std::vector<double> mean(static_cast<std::size_t>(boxes), 0.0);
  for (const auto& d : boxed)
    for (std::size_t k = 0; k < d.size(); ++k) mean[k] += d[k] / cfg.replicas;
  auto l1 = [&](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += h * std::abs(x[k] - y[k]);
    return s;
  };

  json rep = detail::report_header(cfg);
  json& m = rep["metrics"];
  m["window"] = {ctx.window.left, ctx.window.right};
  m["box_sites"] = box;
  m["boxes"] = boxes;
  m["godunov"] = {{"dx", godunov.dx}, {"steps", st.steps}, {"dt", st.dt}, {"mass_error", std::abs(godunov.mass() - (profile.discretize(lo, lo + cells * dx, cells).mass() + st.influx - st.outflux))}};
  std::vector<double> per_rep_godunov;
  for (const auto& d : boxed) per_rep_godunov.push_back(l1(d, ref_godunov));
  m["l1_vs_godunov"] = {{"mean_profile", l1(mean, ref_godunov)}, {"per_replica", band(per_rep_godunov).to_json()}};
  const std::vector<double>* reference = &ref_godunov;
  if (!ref_exact.empty()) {
    std::vector<double> per_rep_exact;
    for (const auto& d : boxed) per_rep_exact.push_back(l1(d, ref_exact));
    m["l1_vs_exact"] = {{"mean_profile", l1(mean, ref_exact)}, {"per_replica", band(per_rep_exact).to_json()}};
    reference = &ref_exact;
  }
  detail::add_check(rep, ref_exact.empty() ? "l1_empirical_vs_godunov" : "l1_empirical_vs_exact", l1(mean, *reference), "<", max_l1);

  std::ostringstream emp, god, ex;
  emp << "x,rho\n";
  for (std::int64_t k = 0; k < boxes; ++k) emp << fmt(box_lo(k) + 0.5 * h) << ',' << fmt(mean[static_cast<std::size_t>(k)]) << '\n';
  write_profile_csv(god, godunov);
  rep["files"] = {"profile_empirical.csv", "profile_godunov.csv"};
  Report out;

  if (riemann) {
    // Scheme accuracy on the Godunov cells inside the domain.
    double scheme = 0.0;
    ex << "x,rho\n";
    for (Eigen::Index i = 0; i < godunov.size(); ++i) {
      const double cl = godunov.x_min + i * godunov.dx;
      if (cl < a - 1e-12 || cl + godunov.dx > b + 1e-12) continue;
      double s = 0.0;
      for (int k = 0; k < 8; ++k) s += exact_at(cl + (k + 0.5) * godunov.dx / 8);
      scheme += godunov.dx * std::abs(godunov.rho(i) - s / 8);
      ex << fmt(godunov.center(i)) << ',' << fmt(s / 8) << '\n';
    }
    m["scheme_l1_vs_exact"] = scheme;
    detail::add_check(rep, "scheme_l1_vs_exact", scheme, "<", scheme_max_l1);
    rep["files"].push_back("profile_exact.csv");
  }
  out.json = std::move(rep);
  out.files = {{"profile_empirical.csv", emp.str()}, {"profile_godunov.csv", god.str()}};
  if (riemann) out.files.emplace_back("profile_exact.csv", ex.str());
  return out;
}

}  // namespace zrp

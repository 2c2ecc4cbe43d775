#include "zrp/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace zrp {

GridProfile cell_average(const std::function<double(double)>& fn, double x_min, double x_max, Eigen::Index cells,
                         int samples) {
  if (!(x_max > x_min) || cells < 1 || samples < 1) throw std::invalid_argument("cell_average: bad grid");
  GridProfile p{x_min, (x_max - x_min) / static_cast<double>(cells), Eigen::VectorXd(cells), 0.0};
  for (Eigen::Index i = 0; i < cells; ++i) {
    double s = 0.0;
    for (int k = 0; k < samples; ++k) s += fn(x_min + (static_cast<double>(i) + (k + 0.5) / samples) * p.dx);
    p.rho(i) = s / samples;
  }
  return p;
}

// ---------------------------------------------------------------- piecewise-constant data

double PiecewiseConstant::operator()(double x) const {
  const auto j = std::upper_bound(breakpoints.begin(), breakpoints.end(), x) - breakpoints.begin();
  return values[static_cast<std::size_t>(j)];
}

double PiecewiseConstant::average(double a, double b) const {
  if (!(b > a)) return (*this)(a);
  double s = 0.0;
  double lo = a;
  auto j = std::upper_bound(breakpoints.begin(), breakpoints.end(), a) - breakpoints.begin();
  while (lo < b) {
    const double hi = static_cast<std::size_t>(j) < breakpoints.size() ? std::min(b, breakpoints[static_cast<std::size_t>(j)]) : b;
    s += values[static_cast<std::size_t>(j)] * (hi - lo);
    lo = hi;
    ++j;
  }
  return s / (b - a);
}

GridProfile PiecewiseConstant::discretize(double x_min, double x_max, Eigen::Index cells) const {
  if (!(x_max > x_min) || cells < 1) throw std::invalid_argument("discretize: bad grid");
  GridProfile p{x_min, (x_max - x_min) / static_cast<double>(cells), Eigen::VectorXd(cells), 0.0};
  for (Eigen::Index i = 0; i < cells; ++i) p.rho(i) = average(x_min + i * p.dx, x_min + (i + 1) * p.dx);
  return p;
}

PiecewiseConstant PiecewiseConstant::from_json(const nlohmann::json& j) {
  PiecewiseConstant pc{j.at("breakpoints").get<std::vector<double>>(), j.at("values").get<std::vector<double>>()};
  if (pc.values.size() != pc.breakpoints.size() + 1)
    throw std::invalid_argument("piecewise profile: need one more value than breakpoints");
  for (std::size_t i = 1; i < pc.breakpoints.size(); ++i)
    if (!(pc.breakpoints[i] > pc.breakpoints[i - 1]))
      throw std::invalid_argument("piecewise profile: breakpoints must increase");
  for (double v : pc.values)
    if (!(v >= 0.0)) throw std::invalid_argument("piecewise profile: densities must be nonnegative");
  return pc;
}

nlohmann::json PiecewiseConstant::to_json() const { return {{"breakpoints", breakpoints}, {"values", values}}; }

// ---------------------------------------------------------------- fluxes

double godunov_flux(const FluxFunction& f, double rho_left, double rho_right) {
  const bool take_min = rho_left <= rho_right;
  const double a = std::min(rho_left, rho_right);
  const double b = std::max(rho_left, rho_right);
  double best = f(rho_left);
  auto consider = [&](double r) {
    const double v = f(r);
    best = take_min ? std::min(best, v) : std::max(best, v);
  };
  consider(rho_right);
  const Eigen::VectorXd& grid = f.grid();
  const double* first = grid.data();
  const double* last = first + grid.size();
  for (const double* it = std::upper_bound(first, last, a); it != last && *it < b; ++it) consider(*it);
  return best;
}

namespace {

// Upwind values f(ρ_i) for the whole profile; equal to the Godunov flux
// because the table is nondecreasing.
Eigen::VectorXd flux_values(const FluxFunction& f, const Eigen::VectorXd& rho) {
  Eigen::VectorXd out(rho.size());
  for (Eigen::Index i = 0; i < rho.size(); ++i) out(i) = f(rho(i));
  return out;
}

}  // namespace

GridProfile evolve(const FluxFunction& f, const GridProfile& profile, double T, double cfl, EvolveStats* stats) {
  if (!(cfl > 0.0 && cfl < 1.0)) throw std::invalid_argument("evolve: cfl must lie in (0,1)");
  if (!(T >= 0.0)) throw std::invalid_argument("evolve: negative horizon");
  if (profile.size() < 1 || !(profile.dx > 0.0)) throw std::invalid_argument("evolve: empty profile");
  if ((profile.rho.array() < 0.0).any()) throw std::invalid_argument("evolve: negative density");
  const Eigen::VectorXd& vals = f.values();
  for (Eigen::Index i = 1; i < vals.size(); ++i)
    if (vals(i) < vals(i - 1)) throw std::invalid_argument("evolve: flux table is not nondecreasing");
  const double slope = 1.1 * f.max_slope();
  if (!(slope > 0.0) || !std::isfinite(slope)) throw std::invalid_argument("evolve: unusable flux slope");
  const double dt_max = cfl * profile.dx / slope;
  const int steps = T == 0.0 ? 0 : static_cast<int>(std::ceil(T / dt_max));
  const double dt = steps == 0 ? 0.0 : T / steps;
  if (dt * slope > profile.dx) throw std::invalid_argument("evolve: unstable step");

  GridProfile out = profile;
  const Eigen::Index n = out.size();
  const double lambda = dt / out.dx;
  EvolveStats st{steps, dt, 0.0, 0.0};
  Eigen::VectorXd interface(n + 1);
  for (int s = 0; s < steps; ++s) {
    const Eigen::VectorXd fv = flux_values(f, out.rho);
    // Interface i sits between cells i−1 and i; ghosts copy the end cells.
    interface(0) = fv(0);
    interface.segment(1, n) = fv;
    st.influx += dt * interface(0);
    st.outflux += dt * interface(n);
    out.rho -= lambda * (interface.tail(n) - interface.head(n));
  }
  out.rho = out.rho.cwiseMax(0.0);
  out.time = profile.time + T;
  if (stats) *stats = st;
  return out;
}

// ---------------------------------------------------------------- Riemann problems

namespace {

struct Optimizers {
  double lower;
  double upper;
};

// inf/sup of argmax over [a,b] of h(r) = sign·(f(r) − ξ r). Candidates are
// the endpoints and table nodes; an isolated maximum is refined by golden
// section and plateau edges by bisection, using the exact flux when known.
Optimizers argmax(const FluxFunction& f, double a, double b, double xi, double sign) {
  auto h_table = [&](double r) { return sign * (f(r) - xi * r); };
  auto h_exact = [&](double r) { return sign * (f.exact(r) - xi * r); };
  if (b <= a) return {a, a};
  std::vector<double> nodes{a};
  const Eigen::VectorXd& grid = f.grid();
  const double* first = grid.data();
  const double* last = first + grid.size();
  for (const double* it = std::upper_bound(first, last, a); it != last && *it < b; ++it) nodes.push_back(*it);
  nodes.push_back(b);
  std::vector<double> h(nodes.size());
  double best = -kInfinity;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    h[i] = h_table(nodes[i]);
    best = std::max(best, h[i]);
  }
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  std::size_t lo = 0;
  while (h[lo] < best - tol) ++lo;
  std::size_t hi = nodes.size() - 1;
  while (h[hi] < best - tol) --hi;

  if (lo == hi) {
    // Golden section on the exact flux between the neighbouring nodes.
    double l = nodes[lo > 0 ? lo - 1 : lo];
    double r = nodes[hi + 1 < nodes.size() ? hi + 1 : hi];
    if (r <= l) return {nodes[lo], nodes[lo]};
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = r - phi * (r - l);
    double d = l + phi * (r - l);
    double hc = h_exact(c);
    double hd = h_exact(d);
    for (int it = 0; it < 100 && r - l > 1e-14 * std::max(1.0, r); ++it) {
      if (hc >= hd) {
        r = d;
        d = c;
        hd = hc;
        c = r - phi * (r - l);
        hc = h_exact(c);
      } else {
        l = c;
        c = d;
        hc = hd;
        d = l + phi * (r - l);
        hd = h_exact(d);
      }
    }
    double x = 0.5 * (l + r);
    // Endpoint maxima stay on the endpoint.
    if (lo == 0 && h_exact(a) >= h_exact(x)) x = a;
    if (hi == nodes.size() - 1 && h_exact(b) >= h_exact(x)) x = b;
    return {x, x};
  }
  // Plateau: bisect each edge between the outside and inside nodes.
  const double level = h_exact(nodes[lo]);
  auto edge = [&](double outside, double inside) {
    for (int it = 0; it < 200 && std::abs(inside - outside) > 1e-15 * std::max(1.0, std::abs(inside)); ++it) {
      const double m = 0.5 * (outside + inside);
      if (h_exact(m) >= level - tol)
        inside = m;
      else
        outside = m;
    }
    return inside;
  };
  const double lower = lo > 0 ? edge(nodes[lo - 1], nodes[lo]) : nodes[lo];
  const double upper = hi + 1 < nodes.size() ? edge(nodes[hi + 1], nodes[hi]) : nodes[hi];
  return {lower, upper};
}

}  // namespace

RiemannValue riemann_exact(const FluxFunction& f, double rho_l, double rho_r, double xi) {
  if (!(rho_l >= 0.0 && rho_r >= 0.0)) throw std::invalid_argument("riemann_exact: negative state");
  if (rho_l >= rho_r) {
    const Optimizers o = argmax(f, rho_r, rho_l, xi, 1.0);
    return {o.lower, o.lower, o.upper};
  }
  const Optimizers o = argmax(f, rho_l, rho_r, xi, -1.0);
  return {o.upper, o.lower, o.upper};
}

SourceLimits riemann_source_limits(const FluxFunction& f, double rho, double t, double u) {
  if (!(t > 0.0)) throw std::invalid_argument("riemann_source_limits: t must be positive");
  if (!(rho >= 0.0)) throw std::invalid_argument("riemann_source_limits: negative density");
  const Optimizers o = argmax(f, 0.0, rho, u / t, 1.0);
  return {o.lower, o.upper};
}

// ---------------------------------------------------------------- diagnostics and I/O

double l1_distance(const GridProfile& a, const GridProfile& b) {
  if (a.size() != b.size() || std::abs(a.dx - b.dx) > 1e-12 * a.dx || std::abs(a.x_min - b.x_min) > 1e-9 * a.dx)
    throw std::invalid_argument("l1_distance: grids differ");
  return a.dx * (a.rho - b.rho).cwiseAbs().sum();
}

double total_variation(const GridProfile& p) {
  if (p.size() < 2) return 0.0;
  return (p.rho.tail(p.size() - 1) - p.rho.head(p.size() - 1)).cwiseAbs().sum();
}

void write_profile_csv(std::ostream& out, const GridProfile& p) {
  out << "x,rho\n";
  char buf[64];
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.17g\n", p.center(i), p.rho(i));
    out << buf;
  }
}

GridProfile read_profile_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,rho", 0) != 0) throw std::invalid_argument("profile csv: expected header 'x,rho'");
  std::vector<double> xs, rho;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("profile csv: malformed row '" + line + "'");
    xs.push_back(std::stod(line.substr(0, comma)));
    rho.push_back(std::stod(line.substr(comma + 1)));
  }
  if (xs.size() < 2) throw std::invalid_argument("profile csv: need at least 2 rows");
  const double dx = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (std::abs(xs[i] - xs[i - 1] - dx) > 1e-6 * dx) throw std::invalid_argument("profile csv: nonuniform grid");
  GridProfile p{xs.front() - 0.5 * dx, dx, Eigen::Map<Eigen::VectorXd>(rho.data(), static_cast<Eigen::Index>(rho.size())), 0.0};
  return p;
}

}  // namespace zrp

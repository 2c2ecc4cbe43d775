#include "zrp/measures.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace zrp {

using nlohmann::json;

// ---------------------------------------------------------------- RateFunction

RateFunction::RateFunction(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw std::invalid_argument("rate function: need at least g(0), g(1)");
  if (values_[0] != 0.0) throw std::invalid_argument("rate function: g(0) must be 0");
  if (!(values_[1] > 0.0)) throw std::invalid_argument("rate function: g(1) must be positive");
  for (std::size_t n = 1; n < values_.size(); ++n)
    if (values_[n] < values_[n - 1]) throw std::invalid_argument("rate function: g must be nondecreasing");
  if (std::abs(values_.back() - 1.0) > 1e-12)
    throw std::invalid_argument("rate function: saturation value must be 1 (use RateFunction::normalized)");
  values_.back() = 1.0;
  // Trim a constant tail so that n_sat is the first index where g reaches 1.
  while (values_.size() > 2 && values_[values_.size() - 2] == 1.0) values_.pop_back();
}

RateFunction RateFunction::normalized(std::vector<double> values) {
  if (values.empty() || !(values.back() > 0.0)) throw std::invalid_argument("rate function: cannot normalize");
  const double top = values.back();
  for (double& v : values) v /= top;
  return RateFunction(std::move(values));
}

RateFunction RateFunction::from_json(const json& j) {
  if (j.is_array()) return RateFunction(j.get<std::vector<double>>());
  if (j.is_string() && j.get<std::string>() == "indicator") return indicator();
  if (j.is_object()) {
    auto v = j.at("values").get<std::vector<double>>();
    return j.value("normalize", false) ? normalized(std::move(v)) : RateFunction(std::move(v));
  }
  throw std::invalid_argument("rate function: expected an array, \"indicator\" or {\"values\": [...]}");
}

// ---------------------------------------------------------------- θ_β

namespace {

struct Moments {
  double z = 1.0;   // partition function Z
  double mean = 0.0;
  double variance = 0.0;
  double w_sat = 0.0;  // unnormalized weight at n_sat
};

// z = β/a, omz = 1 − z computed as (a − β)/a.
Moments moments(const RateFunction& g, double z, double omz) {
  const int n_sat = g.n_sat();
  double w = 1.0;
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (int n = 0; n < n_sat; ++n) {
    s0 += w;
    s1 += n * w;
    s2 += static_cast<double>(n) * n * w;
    w *= z / g(static_cast<std::int64_t>(n + 1));
  }
  // Beyond n_sat the weights are w·z^j exactly.
  const double N = n_sat;
  s0 += w / omz;
  s1 += w * (N / omz + z / (omz * omz));
  s2 += w * (N * N / omz + 2.0 * N * z / (omz * omz) + z * (1.0 + z) / (omz * omz * omz));
  Moments m;
  m.z = s0;
  m.mean = s1 / s0;
  m.variance = std::max(0.0, s2 / s0 - m.mean * m.mean);
  m.w_sat = w;
  return m;
}

void check_ratio(double beta, double a) {
  if (!(beta >= 0.0)) throw std::domain_error("fugacity must be nonnegative");
  if (!(a > 0.0)) throw std::domain_error("rate multiplier must be positive");
  if (beta > a) throw std::domain_error("fugacity ratio exceeds 1");
}

}  // namespace

ThetaMarginal marginal(const RateFunction& g, double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) throw std::domain_error("marginal: beta must lie in [0,1)");
  return marginal_ratio(g, beta, 1.0);
}

ThetaMarginal marginal_ratio(const RateFunction& g, double beta, double a) {
  check_ratio(beta, a);
  if (beta == a) throw std::domain_error("marginal: fugacity 1 is the infinite sentinel, not a probability law");
  const double z = beta / a;
  const double omz = (a - beta) / a;
  const Moments mom = moments(g, z, omz);

  ThetaMarginal m;
  m.beta_ = z;
  m.one_minus_beta_ = omz;
  m.z_ = mom.z;
  m.mean_ = mom.mean;
  m.variance_ = mom.variance;
  m.n_sat_ = g.n_sat();

  const int n_sat = g.n_sat();
  // Survival at n_sat: Σ_{j≥1} w_sat z^j / Z.
  const double sf_sat = mom.w_sat * z / omz / mom.z;
  if (z == 0.0) {
    m.tail_cut_ = 0;
  } else if (sf_sat < 1e-12) {
    m.tail_cut_ = -1;  // resolved below from the table
  } else {
    auto n = static_cast<std::int64_t>(std::floor(std::log(1e-12 / sf_sat) / std::log(z))) + 1;
    n = std::max<std::int64_t>(n, 1);
    while (n > 1 && sf_sat * std::pow(z, static_cast<double>(n - 1)) < 1e-12) --n;
    while (sf_sat * std::pow(z, static_cast<double>(n)) >= 1e-12) ++n;
    m.tail_cut_ = n_sat + n;
  }
  const std::int64_t table_n = std::max<std::int64_t>(n_sat, std::min<std::int64_t>(m.tail_cut_, 65536));
  m.pmf_.resize(table_n + 1);
  m.survival_.resize(table_n + 1);
  double w = 1.0;
  for (std::int64_t n = 0; n <= table_n; ++n) {
    m.pmf_(n) = w / mom.z;
    w *= z / g(n + 1);
  }
  m.survival_(table_n) = sf_sat * std::pow(z, static_cast<double>(table_n - n_sat));
  for (std::int64_t n = table_n; n > 0; --n) m.survival_(n - 1) = m.survival_(n) + m.pmf_(n);
  if (m.tail_cut_ < 0) {
    std::int64_t n = 0;
    while (m.survival_(n) >= 1e-12) ++n;
    m.tail_cut_ = n;
  }
  return m;
}

double ThetaMarginal::pmf(std::int64_t n) const {
  if (n < 0) return 0.0;
  const std::int64_t t = pmf_.size() - 1;
  if (n <= t) return pmf_(n);
  return survival_(t) * one_minus_beta_ * std::pow(beta_, static_cast<double>(n - t - 1));
}

double ThetaMarginal::survival(std::int64_t n) const {
  if (n < 0) return 1.0;
  const std::int64_t t = survival_.size() - 1;
  if (n <= t) return survival_(n);
  return survival_(t) * std::pow(beta_, static_cast<double>(n - t));
}

std::int64_t ThetaMarginal::quantile(double u) const {
  const double s = 1.0 - u;
  const double* first = survival_.data();
  const double* last = first + survival_.size();
  const double* it = std::partition_point(first, last, [s](double sf) { return sf > s; });
  if (it != last) return it - first;
  // Exact geometric tail beyond the table.
  const std::int64_t t = survival_.size() - 1;
  const double v = s / survival_(t);
  return t + 1 + static_cast<std::int64_t>(std::floor(std::log(v) / std::log(beta_)));
}

double mean_density(const RateFunction& g, double beta, double a) {
  check_ratio(beta, a);
  if (beta == 0.0) return 0.0;
  if (beta == a) return kInfinity;
  return moments(g, beta / a, (a - beta) / a).mean;
}

double mean_density_slope(const RateFunction& g, double beta, double a) {
  check_ratio(beta, a);
  if (beta == a) return kInfinity;
  if (beta == 0.0) return 1.0 / g(std::int64_t{1});
  const double z = beta / a;
  return moments(g, z, (a - beta) / a).variance / z;
}

// ---------------------------------------------------------------- R̄ and its inverse

namespace {

void check_beta(const DisorderLaw& q0, double beta) {
  if (!(beta >= 0.0)) throw std::domain_error("rbar: beta must be nonnegative");
  if (beta > q0.support_min()) throw std::domain_error("rbar: beta exceeds inf supp Q0");
}

double rbar_slope(const RateFunction& g, const DisorderLaw& q0, double beta) {
  const auto e = q0.expect([&](double a) { return mean_density_slope(g, beta, a) / a; });
  return e.divergent ? kInfinity : e.value;
}

}  // namespace

double rbar(const RateFunction& g, const DisorderLaw& q0, double beta) {
  check_beta(q0, beta);
  if (beta == 0.0) return 0.0;
  const auto e = q0.expect([&](double a) { return mean_density(g, beta, a); });
  return e.divergent ? kInfinity : e.value;
}

double rho_critical(const RateFunction& g, const DisorderLaw& q0) { return rbar(g, q0, q0.support_min()); }

double rbar_inverse(const RateFunction& g, const DisorderLaw& q0, double rho, std::optional<double> upper,
                    std::optional<double> guess) {
  constexpr double kTol = 1e-10;
  if (!(rho >= 0.0)) throw std::domain_error("rbar_inverse: rho must be nonnegative");
  if (rho == 0.0) return 0.0;
  const double hi0 = upper.value_or(q0.support_min());
  check_beta(q0, hi0);
  const double r_hi = rbar(g, q0, hi0);
  if (rho > r_hi) throw std::domain_error("rbar_inverse: rho = " + std::to_string(rho) + " beyond the invertible range");
  if (rho == r_hi) return hi0;

  double lo = 0.0;
  double hi = hi0;
  double beta = guess && *guess > 0.0 && *guess < hi ? *guess : 0.5 * hi;
  double best = beta;
  double best_res = kInfinity;
  for (int it = 0; it < 400; ++it) {
    const double r = rbar(g, q0, beta) - rho;
    if (std::abs(r) < best_res) {
      best_res = std::abs(r);
      best = beta;
    }
    if (std::abs(r) < kTol) return beta;
    if (r > 0.0)
      hi = beta;
    else
      lo = beta;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    const double slope = rbar_slope(g, q0, beta);
    double next = beta - r / slope;
    if (!(std::isfinite(next) && next > lo && next < hi)) next = 0.5 * (lo + hi);
    beta = next;
  }
  if (best_res < 1e3 * kTol) return best;
  throw std::runtime_error("rbar_inverse: no convergence (residual " + std::to_string(best_res) + ")");
}

double flux_eval(const RateFunction& g, const DisorderLaw& q0, double gamma, double p, double rho) {
  if (!(p > 0.5 && p <= 1.0)) throw std::domain_error("flux: p must lie in (1/2, 1]");
  if (!(gamma >= 0.0 && gamma <= q0.support_min())) throw std::domain_error("flux: gamma must lie in [0, inf supp Q0]");
  if (!(rho >= 0.0)) throw std::domain_error("flux: rho must be nonnegative");
  const double pq = 2.0 * p - 1.0;
  if (gamma == 0.0 || rho >= rbar(g, q0, gamma)) return pq * gamma;
  return pq * rbar_inverse(g, q0, rho, gamma);
}

// ---------------------------------------------------------------- FluxFunction

FluxFunction FluxFunction::tabulate(const RateFunction& g, const DisorderLaw& q0, double gamma, double p) {
  return tabulate(g, q0, gamma, p, Options{});
}

FluxFunction FluxFunction::tabulate(const RateFunction& g, const DisorderLaw& q0, double gamma, double p,
                                    Options opts) {
  if (!(p > 0.5 && p <= 1.0)) throw std::domain_error("flux: p must lie in (1/2, 1]");
  if (!(gamma >= 0.0 && gamma <= q0.support_min())) throw std::domain_error("flux: gamma must lie in [0, inf supp Q0]");
  if (opts.points < 2) throw std::invalid_argument("flux: need at least 2 grid points");
  FluxFunction f;
  f.g_ = g;
  f.q0_ = q0;
  f.p_ = p;
  f.p_minus_q_ = 2.0 * p - 1.0;
  f.gamma_ = gamma;
  f.rho_c_ = rho_critical(g, q0);
  f.plateau_start_ = gamma == 0.0 ? 0.0 : rbar(g, q0, gamma);
  const double rho_max = opts.rho_max.value_or(std::isinf(f.rho_c_) ? 10.0 : std::max(2.0 * f.rho_c_, 10.0));
  if (!(rho_max > 0.0)) throw std::invalid_argument("flux: rho_max must be positive");

  std::vector<double> grid(static_cast<std::size_t>(opts.points));
  for (int i = 0; i < opts.points; ++i) grid[static_cast<std::size_t>(i)] = rho_max * i / (opts.points - 1);
  if (f.plateau_start_ > 0.0 && f.plateau_start_ < rho_max) {
    auto it = std::lower_bound(grid.begin(), grid.end(), f.plateau_start_);
    if (*it != f.plateau_start_) grid.insert(it, f.plateau_start_);
  }
  f.grid_ = Eigen::Map<Eigen::VectorXd>(grid.data(), static_cast<Eigen::Index>(grid.size()));
  f.values_.resize(f.grid_.size());
  double beta = 0.0;
  for (Eigen::Index i = 0; i < f.grid_.size(); ++i) {
    const double rho = f.grid_(i);
    if (rho >= f.plateau_start_) {
      f.values_(i) = f.p_minus_q_ * gamma;
      continue;
    }
    beta = rbar_inverse(g, q0, rho, gamma, beta > 0.0 ? std::optional<double>(beta) : std::nullopt);
    f.values_(i) = f.p_minus_q_ * beta;
  }
  return f;
}

FluxFunction FluxFunction::read_csv(std::istream& in, double p) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("flux csv: empty input");
  if (line.rfind("rho,f", 0) != 0) throw std::invalid_argument("flux csv: expected header 'rho,f'");
  std::vector<double> rho, val;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("flux csv: malformed row '" + line + "'");
    rho.push_back(std::stod(line.substr(0, comma)));
    val.push_back(std::stod(line.substr(comma + 1)));
  }
  if (rho.size() < 2) throw std::invalid_argument("flux csv: need at least 2 rows");
  for (std::size_t i = 1; i < rho.size(); ++i) {
    if (!(rho[i] > rho[i - 1])) throw std::invalid_argument("flux csv: rho must be strictly increasing");
    if (val[i] < val[i - 1]) throw std::invalid_argument("flux csv: f must be nondecreasing");
  }
  FluxFunction f;
  f.p_ = p;
  f.p_minus_q_ = 2.0 * p - 1.0;
  f.grid_ = Eigen::Map<Eigen::VectorXd>(rho.data(), static_cast<Eigen::Index>(rho.size()));
  f.values_ = Eigen::Map<Eigen::VectorXd>(val.data(), static_cast<Eigen::Index>(val.size()));
  f.gamma_ = val.back() / f.p_minus_q_;
  // The plateau starts at the first node carrying the final value.
  std::size_t k = val.size() - 1;
  while (k > 0 && val[k - 1] == val.back()) --k;
  f.plateau_start_ = k + 1 < val.size() ? rho[k] : kInfinity;
  f.rho_c_ = f.plateau_start_;
  return f;
}

double FluxFunction::operator()(double rho) const {
  const Eigen::Index n = grid_.size();
  if (rho >= plateau_start_) return plateau_value();
  if (rho < 0.0 || rho > grid_(n - 1)) {
    if ((*clamped_)++ == 0)
      std::cerr << "warning: flux evaluated at rho=" << rho << " outside table [0, " << grid_(n - 1)
                << "]; clamped\n";
    rho = std::clamp(rho, 0.0, grid_(n - 1));
  }
  const double* first = grid_.data();
  const auto i = std::clamp<Eigen::Index>(std::upper_bound(first, first + n, rho) - first, 1, n - 1);
  const double t = (rho - grid_(i - 1)) / (grid_(i) - grid_(i - 1));
  return values_(i - 1) + t * (values_(i) - values_(i - 1));
}

double FluxFunction::exact(double rho) const {
  if (!g_ || !q0_) return (*this)(rho);
  return flux_eval(*g_, *q0_, gamma_, p_, std::max(rho, 0.0));
}

double FluxFunction::max_slope() const {
  const Eigen::Index n = grid_.size();
  const Eigen::ArrayXd df = values_.tail(n - 1).array() - values_.head(n - 1).array();
  const Eigen::ArrayXd dr = grid_.tail(n - 1).array() - grid_.head(n - 1).array();
  return (df / dr).maxCoeff();
}

void FluxFunction::write_csv(std::ostream& out) const {
  out << "rho,f\n";
  char buf[64];
  for (Eigen::Index i = 0; i < grid_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", grid_(i), values_(i));
    out << buf;
  }
}

// ---------------------------------------------------------------- product measures

Configuration sample_product(const Environment& env, const RateFunction& g, double beta, Window window,
                             CounterRng& rng, Boundaries boundaries) {
  if (!env.window().contains(window)) throw std::out_of_range("sample_product: window exceeds the environment");
  if (!(beta >= 0.0)) throw std::domain_error("sample_product: beta must be nonnegative");
  std::unordered_map<double, ThetaMarginal> cache;
  Configuration c(window);
  for (std::int64_t x = window.left; x <= window.right; ++x) {
    const double a = env(x);
    if (beta > a)
      throw std::domain_error("sample_product: beta exceeds alpha(" + std::to_string(x) + ") = " + std::to_string(a));
    const double u = uniform_open(rng);
    if (beta == a) {
      c[x] = Occupancy::infinite();
      continue;
    }
    if (beta == 0.0) continue;
    auto it = cache.find(a);
    if (it == cache.end()) it = cache.emplace(a, marginal_ratio(g, beta, a)).first;
    c[x] = Occupancy(it->second.quantile(u));
  }
  return Configuration(window, std::move(c.occupancies()), boundaries);
}

}  // namespace zrp

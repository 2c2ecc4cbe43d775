#include "zrp/env.hpp"

#include "zrp/quadrature.hpp"
#include "zrp/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace zrp {

using nlohmann::json;

// ---------------------------------------------------------------- DisorderLaw

DisorderLaw DisorderLaw::atoms(std::vector<Atom> atoms) {
  if (atoms.empty()) throw std::invalid_argument("disorder law: no atoms");
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
  double total = 0.0;
  for (const Atom& a : atoms) {
    if (!(a.value > 0.0 && a.value <= 1.0)) throw std::invalid_argument("disorder law: atom value outside (0,1]");
    if (!(a.weight >= 0.0)) throw std::invalid_argument("disorder law: negative weight");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("disorder law: weights do not sum to 1");
  // Merge duplicates and drop null atoms so that support_min() is the true infimum.
  std::vector<Atom> merged;
  for (const Atom& a : atoms) {
    if (a.weight == 0.0) continue;
    if (!merged.empty() && merged.back().value == a.value)
      merged.back().weight += a.weight;
    else
      merged.push_back(a);
  }
  DisorderLaw law;
  law.atoms_ = std::move(merged);
  law.lo_ = law.atoms_->front().value;
  law.hi_ = law.atoms_->back().value;
  return law;
}

DisorderLaw DisorderLaw::density(std::function<double(double)> pdf, double lo, double hi, int nodes,
                                 json descriptor) {
  if (!(lo > 0.0 && hi <= 1.0 && lo < hi)) throw std::invalid_argument("disorder law: density support outside (0,1]");
  if (nodes < 64) throw std::invalid_argument("disorder law: too few quadrature nodes");
  DisorderLaw law;
  law.pdf_ = std::move(pdf);
  law.lo_ = lo;
  law.hi_ = hi;
  law.nodes_ = nodes;
  law.descriptor_ = descriptor.is_null() ? json{{"family", "custom"}, {"lo", lo}, {"hi", hi}} : std::move(descriptor);
  law.descriptor_["nodes"] = nodes;
  law.build_cdf_table();
  return law;
}

DisorderLaw DisorderLaw::power_density(double lo, double hi, double exponent, int nodes) {
  if (!(exponent >= 0.0)) throw std::invalid_argument("disorder law: negative power exponent");
  const double w = hi - lo;
  const double k = exponent;
  auto pdf = [lo, hi, w, k](double a) {
    if (a < lo || a > hi) return 0.0;
    return (k + 1.0) * std::pow(a - lo, k) / std::pow(w, k + 1.0);
  };
  DisorderLaw law = density(pdf, lo, hi, nodes, json{{"family", "power"}, {"lo", lo}, {"hi", hi}, {"k", k}});
  law.cdf_exact_ = [lo, hi, w, k](double a) {
    if (a <= lo) return 0.0;
    if (a >= hi) return 1.0;
    return std::pow((a - lo) / w, k + 1.0);
  };
  law.quantile_exact_ = [lo, w, k](double u) { return lo + w * std::pow(u, 1.0 / (k + 1.0)); };
  return law;
}

void DisorderLaw::build_cdf_table() {
  const int cells = 4096;
  cdf_grid_ = Eigen::VectorXd::LinSpaced(cells + 1, lo_, hi_);
  cdf_values_ = Eigen::VectorXd::Zero(cells + 1);
  const GaussRule& rule = gauss_legendre(8);
  for (int i = 0; i < cells; ++i) {
    const double a = cdf_grid_(i);
    const double b = cdf_grid_(i + 1);
    double s = 0.0;
    for (Eigen::Index k = 0; k < rule.nodes.size(); ++k) {
      const double v = pdf_(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes(k));
      if (v < 0.0) throw std::invalid_argument("disorder law: negative density");
      s += rule.weights(k) * v;
    }
    cdf_values_(i + 1) = cdf_values_(i) + 0.5 * (b - a) * s;
  }
  const double total = cdf_values_(cells);
  if (std::abs(total - 1.0) > 1e-8) throw std::invalid_argument("disorder law: density does not integrate to 1");
  cdf_values_ /= total;
}

const std::vector<DisorderLaw::Atom>& DisorderLaw::atom_list() const {
  if (!atoms_) throw std::logic_error("disorder law is not atomic");
  return *atoms_;
}

double DisorderLaw::support_min() const { return lo_; }
double DisorderLaw::support_max() const { return hi_; }

double DisorderLaw::pdf(double a) const {
  if (atoms_) throw std::logic_error("disorder law is atomic");
  return pdf_(a);
}

double DisorderLaw::cdf(double a) const {
  if (atoms_) {
    double s = 0.0;
    for (const Atom& at : *atoms_)
      if (at.value <= a) s += at.weight;
    return std::min(s, 1.0);
  }
  if (a <= lo_) return 0.0;
  if (a >= hi_) return 1.0;
  if (cdf_exact_) return cdf_exact_(a);
  const double h = (hi_ - lo_) / (cdf_grid_.size() - 1);
  const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>((a - lo_) / h), cdf_grid_.size() - 2);
  const double left = cdf_grid_(i);
  const GaussRule& rule = gauss_legendre(8);
  double s = 0.0;
  for (Eigen::Index k = 0; k < rule.nodes.size(); ++k) s += rule.weights(k) * pdf_(0.5 * (left + a) + 0.5 * (a - left) * rule.nodes(k));
  return std::clamp(cdf_values_(i) + 0.5 * (a - left) * s, 0.0, 1.0);
}

double DisorderLaw::quantile(double u) const {
  if (atoms_) {
    double s = 0.0;
    for (const Atom& at : *atoms_) {
      s += at.weight;
      if (s > u) return at.value;
    }
    return atoms_->back().value;
  }
  if (u <= 0.0) return lo_;
  if (u >= 1.0) return hi_;
  if (quantile_exact_) return quantile_exact_(u);
  // Locate the table cell, then bisect on the exact cdf inside it.
  const auto it = std::upper_bound(cdf_values_.data(), cdf_values_.data() + cdf_values_.size(), u);
  const Eigen::Index i = std::clamp<Eigen::Index>(it - cdf_values_.data(), 1, cdf_values_.size() - 1);
  double a = cdf_grid_(i - 1);
  double b = cdf_grid_(i);
  for (int k = 0; k < 60 && b - a > 1e-15; ++k) {
    const double m = 0.5 * (a + b);
    if (cdf(m) > u)
      b = m;
    else
      a = m;
  }
  return b;
}

DisorderLaw::Expectation DisorderLaw::expect(const std::function<double(double)>& h) const {
  if (atoms_) {
    double s = 0.0;
    for (const Atom& at : *atoms_) {
      const double v = h(at.value);
      if (std::isinf(v)) return {v, true};
      s += at.weight * v;
    }
    return {s, false};
  }
  const GradedIntegral gi = graded_integral([&](double a) { return h(a) * pdf_(a); }, lo_, hi_, nodes_);
  return {gi.divergent ? std::numeric_limits<double>::infinity() : gi.value, gi.divergent};
}

json DisorderLaw::to_json() const {
  if (atoms_) {
    json list = json::array();
    for (const Atom& a : *atoms_) list.push_back(json::array({a.value, a.weight}));
    return json{{"atoms", list}};
  }
  return json{{"density", descriptor_}};
}

DisorderLaw DisorderLaw::from_json(const json& j) {
  if (j.contains("atoms")) {
    std::vector<Atom> atoms;
    for (const auto& a : j.at("atoms")) atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
    return DisorderLaw::atoms(std::move(atoms));
  }
  if (j.contains("dirac")) return dirac(j.at("dirac").get<double>());
  if (j.contains("density")) {
    const json& d = j.at("density");
    const std::string family = d.value("family", "power");
    const int nodes = d.value("nodes", 512);
    if (family == "power") return power_density(d.at("lo"), d.at("hi"), d.value("k", 0.0), nodes);
    if (family == "uniform") return power_density(d.at("lo"), d.at("hi"), 0.0, nodes);
    throw std::invalid_argument("disorder law: density family '" + family + "' cannot be reloaded from JSON");
  }
  throw std::invalid_argument("disorder law: expected 'atoms', 'dirac' or 'density'");
}

// ---------------------------------------------------------------- Environment

std::string to_string(Construction c) {
  switch (c) {
    case Construction::iid: return "iid";
    case Construction::deterministic: return "deterministic";
    case Construction::explicit_list: return "explicit";
  }
  return "unknown";
}

Environment::Environment(Window window, Eigen::VectorXd alpha, double c, DisorderLaw law, Construction construction,
                         json provenance)
    : window_(window),
      alpha_(std::move(alpha)),
      c_(c),
      law_(std::move(law)),
      construction_(construction),
      provenance_(std::move(provenance)) {
  if (window_.empty()) throw std::invalid_argument("environment: empty window");
  if (alpha_.size() != window_.size()) throw std::invalid_argument("environment: value count does not match window");
  for (Eigen::Index i = 0; i < alpha_.size(); ++i)
    if (!(alpha_(i) > 0.0 && alpha_(i) <= 1.0)) throw std::invalid_argument("environment: value outside (0,1]");
  if (!(c_ <= alpha_.minCoeff())) throw std::invalid_argument("environment: c exceeds the window minimum");
  if (!(c_ <= law_.support_min())) throw std::invalid_argument("environment: c exceeds inf supp Q0");
}

double Environment::alpha(std::int64_t x) const {
  if (!window_.contains(x)) throw std::out_of_range("environment: site " + std::to_string(x) + " outside window");
  return alpha_(x - window_.left);
}

Environment Environment::with_values(const std::vector<std::pair<std::int64_t, double>>& overrides,
                                     std::optional<double> c) const {
  Eigen::VectorXd v = alpha_;
  for (const auto& [x, a] : overrides) {
    if (!window_.contains(x)) throw std::out_of_range("environment: override outside window");
    v(x - window_.left) = a;
  }
  const double new_c = c.value_or(std::min(c_, v.minCoeff()));
  json prov = provenance_;
  prov["overridden_sites"] = overrides.size();
  return Environment(window_, std::move(v), new_c, law_, construction_, std::move(prov));
}

json Environment::to_json() const {
  json alpha = json::object();
  for (std::int64_t x = window_.left; x <= window_.right; ++x) alpha[std::to_string(x)] = (*this)(x);
  return json{{"window", {window_.left, window_.right}},
              {"c", c_},
              {"q0", law_.to_json()},
              {"construction", to_string(construction_)},
              {"provenance", provenance_},
              {"alpha", alpha}};
}

Environment Environment::from_json(const json& j) {
  const Window w{j.at("window").at(0).get<std::int64_t>(), j.at("window").at(1).get<std::int64_t>()};
  Eigen::VectorXd v(w.size());
  const json& alpha = j.at("alpha");
  for (std::int64_t x = w.left; x <= w.right; ++x) v(x - w.left) = alpha.at(std::to_string(x)).get<double>();
  const std::string kind = j.value("construction", "explicit");
  Construction c = Construction::explicit_list;
  if (kind == "iid") c = Construction::iid;
  if (kind == "deterministic") c = Construction::deterministic;
  return Environment(w, std::move(v), j.at("c").get<double>(), DisorderLaw::from_json(j.at("q0")), c,
                     j.value("provenance", json::object()));
}

// ---------------------------------------------------------------- construction

std::vector<std::int64_t> defect_sites(double kappa, Window window) {
  if (!(kappa > 1.0)) throw std::invalid_argument("deterministic environment: kappa must exceed 1");
  auto site = [kappa](std::int64_t n) -> std::int64_t {
    if (n == 0) return 0;
    const auto m = static_cast<std::int64_t>(std::floor(std::pow(static_cast<double>(std::llabs(n)), kappa)));
    return n > 0 ? m : -m;
  };
  std::vector<std::int64_t> sites{0};
  for (std::int64_t n = 1;; ++n) {
    sites.push_back(site(n));
    if (sites.back() > window.right) break;
  }
  std::vector<std::int64_t> left;
  for (std::int64_t n = -1;; --n) {
    left.push_back(site(n));
    if (left.back() < window.left) break;
  }
  sites.insert(sites.begin(), left.rbegin(), left.rend());
  return sites;
}

namespace {

struct Builder {
  Window window;
  std::uint64_t seed;

  Environment operator()(const IidSpec& s) const {
    CounterRng rng(seed);
    Eigen::VectorXd v(window.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = s.law.quantile(uniform_open(rng));
    return Environment(window, std::move(v), s.law.support_min(), s.law, Construction::iid, json{{"seed", seed}});
  }

  Environment operator()(const DeterministicSpec& s) const {
    const double c = s.c.value_or(s.law.support_min());
    if (c > s.law.support_min()) throw std::invalid_argument("deterministic environment: c exceeds inf supp Q0");
    const bool use_defects = c < s.law.support_min();
    auto defect = [&](std::int64_t n) {
      const double v = s.defect_value ? s.defect_value(n) : std::min(1.0, c + 1.0 / (static_cast<double>(std::llabs(n)) + 2.0));
      if (!(v > c && v <= 1.0)) throw std::invalid_argument("deterministic environment: defect value outside (c,1]");
      return v;
    };
    const std::vector<std::int64_t> sites = defect_sites(s.kappa, window);
    // Index of x_0 = 0 in `sites`.
    const auto zero = static_cast<std::int64_t>(std::find(sites.begin(), sites.end(), 0) - sites.begin());
    Eigen::VectorXd v(window.size());
    std::size_t k = 0;
    for (std::int64_t x = window.left; x <= window.right; ++x) {
      while (k + 1 < sites.size() && sites[k + 1] <= x) ++k;
      const double u = static_cast<double>(x - sites[k]) / static_cast<double>(sites[k + 1] - sites[k]);
      double a = s.law.quantile(u);
      if (x == sites[k] && use_defects) a = defect(static_cast<std::int64_t>(k) - zero);
      v(x - window.left) = a;
    }
    return Environment(window, std::move(v), c, s.law, Construction::deterministic,
                       json{{"kappa", s.kappa}, {"defects", use_defects}});
  }

  Environment operator()(const ExplicitSpec& s) const {
    if (static_cast<std::int64_t>(s.alpha.size()) != window.size())
      throw std::invalid_argument("explicit environment: list length does not match window");
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(s.alpha.data(), static_cast<Eigen::Index>(s.alpha.size()));
    DisorderLaw law = [&] {
      if (s.law) return *s.law;
      std::map<double, double> counts;
      for (double a : s.alpha) counts[a] += 1.0 / static_cast<double>(s.alpha.size());
      std::vector<DisorderLaw::Atom> atoms;
      double total = 0.0;
      for (const auto& [a, w] : counts) {
        atoms.push_back({a, w});
        total += w;
      }
      atoms.back().weight += 1.0 - total;
      return DisorderLaw::atoms(std::move(atoms));
    }();
    const double c = s.c.value_or(std::min(v.minCoeff(), law.support_min()));
    return Environment(window, std::move(v), c, std::move(law), Construction::explicit_list);
  }
};

}  // namespace

Environment build_environment(const EnvironmentSpec& spec, Window window, std::uint64_t seed) {
  if (window.empty()) throw std::invalid_argument("environment: empty window");
  return std::visit(Builder{window, seed}, spec);
}

ParsedEnvironmentSpec parse_environment_spec(const json& j) {
  ParsedEnvironmentSpec out;
  out.window = Window{j.at("window").at(0).get<std::int64_t>(), j.at("window").at(1).get<std::int64_t>()};
  out.seed = j.value("seed", std::uint64_t{0});
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "iid") {
    out.spec = IidSpec{DisorderLaw::from_json(j.at("q0"))};
  } else if (kind == "deterministic") {
    DeterministicSpec s{DisorderLaw::from_json(j.at("q0")), j.value("kappa", 2.0), std::nullopt, {}};
    if (j.contains("c")) s.c = j.at("c").get<double>();
    if (j.contains("defect_value")) {
      const double d = j.at("defect_value").get<double>();
      s.defect_value = [d](std::int64_t) { return d; };
    }
    out.spec = std::move(s);
  } else if (kind == "explicit") {
    ExplicitSpec s;
    if (j.contains("alpha")) {
      s.alpha = j.at("alpha").get<std::vector<double>>();
    } else {
      // Compact form: {"default": a, "sites": {"x": value, ...}}.
      s.alpha.assign(static_cast<std::size_t>(out.window.size()), j.value("default", 1.0));
      const json sites = j.value("sites", json::object());
      for (const auto& [key, value] : sites.items()) {
        const std::int64_t x = std::stoll(key);
        if (!out.window.contains(x)) throw std::invalid_argument("explicit environment: site outside window");
        s.alpha[static_cast<std::size_t>(x - out.window.left)] = value.get<double>();
      }
    }
    if (j.contains("c")) s.c = j.at("c").get<double>();
    if (j.contains("q0")) s.law = DisorderLaw::from_json(j.at("q0"));
    out.spec = std::move(s);
  } else {
    throw std::invalid_argument("environment: unknown kind '" + kind + "'");
  }
  return out;
}

Environment build_environment(const json& j) {
  const ParsedEnvironmentSpec p = parse_environment_spec(j);
  return build_environment(p.spec, p.window, p.seed);
}

// ---------------------------------------------------------------- diagnostics

DiscreteLaw empirical_disorder(const Environment& env, std::int64_t n, Side side) {
  if (n <= 0) throw std::invalid_argument("empirical_disorder: n must be positive");
  const Window half = side == Side::right ? Window{0, n} : Window{-n, 0};
  if (!env.window().contains(half)) throw std::out_of_range("empirical_disorder: n exceeds the window");
  std::map<double, std::int64_t> counts;
  for (std::int64_t x = half.left; x <= half.right; ++x) ++counts[env(x)];
  DiscreteLaw out;
  const double total = static_cast<double>(half.size());
  for (const auto& [a, k] : counts) out.emplace_back(a, static_cast<double>(k) / total);
  return out;
}

double total_variation(const DiscreteLaw& empirical, const DisorderLaw& law) {
  std::map<double, double> diff;
  for (const auto& [a, w] : empirical) diff[a] += w;
  for (const auto& atom : law.atom_list()) diff[atom.value] -= atom.weight;
  double s = 0.0;
  for (const auto& [a, d] : diff) s += std::abs(d);
  return 0.5 * s;
}

double kolmogorov_distance(const DiscreteLaw& empirical, const DisorderLaw& law) {
  double best = 0.0;
  double f = 0.0;
  for (const auto& [a, w] : empirical) {
    const double before = f;
    f += w;
    const double left_limit = law.is_atomic() ? law.cdf(std::nextafter(a, 0.0)) : law.cdf(a);
    best = std::max({best, std::abs(before - left_limit), std::abs(f - law.cdf(a))});
  }
  return best;
}

DefectBounds defect_bounds(const Environment& env, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("defect_bounds: eps must be positive");
  DefectBounds b;
  b.eps = eps;
  const double level = env.c() + eps;
  const Window& w = env.window();
  for (std::int64_t x = std::min<std::int64_t>(0, w.right); x >= w.left; --x)
    if (env(x) <= level) {
      b.left = x;
      break;
    }
  for (std::int64_t x = std::max<std::int64_t>(0, w.left); x <= w.right; ++x)
    if (env(x) <= level) {
      b.right = x;
      break;
    }
  return b;
}

}  // namespace zrp

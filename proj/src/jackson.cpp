#include "zrp/jackson.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace zrp {

OpenNetwork make_network(std::int64_t l, Eigen::VectorXd kappa, double p) {
  if (kappa.size() < 2) throw std::invalid_argument("open network: need l < r");
  if (!(p > 0.5 && p <= 1.0)) throw std::invalid_argument("open network: p must lie in (1/2, 1]");
  if (!((kappa.array() > 0.0).all() && (kappa.array() <= 1.0).all()))
    throw std::invalid_argument("open network: rates must lie in (0, 1]");
  return OpenNetwork{l, std::move(kappa), p};
}

LambdaProfile lambda_profile(const OpenNetwork& net) {
  if (net.kappa.size() < 2) throw std::invalid_argument("lambda_profile: need l < r");
  if (!(net.p > 0.5 && net.p <= 1.0)) throw std::invalid_argument("lambda_profile: p must lie in (1/2, 1]");
  const double ratio = (1.0 - net.p) / net.p;
  const std::int64_t l = net.l;
  const std::int64_t r = net.r();
  auto power = [ratio](std::int64_t n) { return n == 0 ? 1.0 : std::pow(ratio, static_cast<double>(n)); };
  const double kl = net(l);
  const double kr = net(r);
  const double span = power(r - l);
  LambdaProfile out{l, Eigen::VectorXd(net.kappa.size()), net.p};
  for (std::int64_t x = l; x <= r; ++x) out.lam(x - l) = ((kr - kl) * power(r - x) + kl - kr * span) / (1.0 - span);
  return out;
}

bool check_recurrent(const OpenNetwork& net) {
  const LambdaProfile lam = lambda_profile(net);
  for (std::int64_t x = net.l + 1; x < net.r(); ++x)
    if (!(lam(x) < net(x))) return false;
  return true;
}

OpenNetworkMeasure invariant_product(const OpenNetwork& net, const RateFunction& g) {
  if (!check_recurrent(net)) throw std::domain_error("invariant_product: network is not positive recurrent");
  const LambdaProfile lam = lambda_profile(net);
  OpenNetworkMeasure m;
  m.first = net.l + 1;
  const Eigen::Index n = net.kappa.size() - 2;
  m.fugacity.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::int64_t x = m.first + i;
    m.fugacity(i) = lam(x) / net(x);
    m.marginals.push_back(marginal_ratio(g, lam(x), net(x)));
  }
  return m;
}

StationarityResidual stationarity_residual(const OpenNetwork& net, const RateFunction& g, std::int64_t x,
                                           std::int64_t k, int trunc, std::optional<FugacityPerturbation> perturb) {
  const std::int64_t l = net.l;
  const std::int64_t r = net.r();
  if (!(x > l && x < r)) throw std::invalid_argument("stationarity_residual: x must be interior");
  if (k < 0 || trunc < 1) throw std::invalid_argument("stationarity_residual: k and trunc must be nonnegative");
  if (!check_recurrent(net)) throw std::domain_error("stationarity_residual: network is not positive recurrent");
  const LambdaProfile lam = lambda_profile(net);
  const double p = net.p;
  const double q = 1.0 - p;

  auto site_marginal = [&](std::int64_t y) {
    double fug = lam(y);
    if (perturb && perturb->site == y) fug *= perturb->factor;
    return marginal_ratio(g, fug, net(y));
  };
  // Weights θ(0..trunc) of each interior site among x−1, x, x+1.
  struct Local {
    bool reservoir;
    std::vector<double> w;
    double tail;
  };
  auto local = [&](std::int64_t y) {
    Local s{y == l || y == r, {}, 0.0};
    if (s.reservoir) {
      s.w = {1.0};
      return s;
    }
    const ThetaMarginal m = site_marginal(y);
    for (int n = 0; n <= trunc; ++n) s.w.push_back(m.pmf(n));
    s.tail = m.survival(trunc);
    return s;
  };
  const Local left = local(x - 1);
  const Local mid = local(x);
  const Local right = local(x + 1);

  const double out_rate = (p + q) * net(x);
  double sum = 0.0;
  for (std::size_t a = 0; a < left.w.size(); ++a) {
    const double in_left = left.reservoir ? p * net(l) : p * net(x - 1) * g(static_cast<std::int64_t>(a));
    for (std::size_t c = 0; c < right.w.size(); ++c) {
      const double in_right = right.reservoir ? q * net(r) : q * net(x + 1) * g(static_cast<std::int64_t>(c));
      const double in_rate = in_left + in_right;
      const double wac = left.w[a] * right.w[c];
      for (std::size_t b = 0; b < mid.w.size(); ++b) {
        const auto n = static_cast<std::int64_t>(b);
        const double out = out_rate * g(n);
        const double lf = out * (static_cast<double>(n - 1 == k) - static_cast<double>(n == k)) +
                          in_rate * (static_cast<double>(n + 1 == k) - static_cast<double>(n == k));
        sum += wac * mid.w[b] * lf;
      }
    }
  }
  const double max_rate = 2.0 * (out_rate + p * std::max(net(x - 1), net(l)) + q * std::max(net(x + 1), net(r)));
  StationarityResidual res{sum, max_rate * (left.tail + mid.tail + right.tail)};
  if (res.tail_bound > 1e-12)
    throw std::runtime_error("stationarity_residual: trunc=" + std::to_string(trunc) +
                             " too small (tail bound " + std::to_string(res.tail_bound) + ")");
  return res;
}

Truncation truncate_environment(const Environment& alpha_bar, double eps, double p) {
  const DefectBounds b = defect_bounds(alpha_bar, eps);
  const Window& w = alpha_bar.window();
  if (!b.left) throw std::invalid_argument("truncate_environment: window too small to contain A_eps");
  Truncation t;
  t.l = *b.left;
  t.fallback = !b.right.has_value();
  t.r = b.right ? *b.right : static_cast<std::int64_t>(std::floor(1.0 / eps));
  if (!w.contains(t.r)) throw std::invalid_argument("truncate_environment: window too small to contain r");
  if (!(t.l < t.r)) throw std::invalid_argument("truncate_environment: degenerate interval (l = r)");

  auto kappa_on = [&](std::int64_t lo, std::int64_t hi) {
    Eigen::VectorXd v(hi - lo + 1);
    for (std::int64_t x = lo; x <= hi; ++x) v(x - lo) = alpha_bar(x);
    return v;
  };
  const OpenNetwork full = make_network(t.l, kappa_on(t.l, t.r), p);
  t.lambda = lambda_profile(full);
  t.r_prime = t.r;
  if (t.fallback)
    for (std::int64_t z = t.l + 1; z < t.r; ++z)
      if (t.lambda(z) >= alpha_bar(z)) {
        t.r_prime = z;
        break;
      }
  Eigen::VectorXd tilde = kappa_on(t.l, t.r_prime);
  if (t.r_prime < t.r) tilde(t.r_prime - t.l) = t.lambda(t.r_prime);
  t.network = make_network(t.l, std::move(tilde), p);
  return t;
}

nlohmann::json jackson_report(const OpenNetwork& net, const RateFunction& g, int k_max, int trunc) {
  using nlohmann::json;
  const LambdaProfile lam = lambda_profile(net);
  const bool recurrent = check_recurrent(net);
  json sites = json::array();
  double max_residual = 0.0;
  double max_tail = 0.0;
  for (std::int64_t x = net.l; x <= net.r(); ++x) {
    json s{{"site", x}, {"kappa", net(x)}, {"lambda", lam(x)}};
    if (x > net.l && x < net.r()) {
      s["fugacity"] = lam(x) / net(x);
      if (recurrent) {
        double site_max = 0.0;
        for (int k = 0; k <= k_max; ++k) {
          const StationarityResidual res = stationarity_residual(net, g, x, k, trunc);
          site_max = std::max(site_max, std::abs(res.value));
          max_tail = std::max(max_tail, res.tail_bound);
        }
        s["max_residual"] = site_max;
        max_residual = std::max(max_residual, site_max);
      }
    }
    sites.push_back(std::move(s));
  }
  json out{{"l", net.l}, {"r", net.r()}, {"p", net.p}, {"recurrent", recurrent}, {"sites", sites}};
  if (recurrent) {
    out["max_residual"] = max_residual;
    out["k_max"] = k_max;
    out["trunc"] = trunc;
    out["tail_bound"] = max_tail;
  }
  return out;
}

}  // namespace zrp

#ifndef ZRP_JACKSON_HPP
#define ZRP_JACKSON_HPP

#include "zrp/env.hpp"
#include "zrp/measures.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace zrp {

/// Rates κ on [l, r] of an open nearest-neighbour network whose end sites
/// l and r act as reservoirs.
struct OpenNetwork {
  std::int64_t l = 0;
  Eigen::VectorXd kappa;  // κ(l), …, κ(r)
  double p = 1.0;

  std::int64_t r() const { return l + kappa.size() - 1; }
  double operator()(std::int64_t x) const { return kappa(x - l); }
};

/// Validates l < r, ½ < p ≤ 1 and κ ∈ (0, 1].
OpenNetwork make_network(std::int64_t l, Eigen::VectorXd kappa, double p);

struct LambdaProfile {
  std::int64_t l = 0;
  Eigen::VectorXd lam;  // λ(l), …, λ(r)
  double p = 1.0;
  double operator()(std::int64_t x) const { return lam(x - l); }
};

/// λ(x) = [(κ(r)−κ(l))(q/p)^{r−x} + κ(l) − κ(r)(q/p)^{r−l}] / (1 − (q/p)^{r−l}),
/// with (q/p)^0 = 1 and positive powers 0 when p = 1.
LambdaProfile lambda_profile(const OpenNetwork& net);

/// λ(x) < κ(x) at every interior site.
bool check_recurrent(const OpenNetwork& net);

struct OpenNetworkMeasure {
  std::int64_t first = 0;            // l + 1
  Eigen::VectorXd fugacity;          // λ(x)/κ(x), x ∈ (l, r)
  std::vector<ThetaMarginal> marginals;
  const ThetaMarginal& at(std::int64_t x) const { return marginals.at(static_cast<std::size_t>(x - first)); }
};

/// Product measure with marginals θ_{λ(x)/κ(x)} on (l, r).
OpenNetworkMeasure invariant_product(const OpenNetwork& net, const RateFunction& g);

/// Scales the fugacity of one site; used to check that the residual detects
/// a wrong measure.
struct FugacityPerturbation {
  std::int64_t site;
  double factor;
};

struct StationarityResidual {
  double value = 0.0;
  /// Bound on the contribution of states beyond the truncation.
  double tail_bound = 0.0;
};

/// E_μ[L f] for f = 1{η(x) = k} under the open-network generator, summed
/// over the local states of x−1, x, x+1 (truncated at `trunc`) weighted by
/// the product marginals. Throws when the tail bound exceeds 1e-12.
StationarityResidual stationarity_residual(const OpenNetwork& net, const RateFunction& g, std::int64_t x,
                                           std::int64_t k, int trunc = 60,
                                           std::optional<FugacityPerturbation> perturb = std::nullopt);

struct Truncation {
  std::int64_t l = 0;
  std::int64_t r = 0;
  std::int64_t r_prime = 0;
  bool fallback = false;  // a_eps was infinite inside the window
  LambdaProfile lambda;   // λ^{ᾱ,l,r}
  OpenNetwork network;    // (α̃ on [l, r'], p)
};

/// l = A_eps, r = a_eps (or ⌊1/eps⌋), r' = first site of (l, r) with
/// λ^{ᾱ,l,r} ≥ ᾱ (else r), α̃ = ᾱ except α̃(r') = λ(r') when r' < r.
Truncation truncate_environment(const Environment& alpha_bar, double eps, double p);

/// Report: per-site λ, fugacities, max residual over interior sites and
/// k ≤ k_max, recurrence flag.
nlohmann::json jackson_report(const OpenNetwork& net, const RateFunction& g, int k_max = 30, int trunc = 60);

}  // namespace zrp

#endif  // ZRP_JACKSON_HPP

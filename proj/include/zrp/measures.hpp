#ifndef ZRP_MEASURES_HPP
#define ZRP_MEASURES_HPP

#include "zrp/configuration.hpp"
#include "zrp/env.hpp"
#include "zrp/random.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <atomic>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace zrp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Jump-rate function g: g(0) = 0 < g(1), nondecreasing, constant equal to
/// 1 from n_sat on, and g(∞) = 1.
class RateFunction {
 public:
  /// values = g(0), ..., g(n_sat); the last entry must be 1.
  explicit RateFunction(std::vector<double> values);
  /// g(n) = 1{n ≥ 1}.
  static RateFunction indicator() { return RateFunction({0.0, 1.0}); }
  /// Rescales a bounded table so that its saturation value becomes 1.
  static RateFunction normalized(std::vector<double> values);

  double operator()(Occupancy n) const {
    if (n.is_infinite()) return 1.0;
    return (*this)(n.count());
  }
  double operator()(std::int64_t n) const {
    return n >= static_cast<std::int64_t>(values_.size()) ? 1.0 : values_[static_cast<std::size_t>(n)];
  }
  int n_sat() const { return static_cast<int>(values_.size()) - 1; }
  const std::vector<double>& values() const { return values_; }

  nlohmann::json to_json() const { return values_; }
  static RateFunction from_json(const nlohmann::json& j);

 private:
  std::vector<double> values_;
};

/// θ_β(n) = β^n / (g(n)! Z(β)), n ≥ 0, for 0 ≤ β < 1.
class ThetaMarginal {
 public:
  double beta() const { return beta_; }
  double Z() const { return z_; }
  /// R(β).
  double mean() const { return mean_; }
  double variance() const { return variance_; }
  /// Smallest N with P(X > N) < 1e-12.
  std::int64_t tail_cut() const { return tail_cut_; }
  double pmf(std::int64_t n) const;
  /// P(X > n).
  double survival(std::int64_t n) const;
  double cdf(std::int64_t n) const { return 1.0 - survival(n); }

  /// Inverse-CDF sample driven by one uniform U ∈ (0,1); nondecreasing in U.
  std::int64_t quantile(double u) const;

 private:
  friend ThetaMarginal marginal_ratio(const RateFunction& g, double beta, double a);

  double beta_ = 0.0;
  double one_minus_beta_ = 1.0;
  double z_ = 1.0;
  double mean_ = 0.0;
  double variance_ = 0.0;
  std::int64_t tail_cut_ = 0;
  int n_sat_ = 1;
  Eigen::VectorXd pmf_;
  Eigen::VectorXd survival_;
};

/// θ_β. Throws std::domain_error for β ∉ [0,1).
ThetaMarginal marginal(const RateFunction& g, double beta);
/// θ_{β/a}, with 1 − β/a formed as (a − β)/a to keep precision near β = a.
ThetaMarginal marginal_ratio(const RateFunction& g, double beta, double a);

template <class Rng>
std::int64_t sample_marginal(const ThetaMarginal& m, Rng& rng) {
  return m.quantile(uniform_open(rng));
}

/// R(β/a) for 0 ≤ β ≤ a; +∞ when β = a.
double mean_density(const RateFunction& g, double beta, double a = 1.0);
/// dR/dz at z = β/a (equals Var/z).
double mean_density_slope(const RateFunction& g, double beta, double a = 1.0);

/// R̄(β) = ∫ R(β/a) dQ0(a); +∞ when divergent. Requires β ≤ inf supp Q0.
double rbar(const RateFunction& g, const DisorderLaw& q0, double beta);
/// ρ_c = R̄(inf supp Q0).
double rho_critical(const RateFunction& g, const DisorderLaw& q0);
/// β with R̄(β) = ρ, to |R̄(β) − ρ| < 1e-10, searched on [0, upper] (default inf supp Q0).
double rbar_inverse(const RateFunction& g, const DisorderLaw& q0, double rho, std::optional<double> upper = std::nullopt,
                    std::optional<double> guess = std::nullopt);
/// f(ρ) = (p−q) R̄^{-1}(ρ) below R̄(γ), (p−q)γ above.
double flux_eval(const RateFunction& g, const DisorderLaw& q0, double gamma, double p, double rho);

/// Tabulated homogenized flux on [0, ρ_max] with linear interpolation.
class FluxFunction {
 public:
  struct Options {
    int points = 4096;
    std::optional<double> rho_max;
  };
  static FluxFunction tabulate(const RateFunction& g, const DisorderLaw& q0, double gamma, double p);
  static FluxFunction tabulate(const RateFunction& g, const DisorderLaw& q0, double gamma, double p, Options opts);
  /// Table-only flux (no exact evaluator) from a (rho, f) CSV.
  static FluxFunction read_csv(std::istream& in, double p);

  double operator()(double rho) const;
  /// Exact evaluation via root finding when the generating law is known;
  /// falls back to the table otherwise.
  double exact(double rho) const;

  double rho_c() const { return rho_c_; }
  double gamma() const { return gamma_; }
  double p_minus_q() const { return p_minus_q_; }
  /// R̄(γ): start of the plateau.
  double plateau_start() const { return plateau_start_; }
  double plateau_value() const { return p_minus_q_ * gamma_; }
  double rho_max() const { return grid_(grid_.size() - 1); }
  const Eigen::VectorXd& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  /// Largest finite-difference slope of the table.
  double max_slope() const;
  /// Number of out-of-range evaluations clamped so far.
  std::int64_t clamped_count() const { return *clamped_; }

  void write_csv(std::ostream& out) const;

 private:
  FluxFunction() = default;

  double rho_c_ = kInfinity;
  double gamma_ = 1.0;
  double p_ = 1.0;
  double p_minus_q_ = 1.0;
  double plateau_start_ = kInfinity;
  Eigen::VectorXd grid_;
  Eigen::VectorXd values_;
  std::optional<RateFunction> g_;
  std::optional<DisorderLaw> q0_;
  std::shared_ptr<std::atomic<std::int64_t>> clamped_ = std::make_shared<std::atomic<std::int64_t>>(0);
};

/// Product measure with marginal θ_{β/α(x)} on `window` (∞ where β = α(x)).
/// One uniform is consumed per site in left-to-right order, so two calls
/// with the same stream and β1 ≤ β2 give pointwise ordered configurations.
Configuration sample_product(const Environment& env, const RateFunction& g, double beta, Window window,
                             CounterRng& rng, Boundaries boundaries = {});

}  // namespace zrp

#endif  // ZRP_MEASURES_HPP

#ifndef ZRP_ENV_HPP
#define ZRP_ENV_HPP

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace zrp {

/// Integer interval [left, right].
struct Window {
  std::int64_t left = 0;
  std::int64_t right = -1;

  std::int64_t size() const { return right - left + 1; }
  bool empty() const { return right < left; }
  bool contains(std::int64_t x) const { return left <= x && x <= right; }
  bool contains(const Window& w) const { return w.left >= left && w.right <= right; }
  friend bool operator==(const Window&, const Window&) = default;
};

/// Probability law Q0 of the disorder values, either finitely many atoms or
/// a density on [lo, hi] ⊂ (0, 1].
class DisorderLaw {
 public:
  struct Atom {
    double value;
    double weight;
  };

  /// Atoms are sorted by value; weights must sum to 1 (±1e-12).
  static DisorderLaw atoms(std::vector<Atom> atoms);
  static DisorderLaw dirac(double value) { return atoms({{value, 1.0}}); }
  /// Density pdf on [lo, hi]; `nodes` is the quadrature node count used
  /// whenever the law is integrated against.
  static DisorderLaw density(std::function<double(double)> pdf, double lo, double hi, int nodes = 512,
                             nlohmann::json descriptor = nullptr);
  /// (k+1)(a-lo)^k / (hi-lo)^(k+1) on [lo, hi]; k = 0 is uniform.
  static DisorderLaw power_density(double lo, double hi, double exponent, int nodes = 512);

  bool is_atomic() const { return atoms_.has_value(); }
  const std::vector<Atom>& atom_list() const;
  /// inf supp Q0.
  double support_min() const;
  double support_max() const;
  int nodes() const { return nodes_; }
  double pdf(double a) const;
  double cdf(double a) const;
  /// Right-continuous generalized inverse: inf{a : F(a) > u}.
  double quantile(double u) const;

  /// ∫ h(a) dQ0(a). For densities the integral is refined toward
  /// support_min(); `divergent` is set when it blows up.
  struct Expectation {
    double value;
    bool divergent;
  };
  Expectation expect(const std::function<double(double)>& h) const;

  nlohmann::json to_json() const;
  static DisorderLaw from_json(const nlohmann::json& j);

 private:
  DisorderLaw() = default;
  void build_cdf_table();

  std::optional<std::vector<Atom>> atoms_;
  std::function<double(double)> pdf_;
  std::function<double(double)> cdf_exact_;
  std::function<double(double)> quantile_exact_;
  double lo_ = 0.0;
  double hi_ = 1.0;
  int nodes_ = 512;
  Eigen::VectorXd cdf_grid_;
  Eigen::VectorXd cdf_values_;
  nlohmann::json descriptor_;
};

enum class Construction { iid, deterministic, explicit_list };

std::string to_string(Construction c);

/// Quenched disorder on a finite window. `c` is the declared infimum of
/// the (conceptually infinite) environment, carried as metadata because it
/// need not be attained inside the window.
class Environment {
 public:
  Environment(Window window, Eigen::VectorXd alpha, double c, DisorderLaw law, Construction construction,
              nlohmann::json provenance = nlohmann::json::object());

  const Window& window() const { return window_; }
  double operator()(std::int64_t x) const { return alpha_(x - window_.left); }
  double alpha(std::int64_t x) const;
  const Eigen::VectorXd& values() const { return alpha_; }
  double c() const { return c_; }
  const DisorderLaw& law() const { return law_; }
  Construction construction() const { return construction_; }
  const nlohmann::json& provenance() const { return provenance_; }
  double window_min() const { return alpha_.minCoeff(); }

  /// Copy with selected sites overridden (used for reservoir strengths and
  /// truncated environments). `c` is kept unless given.
  Environment with_values(const std::vector<std::pair<std::int64_t, double>>& overrides,
                          std::optional<double> c = std::nullopt) const;

  nlohmann::json to_json() const;
  static Environment from_json(const nlohmann::json& j);

 private:
  Window window_;
  Eigen::VectorXd alpha_;
  double c_;
  DisorderLaw law_;
  Construction construction_;
  nlohmann::json provenance_;
};

using EnvironmentPtr = std::shared_ptr<const Environment>;

struct IidSpec {
  DisorderLaw law;
};

/// Quantile-interpolated environment with defect sites x_n = sgn(n)⌊|n|^κ⌋.
struct DeterministicSpec {
  DisorderLaw law;
  double kappa = 2.0;
  /// Declared infimum; defaults to inf supp Q0.
  std::optional<double> c;
  /// Defect value α_n; defaults to min(1, c + 1/(|n|+2)).
  std::function<double(std::int64_t)> defect_value;
};

struct ExplicitSpec {
  std::vector<double> alpha;
  std::optional<double> c;
  std::optional<DisorderLaw> law;
};

using EnvironmentSpec = std::variant<ExplicitSpec, IidSpec, DeterministicSpec>;

/// Pure function of (spec, window, seed).
Environment build_environment(const EnvironmentSpec& spec, Window window, std::uint64_t seed);

/// Defect sites x_n covering `window` (plus one neighbour on each side).
std::vector<std::int64_t> defect_sites(double kappa, Window window);

/// Parses {"kind": "iid"|"deterministic"|"explicit", "q0": {...}, "window": [L,R], "kappa":..., "seed":...}.
struct ParsedEnvironmentSpec {
  EnvironmentSpec spec;
  Window window;
  std::uint64_t seed = 0;
};
ParsedEnvironmentSpec parse_environment_spec(const nlohmann::json& j);
Environment build_environment(const nlohmann::json& j);

/// Empirical law of α over a half-window, as sorted (value, probability) pairs.
using DiscreteLaw = std::vector<std::pair<double, double>>;

enum class Side { left, right };

DiscreteLaw empirical_disorder(const Environment& env, std::int64_t n, Side side);

/// Total-variation distance between a discrete law and an atomic Q0.
double total_variation(const DiscreteLaw& empirical, const DisorderLaw& law);

/// sup_a |F_emp(a) − F_Q0(a)|; meaningful for both atomic and density laws.
double kolmogorov_distance(const DiscreteLaw& empirical, const DisorderLaw& law);

/// Nearest slow sites around the origin. An empty optional stands for the
/// ∓∞ sentinel; the scan is restricted to the environment's window.
struct DefectBounds {
  std::optional<std::int64_t> left;   // A_eps
  std::optional<std::int64_t> right;  // a_eps
  double eps = 0.0;
};

DefectBounds defect_bounds(const Environment& env, double eps);

}  // namespace zrp

#endif  // ZRP_ENV_HPP

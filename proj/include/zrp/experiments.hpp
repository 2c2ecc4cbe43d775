#ifndef ZRP_EXPERIMENTS_HPP
#define ZRP_EXPERIMENTS_HPP

#include "zrp/configuration.hpp"
#include "zrp/hydro.hpp"
#include "zrp/measures.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace zrp {

extern const char* const kCodeVersion;

/// Initial data. Microscopic site x stands for the macroscopic cell
/// [x/N, (x+1)/N).
struct InitialCondition {
  enum class Kind { empty, product, pattern, source, profile };
  Kind kind = Kind::empty;
  /// product: mean density (converted to a fugacity) unless `fugacity` is set.
  std::optional<double> density;
  std::optional<double> fugacity;
  /// pattern: occupancies repeated from the left end of `support`
  /// (default: the whole window), zero elsewhere.
  std::vector<std::int64_t> pattern;
  std::optional<std::pair<std::int64_t, std::int64_t>> support;
  /// source: ∞ on [L, site].
  std::int64_t site = 0;
  /// profile: macroscopic density realized by cumulative rounding.
  PiecewiseConstant profile;

  static InitialCondition from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// Spatially constant macroscopic density, if any (pattern mean, product
  /// density, 0 for empty).
  std::optional<double> constant_density(const RateFunction& g, const DisorderLaw& q0) const;
};

struct ExperimentConfig {
  std::string experiment;
  /// Environment spec without a window; the experiment supplies it.
  nlohmann::json environment;
  RateFunction g = RateFunction::indicator();
  double p = 1.0;
  InitialCondition initial;
  double N = 1.0;  // scaling parameter
  double t = 1.0;  // macroscopic time; microscopic horizon N·t
  int replicas = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  double V = 3.0;  // light-cone speed
  std::optional<std::pair<std::int64_t, std::int64_t>> window;
  BoundaryMode boundary = BoundaryMode::closed;
  nlohmann::json params = nlohmann::json::object();

  static ExperimentConfig from_json(const nlohmann::json& j);
  /// Canonical form used for the config hash (threads excluded).
  nlohmann::json to_json() const;
  double horizon() const { return N * t; }
};

/// report.json plus named CSV files.
struct Report {
  nlohmann::json json;
  std::vector<std::pair<std::string, std::string>> files;
  bool passed() const;
};

/// Writes report.json and the CSV files into `dir` (created if missing).
void write_report(const Report& report, const std::filesystem::path& dir);

/// Dispatches on cfg.experiment: hydro, local_equilibrium, cesaro,
/// convergence, current, condensation, coupling.
Report run_experiment(const ExperimentConfig& cfg);

/// Particle system from a rounded profile, box-averaged, against the
/// Godunov evolution and (for one-jump data) the exact Riemann solution.
Report run_hydro_compare(const ExperimentConfig& cfg);
/// Occupancy law at x_N + S at time N·t against the local-equilibrium marginal.
Report run_local_equilibrium(const ExperimentConfig& cfg);
/// Time-averaged occupancy law over (N(t−δ), Nt] for each δ.
Report run_cesaro_marginal(const ExperimentConfig& cfg);
/// Marginals at fixed sites at times T, 2T, 4T against μ^{α, ρ∧ρ_c}.
Report run_convergence(const ExperimentConfig& cfg);
/// t^{-1}Γ for stationary data (fixed and moving observers) or a source.
Report run_current_checks(const ExperimentConfig& cfg);
/// Slow-site growth, downstream current and fast-site marginals.
Report run_condensation(const ExperimentConfig& cfg);
/// Pathwise coupling properties over seeded runs.
Report run_coupling_checks(const ExperimentConfig& cfg);

}  // namespace zrp

#endif  // ZRP_EXPERIMENTS_HPP

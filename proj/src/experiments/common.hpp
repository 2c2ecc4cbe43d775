#ifndef ZRP_EXPERIMENTS_COMMON_HPP
#define ZRP_EXPERIMENTS_COMMON_HPP

#include "zrp/env.hpp"
#include "zrp/experiments.hpp"
#include "zrp/random.hpp"
#include "zrp/simulate.hpp"
#include "zrp/stats.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace zrp::detail {

/// Runs fn(0..replicas-1) on up to `threads` workers; results are ordered
/// by replica index so the merge does not depend on scheduling.
template <class F>
auto run_replicas(int replicas, int threads, F&& fn) {
  using R = std::invoke_result_t<F&, int>;
  std::vector<std::optional<R>> slots(static_cast<std::size_t>(replicas));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mutex;
  auto worker = [&] {
    for (int r; (r = next++) < replicas;) {
      try {
        slots[static_cast<std::size_t>(r)] = fn(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int k = std::clamp(threads, 1, std::max(replicas, 1));
  std::vector<std::thread> pool;
  for (int i = 1; i < k; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  std::vector<R> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Seeds of replica r: initial data, event stream, label draws.
struct ReplicaSeeds {
  std::uint64_t init;
  std::uint64_t events;
  std::uint64_t labels;
};
ReplicaSeeds seeds_for(std::uint64_t master, int replica);

struct Context {
  const ExperimentConfig* cfg = nullptr;
  double T = 0.0;
  Window region;
  Window window;
  EnvironmentPtr env;
  std::optional<FluxFunction> flux;
  Boundaries boundaries;
  /// Infimum of the environment before any reservoir override.
  double c_env = 1.0;

  double critical_density() const { return flux->plateau_start(); }
  double c() const { return c_env; }
};

/// Window from cfg.window or region widened by ⌈V·T⌉ (left always, right
/// only when p < 1; one extra site on the right otherwise). Builds the
/// environment and the flux table. With reservoir boundaries and a product
/// initial state the reservoir rates are set to its fugacity.
/// `horizon` overrides the microscopic horizon N·t when positive.
Context make_context(const ExperimentConfig& cfg, Window region, bool check_cone = true, double horizon = 0.0);

/// Fugacity of the product initial state.
double product_fugacity(const Context& ctx);
Configuration initial_configuration(const Context& ctx, std::uint64_t seed);

/// Local-equilibrium fugacity for macroscopic density ρ: R̄^{-1}(ρ) below
/// the critical density, c at or above it.
double fugacity_for_density(const Context& ctx, double rho);
ThetaMarginal site_marginal(const Context& ctx, std::int64_t x, double beta);

/// ρ(t, u) from the initial data: constant data stay constant, one-jump
/// profiles use the exact Riemann solution, others the Godunov scheme.
RiemannValue hydro_density(const Context& ctx, double u, double t);

/// Report skeleton with experiment, config hash, seed, version, replicas.
nlohmann::json report_header(const ExperimentConfig& cfg);
/// Appends {name, value, relation, threshold, pass}.
void add_check(nlohmann::json& report, const std::string& name, double value, const std::string& relation,
               double threshold);
void add_check(nlohmann::json& report, const std::string& name, bool pass, const nlohmann::json& detail);

std::string fmt(double v);
/// JSON number, or "inf"/"-inf".
nlohmann::json num(double v);

}  // namespace zrp::detail

#endif  // ZRP_EXPERIMENTS_COMMON_HPP

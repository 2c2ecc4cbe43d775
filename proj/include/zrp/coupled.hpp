#ifndef ZRP_COUPLED_HPP
#define ZRP_COUPLED_HPP

#include "zrp/configuration.hpp"
#include "zrp/env.hpp"
#include "zrp/harris.hpp"
#include "zrp/measures.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace zrp {

/// Nested decomposition η^1 ≤ … ≤ η^n of a designated η process, compared
/// against a ξ process. Entries are indices into CoupledState::configs.
/// Matching between η and ξ particles is implicit: at each site the
/// min(η, ξ) lowest-class η particles are the matched ones.
struct ClassStructure {
  std::vector<std::size_t> levels;  // η^1, …, η^n (η^n = η)
  std::size_t xi = 0;
};

/// Transitions of the class decomposition for one Harris event.
enum class Transition : int {
  none = 0,
  matched_pair_lower = 1,   // (i)   class i < k pair moves with a ξ particle
  matched_pair_k = 2,       // (ii)  class k pair moves
  unmatched_eta_k = 3,      // (iii) unmatched class-k η particle alone
  unmatched_xi = 4,         // (iv)  unmatched ξ particle alone
  unmatched_eta_upper = 5,  // (v)   unmatched class i > k η particle alone
};

enum class Coalescence : int { none = 0, xi_arrival = 1, eta_arrival = 2 };

struct CouplingLedger {
  std::int64_t coalescences = 0;
  /// Arriving matched ξ particles that switch to a lower-class η partner.
  std::int64_t rematches = 0;
  std::array<std::int64_t, 6> transitions{};
};

struct EventOutcome {
  std::uint32_t jumped = 0;  // bit c set when configs[c] jumped
  Transition transition = Transition::none;
  int jumping_class = 0;  // class i of the moving η particle (0 if none)
  int class_index = 0;    // k of the pre-jump state at the event site
  Coalescence coalescence = Coalescence::none;
  bool rematch = false;
  bool any() const { return jumped != 0; }
};

/// A particle followed individually. `eta_class` particles use the ordered
/// labelling rule (highest label leaves to the right, lowest to the left);
/// `xi_unmatched` particles are unmatched ξ particles, selected uniformly
/// among the unmatched ξ particles at their site.
struct TaggedParticle {
  enum class Kind { eta_class, xi_unmatched };
  Kind kind = Kind::eta_class;
  int cls = 1;               // class for eta_class particles
  std::int64_t site = 0;
  std::int64_t rank = 0;     // label rank among same-class particles at the site (0 = lowest)
  std::int64_t start = 0;
  std::int64_t jumps = 0;
  bool alive = true;         // false once an unmatched ξ particle has been matched
  double death_time = 0.0;
};

/// Stack of configurations driven by one Harris system.
class CoupledState {
 public:
  CoupledState(std::vector<Configuration> configs, std::vector<EnvironmentPtr> envs, RateFunction g, double p,
               std::uint64_t label_seed = 0);
  /// Same environment for every config.
  CoupledState(std::vector<Configuration> configs, EnvironmentPtr env, RateFunction g, double p,
               std::uint64_t label_seed = 0);

  std::vector<Configuration> configs;
  std::vector<EnvironmentPtr> envs;
  RateFunction g;
  double p;
  double time = 0.0;
  std::optional<ClassStructure> classes;
  CouplingLedger ledger;
  std::vector<TaggedParticle> tagged;

  const Window& window() const { return configs.front().window(); }
  std::size_t size() const { return configs.size(); }
  bool shared_environment() const;

  /// Enables class bookkeeping; checks the nesting η^1 ≤ … ≤ η^n.
  void set_classes(ClassStructure cs);
  /// Tags the class-`cls` particle at `site` with the given rank.
  void tag_eta(int cls, std::int64_t site, std::int64_t rank);
  /// Tags one unmatched ξ particle at `site`.
  void tag_xi(std::int64_t site);

  CounterRng& label_rng() { return label_rng_; }

 private:
  CounterRng label_rng_;
};

/// Applies one Harris event to every configuration: configs[c] jumps from
/// e.x to e.x+e.z iff e.u ≤ α_c(e.x) g(η_c(e.x)) and the target is in the
/// window. Updates classes, ledger and tagged particles when enabled.
EventOutcome apply_event(CoupledState& state, const HarrisEvent& e);

struct Discrepancies {
  Configuration beta;   // [η − ξ]^+
  Configuration gamma;  // [ξ − η]^+
  ExtendedInt D;        // Σ γ
};

/// β, γ and D for η = configs[eta], ξ = configs[xi]. Sites where both are
/// infinite carry no discrepancy.
Discrepancies discrepancies(const CoupledState& state, std::size_t eta = 0, std::size_t xi = 1);
ExtendedInt discrepancy_count(const Configuration& eta, const Configuration& xi);

}  // namespace zrp

#endif  // ZRP_COUPLED_HPP

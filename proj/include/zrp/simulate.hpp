#ifndef ZRP_SIMULATE_HPP
#define ZRP_SIMULATE_HPP

#include "zrp/coupled.hpp"
#include "zrp/harris.hpp"

#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

namespace zrp {

/// Signed particle current across a piecewise-constant path x_s with unit
/// moves. Jumps from x_s to x_s+1 count +1, from x_s+1 to x_s count −1; a
/// move of the path at time s contributes −(x_s − x_{s−}) η_s(max(x_s, x_{s−})).
class CurrentObserver {
 public:
  /// Constant path at `site` (current across the bond (site, site+1)).
  static CurrentObserver fixed(std::int64_t site, int id = 0);
  /// Path starting at `start` with (time, ±1) moves in increasing time order.
  static CurrentObserver path(std::int64_t start, std::vector<std::pair<double, int>> moves, int id = 0);
  /// x_s = start + sgn(v)⌊|v| s⌋ for s ∈ [0, horizon].
  static CurrentObserver linear(std::int64_t start, double velocity, double horizon, int id = 0);

  int id() const { return id_; }
  std::int64_t position() const { return position_; }
  std::int64_t start() const { return start_; }
  const std::vector<std::pair<double, int>>& moves() const { return moves_; }

  /// Γ for config c: jump part plus path-motion part.
  ExtendedInt gamma(std::size_t c = 0) const { return ExtendedInt(jump_part_.at(c)) + motion_part_.at(c); }
  std::int64_t jump_part(std::size_t c = 0) const { return jump_part_.at(c); }
  ExtendedInt motion_part(std::size_t c = 0) const { return motion_part_.at(c); }

  /// Called by simulate.
  void attach(std::size_t configs);
  void record_jump(std::size_t c, std::int64_t from, int z) {
    if (from == position_ && z > 0) ++jump_part_[c];
    else if (from == position_ + 1 && z < 0) --jump_part_[c];
  }
  double next_move_time() const;
  void apply_next_move(const CoupledState& state);

 private:
  int id_ = 0;
  std::int64_t start_ = 0;
  std::int64_t position_ = 0;
  std::vector<std::pair<double, int>> moves_;
  std::size_t next_ = 0;
  std::vector<std::int64_t> jump_part_;
  std::vector<ExtendedInt> motion_part_;
};

struct Snapshot {
  double time = 0.0;
  std::vector<Configuration> configs;
};

struct CurrentRecord {
  double time = 0.0;
  int observer = 0;
  std::vector<ExtendedInt> gamma;  // one per config
};

struct SimulationOptions {
  /// Draw events only over the smallest interval containing every site
  /// that holds particles in some config. Events elsewhere are no-ops, so
  /// by memorylessness the law of the dynamics is unchanged.
  bool restrict_to_active = true;
  bool record_snapshots = true;
  std::function<void(const HarrisEvent&, const EventOutcome&, const CoupledState&)> on_event;
};

struct Observations {
  std::vector<Snapshot> snapshots;
  std::vector<CurrentRecord> currents;
  std::int64_t events = 0;
  std::int64_t jumps = 0;
};

/// Runs the coupled dynamics on (state.time, state.time + T]. Snapshot
/// times are absolute; observer currents are recorded at every snapshot
/// time and at the horizon. Events beyond the horizon are discarded.
Observations simulate(CoupledState& state, double T, EventStream& stream, std::vector<CurrentObserver>& observers,
                      const std::vector<double>& snapshot_times = {}, const SimulationOptions& options = {});

/// Throws unless `region` widened by V·T (on the left, and also on the
/// right when p < 1) lies inside `window`.
void check_light_cone(const Window& window, const Window& region, double V, double T, double p);

/// CSV with columns replica,time,site,occ_1..occ_m ("inf" for ∞).
void write_snapshot_header(std::ostream& out, std::size_t configs);
void write_snapshot_rows(std::ostream& out, int replica, const Snapshot& s);
/// CSV with columns replica,time,observer_id,gamma for config `c`.
void write_current_header(std::ostream& out);
void write_current_rows(std::ostream& out, int replica, const std::vector<CurrentRecord>& records, std::size_t c = 0);

}  // namespace zrp

#endif  // ZRP_SIMULATE_HPP

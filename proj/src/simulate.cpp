#include "zrp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace zrp {

// ---------------------------------------------------------------- CurrentObserver

CurrentObserver CurrentObserver::fixed(std::int64_t site, int id) { return path(site, {}, id); }

CurrentObserver CurrentObserver::path(std::int64_t start, std::vector<std::pair<double, int>> moves, int id) {
  for (std::size_t i = 0; i < moves.size(); ++i) {
    if (moves[i].second != 1 && moves[i].second != -1) throw std::invalid_argument("observer: moves must be ±1");
    if (i > 0 && !(moves[i].first > moves[i - 1].first))
      throw std::invalid_argument("observer: move times must increase");
  }
  CurrentObserver o;
  o.id_ = id;
  o.start_ = start;
  o.position_ = start;
  o.moves_ = std::move(moves);
  return o;
}

CurrentObserver CurrentObserver::linear(std::int64_t start, double velocity, double horizon, int id) {
  std::vector<std::pair<double, int>> moves;
  if (velocity != 0.0) {
    const int dir = velocity > 0 ? 1 : -1;
    const double speed = std::abs(velocity);
    for (std::int64_t k = 1; k / speed <= horizon; ++k) moves.emplace_back(static_cast<double>(k) / speed, dir);
  }
  return path(start, std::move(moves), id);
}

void CurrentObserver::attach(std::size_t configs) {
  if (jump_part_.size() == configs) return;
  if (!jump_part_.empty()) throw std::logic_error("observer: attached to a different number of configs");
  jump_part_.assign(configs, 0);
  motion_part_.assign(configs, ExtendedInt(0));
}

double CurrentObserver::next_move_time() const {
  return next_ < moves_.size() ? moves_[next_].first : std::numeric_limits<double>::infinity();
}

void CurrentObserver::apply_next_move(const CoupledState& state) {
  const int d = moves_.at(next_).second;
  const std::int64_t site = d > 0 ? position_ + 1 : position_;
  for (std::size_t c = 0; c < state.configs.size(); ++c) {
    const Configuration& cfg = state.configs[c];
    const ExtendedInt occ = cfg.window().contains(site) ? ExtendedInt::from(cfg[site]) : ExtendedInt(0);
    motion_part_[c] = motion_part_[c] + (d > 0 ? -occ : occ);
  }
  position_ += d;
  ++next_;
}

// ---------------------------------------------------------------- simulate

namespace {

Window active_range(const CoupledState& s) {
  const Window& w = s.window();
  std::int64_t lo = w.right + 1;
  std::int64_t hi = w.left - 1;
  for (const Configuration& c : s.configs) {
    const auto& occ = c.occupancies();
    for (std::int64_t x = w.left; x < lo; ++x)
      if (!occ[static_cast<std::size_t>(x - w.left)].is_zero()) {
        lo = x;
        break;
      }
    for (std::int64_t x = w.right; x > hi; --x)
      if (!occ[static_cast<std::size_t>(x - w.left)].is_zero()) {
        hi = x;
        break;
      }
  }
  return Window{lo, hi};
}

}  // namespace

Observations simulate(CoupledState& state, double T, EventStream& stream, std::vector<CurrentObserver>& observers,
                      const std::vector<double>& snapshot_times, const SimulationOptions& options) {
  if (!(T > 0.0)) throw std::invalid_argument("simulate: horizon must be positive");
  if (stream.p() != state.p) throw std::invalid_argument("simulate: stream and state disagree on p");
  const double end = state.time + T;
  const Window w = state.window();
  const std::size_t m = state.configs.size();
  for (CurrentObserver& o : observers) o.attach(m);

  std::vector<double> snaps;
  for (double t : snapshot_times)
    if (t > state.time && t <= end) snaps.push_back(t);
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;

  Observations obs;
  auto record = [&](double t) {
    if (options.record_snapshots) obs.snapshots.push_back({t, state.configs});
    for (const CurrentObserver& o : observers) {
      CurrentRecord r{t, o.id(), {}};
      for (std::size_t c = 0; c < m; ++c) r.gamma.push_back(o.gamma(c));
      obs.currents.push_back(std::move(r));
    }
  };
  // Scheduled items strictly before `limit` (or at it when inclusive).
  auto run_schedule = [&](double limit, bool inclusive) {
    for (;;) {
      double t_obs = std::numeric_limits<double>::infinity();
      CurrentObserver* who = nullptr;
      for (CurrentObserver& o : observers)
        if (o.next_move_time() < t_obs) {
          t_obs = o.next_move_time();
          who = &o;
        }
      const double t_snap = next_snap < snaps.size() ? snaps[next_snap] : std::numeric_limits<double>::infinity();
      const double t = std::min(t_obs, t_snap);
      if (!(inclusive ? t <= limit : t < limit)) return;
      if (t_obs <= t_snap) {
        who->apply_next_move(state);
      } else {
        record(t_snap);
        ++next_snap;
      }
    }
  };

  // Single-process fast path: no classes, observers or hooks.
  const bool fast = m == 1 && !state.classes && observers.empty() && !options.on_event;
  auto& occ0 = state.configs.front().occupancies();
  const double* alpha0 = state.envs.front()->values().data() + (w.left - state.envs.front()->window().left);
  const std::vector<double>& gv = state.g.values();
  const auto n_sat = static_cast<std::int64_t>(gv.size()) - 1;

  Window range = options.restrict_to_active ? active_range(state) : w;
  const std::int64_t rescan_every = std::max<std::int64_t>(w.size(), 64);
  std::int64_t since_rescan = 0;

  double t = state.time;
  while (true) {
    if (range.empty()) {
      run_schedule(end, true);
      break;
    }
    const HarrisEvent e = stream.next(range, t);
    if (e.t > end) {
      run_schedule(end, true);
      break;
    }
    run_schedule(e.t, false);
    t = e.t;
    state.time = t;
    ++obs.events;
    const std::int64_t y = e.x + e.z;
    if (fast) {
      if (y >= w.left && y <= w.right) {
        Occupancy& o = occ0[static_cast<std::size_t>(e.x - w.left)];
        if (!o.is_zero()) {
          const double rate = alpha0[e.x - w.left] * (o.is_infinite() || o.count() >= n_sat ? 1.0 : gv[static_cast<std::size_t>(o.count())]);
          if (e.u <= rate) {
            --o;
            ++occ0[static_cast<std::size_t>(y - w.left)];
            ++obs.jumps;
            if (y < range.left) range.left = y;
            if (y > range.right) range.right = y;
          }
        }
      }
    } else {
      const EventOutcome out = apply_event(state, e);
      if (out.any()) {
        ++obs.jumps;
        for (CurrentObserver& o : observers)
          for (std::size_t c = 0; c < m; ++c)
            if (out.jumped >> c & 1u) o.record_jump(c, e.x, e.z);
        if (y < range.left) range.left = y;
        if (y > range.right) range.right = y;
      }
      if (options.on_event) options.on_event(e, out, state);
    }
    if (options.restrict_to_active && ++since_rescan >= rescan_every) {
      range = active_range(state);
      since_rescan = 0;
    }
  }
  state.time = end;
  for (const CurrentObserver& o : observers) {
    CurrentRecord r{end, o.id(), {}};
    for (std::size_t c = 0; c < m; ++c) r.gamma.push_back(o.gamma(c));
    if (obs.currents.empty() || obs.currents.back().time != end) obs.currents.push_back(std::move(r));
  }
  return obs;
}

void check_light_cone(const Window& window, const Window& region, double V, double T, double p) {
  const auto margin = static_cast<std::int64_t>(std::ceil(V * T));
  const bool left_ok = region.left - margin >= window.left;
  const bool right_ok = p == 1.0 || region.right + margin <= window.right;
  if (!left_ok || !right_ok)
    throw std::invalid_argument("light cone: region [" + std::to_string(region.left) + "," +
                                std::to_string(region.right) + "] plus margin " + std::to_string(margin) +
                                " exceeds window [" + std::to_string(window.left) + "," +
                                std::to_string(window.right) + "]");
}

// ---------------------------------------------------------------- CSV

void write_snapshot_header(std::ostream& out, std::size_t configs) {
  out << "replica,time,site";
  for (std::size_t c = 1; c <= configs; ++c) out << ",occ_" << c;
  out << '\n';
}

void write_snapshot_rows(std::ostream& out, int replica, const Snapshot& s) {
  if (s.configs.empty()) return;
  const Window& w = s.configs.front().window();
  for (std::int64_t x = w.left; x <= w.right; ++x) {
    out << replica << ',' << s.time << ',' << x;
    for (const Configuration& c : s.configs) out << ',' << c[x];
    out << '\n';
  }
}

void write_current_header(std::ostream& out) { out << "replica,time,observer_id,gamma\n"; }

void write_current_rows(std::ostream& out, int replica, const std::vector<CurrentRecord>& records, std::size_t c) {
  for (const CurrentRecord& r : records) out << replica << ',' << r.time << ',' << r.observer << ',' << r.gamma.at(c) << '\n';
}

}  // namespace zrp

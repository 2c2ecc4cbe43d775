#include "zrp/coupled.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace zrp {

CoupledState::CoupledState(std::vector<Configuration> configs_, std::vector<EnvironmentPtr> envs_, RateFunction g_,
                           double p_, std::uint64_t label_seed)
    : configs(std::move(configs_)), envs(std::move(envs_)), g(std::move(g_)), p(p_), label_rng_(label_seed) {
  if (configs.empty()) throw std::invalid_argument("coupled state: no configurations");
  if (configs.size() > 32) throw std::invalid_argument("coupled state: at most 32 configurations");
  if (envs.size() != configs.size()) throw std::invalid_argument("coupled state: one environment per configuration");
  if (!(p > 0.5 && p <= 1.0)) throw std::invalid_argument("coupled state: p must lie in (1/2, 1]");
  for (std::size_t c = 0; c < configs.size(); ++c) {
    if (!(configs[c].window() == configs.front().window()))
      throw std::invalid_argument("coupled state: configurations must share a window");
    if (!envs[c] || !envs[c]->window().contains(configs[c].window()))
      throw std::invalid_argument("coupled state: environment does not cover the window");
  }
}

CoupledState::CoupledState(std::vector<Configuration> configs_, EnvironmentPtr env, RateFunction g_, double p_,
                           std::uint64_t label_seed)
    : CoupledState(std::vector<Configuration>(configs_), std::vector<EnvironmentPtr>(configs_.size(), env),
                   std::move(g_), p_, label_seed) {}

bool CoupledState::shared_environment() const {
  return std::all_of(envs.begin(), envs.end(), [&](const EnvironmentPtr& e) { return e == envs.front(); });
}

void CoupledState::set_classes(ClassStructure cs) {
  if (cs.levels.empty()) throw std::invalid_argument("classes: need at least one level");
  for (std::size_t i : cs.levels)
    if (i >= configs.size()) throw std::invalid_argument("classes: level index out of range");
  if (cs.xi >= configs.size()) throw std::invalid_argument("classes: xi index out of range");
  for (std::size_t j = 1; j < cs.levels.size(); ++j)
    if (!configs[cs.levels[j - 1]].leq(configs[cs.levels[j]]))
      throw std::invalid_argument("classes: levels are not nested");
  classes = std::move(cs);
}

namespace {

Occupancy level_at(const CoupledState& s, int j, std::int64_t x) {
  if (j == 0) return Occupancy(0);
  return s.configs[s.classes->levels[static_cast<std::size_t>(j - 1)]][x];
}

std::int64_t class_count(const CoupledState& s, int j, std::int64_t x) {
  const Occupancy hi = level_at(s, j, x);
  const Occupancy lo = level_at(s, j - 1, x);
  if (hi.is_infinite() || lo.is_infinite())
    throw std::logic_error("tagged particle: infinite class occupancy at site " + std::to_string(x));
  return hi.count() - lo.count();
}

std::int64_t unmatched_xi(const CoupledState& s, std::int64_t x) {
  const Occupancy xi = s.configs[s.classes->xi][x];
  const Occupancy eta = s.configs[s.classes->levels.back()][x];
  if (xi.is_infinite() || eta.is_infinite())
    throw std::logic_error("tagged particle: infinite occupancy at site " + std::to_string(x));
  return std::max<std::int64_t>(xi.count() - eta.count(), 0);
}

// Classification of the event from pre-jump occupancies.
void classify(CoupledState& s, const HarrisEvent& e, EventOutcome& out) {
  const ClassStructure& cs = *s.classes;
  const int n = static_cast<int>(cs.levels.size());
  const std::int64_t x = e.x;
  const std::int64_t y = e.x + e.z;
  const Occupancy xi_x = s.configs[cs.xi][x];

  int k = 0;
  if (!xi_x.is_zero()) {
    k = n + 1;
    for (int j = 1; j <= n; ++j)
      if (xi_x <= level_at(s, j, x)) {
        k = j;
        break;
      }
  }
  int i = 0;
  for (int j = 1; j <= n; ++j)
    if (out.jumped >> cs.levels[static_cast<std::size_t>(j - 1)] & 1u) {
      i = j;
      break;
    }
  const bool xi_jumps = out.jumped >> cs.xi & 1u;
  out.class_index = k;
  out.jumping_class = i;

  auto malformed = [&](const char* what) {
    throw std::logic_error(std::string("class bookkeeping: ") + what + " at site " + std::to_string(x));
  };
  if (i == 0) {
    if (xi_jumps) {
      if (k != n + 1) malformed("solo xi jump without unmatched xi particles");
      out.transition = Transition::unmatched_xi;
    }
  } else if (i < k) {
    if (!xi_jumps) malformed("matched pair split");
    out.transition = Transition::matched_pair_lower;
  } else if (i == k) {
    out.transition = xi_jumps ? Transition::matched_pair_k : Transition::unmatched_eta_k;
  } else {
    if (xi_jumps) malformed("xi jump with an upper-class eta particle");
    out.transition = Transition::unmatched_eta_upper;
  }
  if (out.transition == Transition::none) return;

  const Occupancy eta_y = s.configs[cs.levels.back()][y];
  const Occupancy xi_y = s.configs[cs.xi][y];
  switch (out.transition) {
    case Transition::unmatched_xi:
      if (eta_y > xi_y) out.coalescence = Coalescence::xi_arrival;
      break;
    case Transition::unmatched_eta_k:
    case Transition::unmatched_eta_upper:
      if (xi_y > eta_y) out.coalescence = Coalescence::eta_arrival;
      break;
    case Transition::matched_pair_lower:
    case Transition::matched_pair_k:
      if (eta_y > xi_y) {
        int k_prime = n;
        for (int j = 1; j <= n; ++j)
          if (level_at(s, j, y) > xi_y) {
            k_prime = j;
            break;
          }
        out.rematch = i > k_prime;
      }
      break;
    case Transition::none:
      break;
  }
}

// Tagged-particle moves, evaluated on pre-jump occupancies.
void update_tagged(CoupledState& s, const HarrisEvent& e, const EventOutcome& out) {
  const std::int64_t x = e.x;
  const std::int64_t y = e.x + e.z;
  const int i = out.jumping_class;
  for (TaggedParticle& tp : s.tagged) {
    if (tp.kind != TaggedParticle::Kind::eta_class || i != tp.cls || !tp.alive) continue;
    if (tp.site == x) {
      const std::int64_t cnt = class_count(s, tp.cls, x);
      if (e.z > 0) {
        if (tp.rank == cnt - 1) {
          tp.site = y;
          tp.rank = 0;
          ++tp.jumps;
        }
      } else if (tp.rank == 0) {
        tp.site = y;
        tp.rank = class_count(s, tp.cls, y);
        ++tp.jumps;
      } else {
        --tp.rank;
      }
    } else if (tp.site == y && e.z > 0) {
      ++tp.rank;
    }
  }

  // Unmatched ξ particles: one uniform draw selects which unmatched ξ
  // particle at the site is involved; tagged ones occupy the first slots.
  auto select = [&](std::int64_t site, auto&& action) {
    std::vector<TaggedParticle*> here;
    for (TaggedParticle& tp : s.tagged)
      if (tp.kind == TaggedParticle::Kind::xi_unmatched && tp.alive && tp.site == site) here.push_back(&tp);
    if (here.empty()) return;
    const std::int64_t cnt = unmatched_xi(s, site);
    const auto r = static_cast<std::int64_t>(uniform_index(s.label_rng(), static_cast<std::uint64_t>(cnt)));
    if (r < static_cast<std::int64_t>(here.size())) action(*here[static_cast<std::size_t>(r)]);
  };
  if (out.transition == Transition::unmatched_xi) {
    select(x, [&](TaggedParticle& tp) {
      tp.site = y;
      ++tp.jumps;
      if (out.coalescence == Coalescence::xi_arrival) {
        tp.alive = false;
        tp.death_time = e.t;
      }
    });
  } else if (out.coalescence == Coalescence::eta_arrival) {
    select(y, [&](TaggedParticle& tp) {
      tp.alive = false;
      tp.death_time = e.t;
    });
  }
}

}  // namespace

void CoupledState::tag_eta(int cls, std::int64_t site, std::int64_t rank) {
  if (!classes) throw std::logic_error("tag_eta: classes not enabled");
  if (cls < 1 || cls > static_cast<int>(classes->levels.size())) throw std::invalid_argument("tag_eta: bad class");
  if (rank < 0 || rank >= class_count(*this, cls, site)) throw std::invalid_argument("tag_eta: no such particle");
  for (const TaggedParticle& tp : tagged)
    if (tp.kind == TaggedParticle::Kind::eta_class && tp.cls == cls && tp.site == site && tp.rank == rank)
      throw std::invalid_argument("tag_eta: particle already tagged");
  tagged.push_back({TaggedParticle::Kind::eta_class, cls, site, rank, site, 0, true, 0.0});
}

void CoupledState::tag_xi(std::int64_t site) {
  if (!classes) throw std::logic_error("tag_xi: classes not enabled");
  std::int64_t already = 0;
  for (const TaggedParticle& tp : tagged)
    if (tp.kind == TaggedParticle::Kind::xi_unmatched && tp.alive && tp.site == site) ++already;
  if (already >= unmatched_xi(*this, site)) throw std::invalid_argument("tag_xi: no untagged unmatched xi particle");
  tagged.push_back({TaggedParticle::Kind::xi_unmatched, 0, site, 0, site, 0, true, 0.0});
}

EventOutcome apply_event(CoupledState& state, const HarrisEvent& e) {
  EventOutcome out;
  const Window& w = state.window();
  const std::int64_t x = e.x;
  const std::int64_t y = x + e.z;
  if (!w.contains(x)) throw std::out_of_range("apply_event: site outside window");
  if (!w.contains(y)) return out;  // off-window jumps are rejected
  const std::size_t m = state.configs.size();
  for (std::size_t c = 0; c < m; ++c) {
    const Occupancy o = state.configs[c][x];
    if (o.is_zero()) continue;
    if (e.u <= (*state.envs[c])(x) * state.g(o)) out.jumped |= 1u << c;
  }
  if (!out.any()) return out;
  if (state.classes) {
    classify(state, e, out);
    ++state.ledger.transitions[static_cast<std::size_t>(out.transition)];
    if (out.coalescence != Coalescence::none) ++state.ledger.coalescences;
    if (out.rematch) ++state.ledger.rematches;
    if (!state.tagged.empty()) update_tagged(state, e, out);
  }
  for (std::size_t c = 0; c < m; ++c) {
    if (!(out.jumped >> c & 1u)) continue;
    --state.configs[c][x];
    ++state.configs[c][y];
  }
  return out;
}

ExtendedInt discrepancy_count(const Configuration& eta, const Configuration& xi) {
  if (!(eta.window() == xi.window())) throw std::invalid_argument("discrepancies: windows differ");
  std::int64_t d = 0;
  for (std::int64_t x = eta.window().left; x <= eta.window().right; ++x) {
    const Occupancy a = eta[x];
    const Occupancy b = xi[x];
    if (b.is_infinite()) {
      if (!a.is_infinite()) return ExtendedInt::plus_infinity();
      continue;
    }
    if (a.is_infinite()) continue;
    d += std::max<std::int64_t>(b.count() - a.count(), 0);
  }
  return d;
}

Discrepancies discrepancies(const CoupledState& state, std::size_t eta, std::size_t xi) {
  if (eta >= state.size() || xi >= state.size()) throw std::out_of_range("discrepancies: config index");
  const Configuration& a = state.configs[eta];
  const Configuration& b = state.configs[xi];
  const Window w = a.window();
  Configuration beta(w), gamma(w);
  for (std::int64_t x = w.left; x <= w.right; ++x) {
    const Occupancy ea = a[x];
    const Occupancy eb = b[x];
    if (ea.is_infinite() && eb.is_infinite()) continue;
    if (ea.is_infinite()) {
      beta[x] = Occupancy::infinite();
    } else if (eb.is_infinite()) {
      gamma[x] = Occupancy::infinite();
    } else {
      beta[x] = Occupancy(std::max<std::int64_t>(ea.count() - eb.count(), 0));
      gamma[x] = Occupancy(std::max<std::int64_t>(eb.count() - ea.count(), 0));
    }
  }
  return {std::move(beta), std::move(gamma), discrepancy_count(a, b)};
}

}  // namespace zrp

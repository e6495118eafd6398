#include "tilebal/sim.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <string>

namespace tilebal {

namespace {

constexpr int kDr[4] = {-1, 0, 1, 0};  // N, E, S, W
constexpr int kDc[4] = {0, 1, 0, -1};

constexpr Move kDirMoves[4] = {Move::North, Move::East, Move::South, Move::West};

bool adjacent_to_water(const Level& terrain, Position p) {
  for (int d = 0; d < 4; ++d) {
    Position q{p.row + kDr[d], p.col + kDc[d]};
    if (terrain.in_bounds(q) && terrain.at(q) == TileKind::Water) return true;
  }
  return false;
}

// First move of a shortest passable path from `from` to the nearest cell
// satisfying `target`. Nearest = first match in BFS order (neighbor order
// N,E,S,W), which is deterministic. Stay if already there or unreachable.
template <class Pred>
Move step_toward(const Level& terrain, Position from, Pred target) {
  if (target(from)) return Move::Stay;

  const int n = terrain.cell_count();
  std::vector<int> parent_dir(static_cast<size_t>(n), -1);  // direction taken to enter cell
  std::vector<char> seen(static_cast<size_t>(n), 0);
  std::deque<Position> queue;
  queue.push_back(from);
  seen[terrain.index(from)] = 1;

  while (!queue.empty()) {
    Position p = queue.front();
    queue.pop_front();
    for (int d = 0; d < 4; ++d) {
      Position q{p.row + kDr[d], p.col + kDc[d]};
      if (!terrain.in_bounds(q) || seen[terrain.index(q)] || !passable(terrain.at(q))) continue;
      seen[terrain.index(q)] = 1;
      parent_dir[terrain.index(q)] = d;
      if (target(q)) {
        // Walk back to the first step out of `from`.
        Position cur = q;
        int dir = d;
        for (;;) {
          Position prev{cur.row - kDr[dir], cur.col - kDc[dir]};
          if (prev == from) return kDirMoves[dir];
          cur = prev;
          dir = parent_dir[terrain.index(cur)];
        }
      }
      queue.push_back(q);
    }
  }
  return Move::Stay;
}

void consume_forest(GameState& state, const SimConfig& cfg, int player_index) {
  PlayerState& player = state.players[player_index];
  player.food = cfg.max_food;
  player.food_collected += 1;
  state.terrain.at(player.pos) = TileKind::Scrub;
}

}  // namespace

void validate_sim_config(const SimConfig& cfg) {
  if (cfg.max_health < 1 || cfg.max_food < 1 || cfg.max_water < 1) {
    throw std::invalid_argument("stat maxima must be positive");
  }
  if (cfg.starve_damage < 1 || cfg.regen_amount < 0) {
    throw std::invalid_argument("starve_damage must be >= 1 and regen_amount >= 0");
  }
  if (cfg.scrub_respawn_prob < 0.0 || cfg.scrub_respawn_prob > 1.0 ||
      cfg.regen_threshold < 0.0 || cfg.regen_threshold > 1.0 ||
      cfg.forage_threshold < 0.0 || cfg.forage_threshold > 1.0) {
    throw std::invalid_argument("probabilities and thresholds must be in [0, 1]");
  }
  if (cfg.food_goal < 1) throw std::invalid_argument("food_goal must be >= 1");
  if (cfg.max_ticks < 0) throw std::invalid_argument("max_ticks must be >= 0");
}

GameState init_match(const Level& level, const SimConfig& cfg, std::uint64_t seed) {
  validate_sim_config(cfg);
  const std::vector<Position> spawns = level.find_all(TileKind::PlayerSpawn);
  if (spawns.size() != 2) {
    throw std::invalid_argument("invalid level: expected exactly two player spawns, found " +
                                std::to_string(spawns.size()));
  }
  if (!path_exists(level, spawns[0], spawns[1])) {
    throw std::invalid_argument("invalid level: player spawns are not connected");
  }

  GameState state{level, {}, 0, Rng(seed)};
  for (Position spawn : spawns) state.terrain.at(spawn) = TileKind::Grass;
  for (int i = 0; i < 2; ++i) {
    state.players[i] = PlayerState{spawns[i], cfg.max_health, cfg.max_food,
                                   cfg.max_water, 0, true};
  }
  return state;
}

Move forage_policy(const GameState& state, const SimConfig& cfg, int player_index) {
  const PlayerState& player = state.players[player_index];
  if (!player.alive) return Move::Stay;

  const Level& terrain = state.terrain;
  const bool hungry = player.food < cfg.forage_threshold * cfg.max_food;
  const bool thirsty = player.water < cfg.forage_threshold * cfg.max_water;

  if (!hungry && thirsty) {
    return step_toward(terrain, player.pos,
                       [&](Position p) { return adjacent_to_water(terrain, p); });
  }
  // Hungry, or sated on both: head for the next forest (food is only consumed
  // on arrival, so walking there early costs nothing).
  return step_toward(terrain, player.pos,
                     [&](Position p) { return terrain.at(p) == TileKind::Forest; });
}

void tick(GameState& state, const SimConfig& cfg) {
  // 1. Both agents decide from the same pre-move state.
  Move moves[2] = {Move::Stay, Move::Stay};
  for (int i = 0; i < 2; ++i) {
    if (state.players[i].alive) moves[i] = forage_policy(state, cfg, i);
  }

  // 2. Apply moves; a blocked or out-of-bounds target means staying put.
  for (int i = 0; i < 2; ++i) {
    PlayerState& player = state.players[i];
    if (!player.alive || moves[i] == Move::Stay) continue;
    const int d = static_cast<int>(moves[i]);
    Position q{player.pos.row + kDr[d], player.pos.col + kDc[d]};
    if (state.terrain.in_bounds(q) && passable(state.terrain.at(q))) player.pos = q;
  }

  // 3. Water refill by adjacency; water tiles never deplete.
  for (int i = 0; i < 2; ++i) {
    PlayerState& player = state.players[i];
    if (player.alive && adjacent_to_water(state.terrain, player.pos)) {
      player.water = cfg.max_water;
    }
  }

  // 4. Forest consumption. A forest shared by both players this tick feeds
  // the one with fewer collected; exact ties alternate by tick parity.
  const bool shared_forest = state.players[0].alive && state.players[1].alive &&
                             state.players[0].pos == state.players[1].pos &&
                             state.terrain.at(state.players[0].pos) == TileKind::Forest;
  if (shared_forest) {
    int eater;
    if (state.players[0].food_collected != state.players[1].food_collected) {
      eater = state.players[0].food_collected < state.players[1].food_collected ? 0 : 1;
    } else {
      eater = (state.tick % 2 == 0) ? 0 : 1;
    }
    consume_forest(state, cfg, eater);
  } else {
    for (int i = 0; i < 2; ++i) {
      if (state.players[i].alive &&
          state.terrain.at(state.players[i].pos) == TileKind::Forest) {
        consume_forest(state, cfg, i);
      }
    }
  }

  // 5. Depletion; an empty indicator costs health.
  for (int i = 0; i < 2; ++i) {
    PlayerState& player = state.players[i];
    if (!player.alive) continue;
    player.food = std::max(0, player.food - 1);
    player.water = std::max(0, player.water - 1);
    if (player.food == 0 || player.water == 0) player.health -= cfg.starve_damage;
  }

  // 6. Regeneration while both indicators are above the threshold.
  for (int i = 0; i < 2; ++i) {
    PlayerState& player = state.players[i];
    if (!player.alive) continue;
    if (player.food > cfg.regen_threshold * cfg.max_food &&
        player.water > cfg.regen_threshold * cfg.max_water) {
      player.health = std::min(cfg.max_health, player.health + cfg.regen_amount);
    }
  }

  // 7. Scrub respawn: one roll per scrub cell, row-major.
  for (int r = 0; r < state.terrain.height(); ++r) {
    for (int c = 0; c < state.terrain.width(); ++c) {
      if (state.terrain.at({r, c}) == TileKind::Scrub &&
          state.rng.bernoulli(cfg.scrub_respawn_prob)) {
        state.terrain.at({r, c}) = TileKind::Forest;
      }
    }
  }

  // 8. Deaths.
  for (int i = 0; i < 2; ++i) {
    PlayerState& player = state.players[i];
    if (player.alive && player.health <= 0) {
      player.health = 0;
      player.alive = false;
    }
  }

  state.tick += 1;
}

std::optional<Winners> decide_winners(const GameState& state, const SimConfig& cfg) {
  Winners goal{state.players[0].food_collected >= cfg.food_goal,
               state.players[1].food_collected >= cfg.food_goal};
  if (goal.count() > 0) return goal;

  const int dead = (!state.players[0].alive ? 1 : 0) + (!state.players[1].alive ? 1 : 0);
  if (dead == 2) return Winners{true, true};
  if (dead == 1) return Winners{state.players[0].alive, state.players[1].alive};

  if (state.tick >= cfg.max_ticks) {
    return Winners{state.players[0].alive, state.players[1].alive};
  }
  return std::nullopt;
}

namespace {

void trace_line(std::ostream& os, const GameState& state) {
  os << "t=" << state.tick;
  for (int i = 0; i < 2; ++i) {
    const PlayerState& p = state.players[i];
    os << "  p" << i << "=(" << p.pos.row << "," << p.pos.col << ")"
       << " hp=" << p.health << " food=" << p.food << " water=" << p.water
       << " collected=" << p.food_collected << (p.alive ? "" : " dead");
  }
  os << "\n";
}

}  // namespace

MatchOutcome run_match(const Level& level, const SimConfig& cfg, std::uint64_t seed,
                       std::ostream* trace) {
  GameState state = init_match(level, cfg, seed);
  if (trace) trace_line(*trace, state);
  for (;;) {
    if (auto winners = decide_winners(state, cfg)) {
      return MatchOutcome{*winners, state.tick, state.players};
    }
    tick(state, cfg);
    if (trace) trace_line(*trace, state);
  }
}

}  // namespace tilebal

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>

#include "tilebal/level.hpp"
#include "tilebal/rng.hpp"

// Deterministic two-player forage-survival match engine. Two scripted agents
// race on a small grid: the first to collect food_goal forest tiles wins, or
// the last one standing does. Draws are possible (both goals met, both deaths,
// or both alive at the tick cap) and count both players as winners.
//
// Everything is a pure function of (level, config, seed): stats are integers,
// randomness comes only from the state's own Rng stream, and ties are broken
// by fixed deterministic rules, so outcomes reproduce bit-exactly anywhere.

namespace tilebal {

struct SimConfig {
  int max_health = 10;
  int max_food = 10;
  int max_water = 10;
  int starve_damage = 1;           // health lost per tick while food or water is empty
  int regen_amount = 1;            // health gained per tick while well supplied
  double regen_threshold = 0.5;    // both indicators must exceed this fraction of max
  double scrub_respawn_prob = 0.025;  // per scrub tile, per tick
  int food_goal = 5;
  int max_ticks = 200;
  double forage_threshold = 0.5;   // agent seeks a resource below this fraction of max
};

/// Throws std::invalid_argument if any field is out of range.
void validate_sim_config(const SimConfig& cfg);

enum class Move : std::uint8_t { North, East, South, West, Stay };

struct PlayerState {
  Position pos;
  int health = 0;
  int food = 0;
  int water = 0;
  int food_collected = 0;
  bool alive = true;

  bool operator==(const PlayerState&) const = default;
};

/// Winner set of one match; never empty once a match is decided.
struct Winners {
  bool player0 = false;
  bool player1 = false;

  bool contains(int index) const { return index == 0 ? player0 : player1; }
  int count() const { return (player0 ? 1 : 0) + (player1 ? 1 : 0); }
  int index_sum() const { return player1 ? 1 : 0; }
  bool is_draw() const { return player0 && player1; }

  bool operator==(const Winners&) const = default;
};

struct MatchOutcome {
  Winners winners;
  int ticks = 0;
  std::array<PlayerState, 2> players;

  bool operator==(const MatchOutcome&) const = default;
};

struct GameState {
  Level terrain;                     // never contains PlayerSpawn cells
  std::array<PlayerState, 2> players;
  int tick = 0;
  Rng rng;
};

/// Builds the initial state: players on the two spawn cells with full stats,
/// spawn cells turned into grass. The level must contain exactly two
/// PlayerSpawn cells with a passable path between them; player 0 is the
/// row-major-first spawn.
GameState init_match(const Level& level, const SimConfig& cfg, std::uint64_t seed);

/// Scripted forager: below the food threshold head for the nearest forest,
/// below the water threshold head for the nearest water-adjacent cell,
/// otherwise walk toward the next forest anyway. BFS with neighbor order
/// N,E,S,W; Stay when no target is reachable.
Move forage_policy(const GameState& state, const SimConfig& cfg, int player_index);

/// Advances one time step. Phases, in order: both agents pick moves from the
/// same pre-move state; moves applied (blocked moves stay); water refill on
/// 4-adjacency; forest consumption (tile becomes scrub; a shared arrival goes
/// to the player with fewer collected, ties to player 0 on even ticks and
/// player 1 on odd ticks); food/water deplete by 1 and an empty indicator
/// costs starve_damage health; regen when both indicators exceed the
/// threshold; scrub respawn rolls; deaths applied.
void tick(GameState& state, const SimConfig& cfg);

/// Winner set if the match is decided in this state, nullopt otherwise.
/// Checked in order: food goal reached, deaths, tick cap.
std::optional<Winners> decide_winners(const GameState& state, const SimConfig& cfg);

/// Runs a full match. With `trace` set, writes one line of positions and
/// stats per tick. Always terminates within cfg.max_ticks ticks.
MatchOutcome run_match(const Level& level, const SimConfig& cfg, std::uint64_t seed,
                       std::ostream* trace = nullptr);

}  // namespace tilebal

#pragma once

// GSG-I pursuit-evasion game: a patroller starting at the grid center hunts
// snares and an attacker who enters at a corner, lays snares and leaves
// through the same corner.

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gsgi/rng.hpp"

namespace gsgi {

struct Cell {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Row 0 is the northern edge; "up" moves north.
enum class Move : std::uint8_t { up = 0, down, right, left, stand_still };
inline constexpr int kNumMoves = 5;

using PatrollerAction = Move;

struct AttackerAction {
  Move move = Move::stand_still;
  bool place_snare = false;
  friend bool operator==(const AttackerAction&, const AttackerAction&) = default;
};
inline constexpr int kNumAttackerActions = 2 * kNumMoves;

// Index in [0, 10): move-major, placement as the low bit.
int attacker_action_index(AttackerAction a);
AttackerAction attacker_action_from_index(int index);

std::string_view move_name(Move m);
std::optional<Move> parse_move(std::string_view name);

enum class AttackMode : std::uint8_t { per_step, once_per_snare };

struct GameConfig {
  int grid_side = 7;
  int horizon = 75;
  int max_snares = 3;
  double reward_snare_removal = 2.0;
  double reward_capture = 8.0;
  AttackMode attack_mode = AttackMode::per_step;
  bool terminate_on_capture = true;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void validate() const;
  Cell center() const { return {grid_side / 2, grid_side / 2}; }
  std::array<Cell, 4> corners() const;
  bool on_grid(Cell c) const {
    return c.row >= 0 && c.col >= 0 && c.row < grid_side && c.col < grid_side;
  }
  int cell_index(Cell c) const { return c.row * grid_side + c.col; }
  int num_cells() const { return grid_side * grid_side; }

  friend bool operator==(const GameConfig&, const GameConfig&) = default;
};

class DensityMap {
 public:
  DensityMap() = default;
  // Throws ConfigError when a value lies outside [0, 1] or the size is wrong.
  DensityMap(int side, std::vector<double> values);

  int side() const { return side_; }
  double at(Cell c) const { return values_[c.row * side_ + c.col]; }
  double at(int row, int col) const { return values_[row * side_ + col]; }
  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const DensityMap&, const DensityMap&) = default;

 private:
  int side_ = 0;
  std::vector<double> values_;
};

// Each cell i.i.d. uniform on [0, 0.5].
DensityMap random_density_map(int grid_side, std::uint64_t seed);
// peak * exp(-d^2 / (2 sigma^2)), d the Euclidean distance to the center cell.
DensityMap gaussian_density_map(int grid_side, double peak = 0.6,
                                double sigma = 2.0);

// One row per line, space-separated decimals with round-trip precision.
void save_density(const DensityMap& map, const std::filesystem::path& path);
DensityMap load_density(const std::filesystem::path& path);
std::string format_density(const DensityMap& map);
DensityMap parse_density(std::string_view text);

// Footprints are directional records left when an agent crosses a cell border.
// The heading is the direction of travel: moving north out of A into B leaves
// (north, leaving) at A and (north, entering) at B.
enum class Agent : std::uint8_t { patroller = 0, attacker = 1 };
enum class Heading : std::uint8_t { north = 0, west, east, south };
enum class Sense : std::uint8_t { entering = 0, leaving = 1 };

// Per-cell footprint set as a 16-bit mask. Bit agent*8 + heading*2 + sense;
// the low 8 bits within an agent block follow the observation channel order.
using FootprintMask = std::uint16_t;

constexpr int footprint_bit(Agent a, Heading h, Sense s) {
  return static_cast<int>(a) * 8 + static_cast<int>(h) * 2 +
         static_cast<int>(s);
}
constexpr FootprintMask footprint_flag(Agent a, Heading h, Sense s) {
  return static_cast<FootprintMask>(1u << footprint_bit(a, h, s));
}
constexpr FootprintMask agent_prints(FootprintMask m, Agent a) {
  return static_cast<FootprintMask>((m >> (static_cast<int>(a) * 8)) & 0xFF);
}

struct Snare {
  Cell cell;
  bool active = true;
  int placed_at = 0;
  bool has_struck = false;
  friend bool operator==(const Snare&, const Snare&) = default;
};

enum class Status : std::uint8_t { ongoing, captured, timeout };
std::string_view status_name(Status s);

struct GameState {
  int t = 0;
  Cell patroller;
  std::optional<Cell> attacker;
  Cell entry_corner;
  bool attacker_left_corner = false;
  bool attacker_exited = false;
  bool attacker_captured = false;
  std::vector<Snare> snares;
  int snares_placed = 0;
  std::vector<FootprintMask> footprints;
  // Cells the patroller has stood in.
  std::vector<std::uint8_t> observed;
  // Attacker footprints as last seen by the patroller in each cell.
  std::vector<FootprintMask> known_attacker_prints;
  std::vector<int> visits;
  Status status = Status::ongoing;
  Rng rng;

  int active_snares() const;
  int removed_snares() const;

  friend bool operator==(const GameState&, const GameState&) = default;
};

enum class EventKind : std::uint8_t {
  snare_removed,
  capture,
  attack_success,
  attacker_exited,
  timeout
};
std::string_view event_name(EventKind k);

struct Event {
  EventKind kind;
  Cell cell;
  double penalty = 0.0;
  friend bool operator==(const Event&, const Event&) = default;
};

struct StepOutcome {
  double patroller_reward = 0.0;
  double attacker_reward = 0.0;
  std::vector<Event> events;
};

// Throws ConfigError if the density map does not match the grid.
GameState new_game(const GameConfig& config, const DensityMap& density,
                   std::uint64_t seed);

// Advances the game by one simultaneous move. Throws UsageError once the game
// has terminated.
StepOutcome step(GameState& state, const GameConfig& config,
                 const DensityMap& density, PatrollerAction patroller_action,
                 AttackerAction attacker_action);

Status check_termination(const GameState& state, const GameConfig& config);

// Independent random streams for one episode of a seeded run. Episode k of a
// run always gets the same streams, whichever worker plays it.
struct EpisodeStreams {
  std::uint64_t game_seed = 0;
  Rng attacker;
  Rng patroller;
};
EpisodeStreams episode_streams(std::uint64_t run_seed, std::uint64_t episode);

// Destination of a move; wall moves resolve to the current cell.
Cell apply_move(Cell from, Move m, int grid_side);
int manhattan(Cell a, Cell b);

}  // namespace gsgi

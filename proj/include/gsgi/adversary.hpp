#pragma once

// Scripted attacker policies.

#include <array>
#include <functional>
#include <string_view>

#include "gsgi/env.hpp"
#include "gsgi/rng.hpp"

namespace gsgi {

// What the attacker knows when choosing an action.
struct AttackerView {
  Cell own_pos;
  Cell entry_corner;
  int snares_remaining = 0;
  const DensityMap* density = nullptr;
  // Patroller footprints in the attacker's current cell (patroller block of a
  // FootprintMask, i.e. bits 0..7).
  FootprintMask patroller_footprints_here = 0;
  bool snare_here = false;
  int t = 0;
};

// Requires an attacker on the board.
AttackerView make_attacker_view(const GameState& state, const GameConfig& config,
                                const DensityMap& density);

struct HeuristicParams {
  double beta = 4.0;          // softmax sharpness over neighbor density
  double avoid_factor = 2.0;  // weight multiplier for fleeing patroller prints
};

// Stand-in for the heuristic random walk opponent. While snares remain the
// attacker drifts toward dense cells (softmax over the reachable cells, the
// entry corner excluded) and lays a snare with probability equal to the
// density of her cell. Patroller footprints in her cell multiply the weight
// of every move that leaves the cell by avoid_factor. With no snares left she
// walks a uniformly random shortest path back to the entry corner.
AttackerAction heuristic_random_walk(const AttackerView& view, Rng& rng,
                                     const HeuristicParams& params = {});

// Move distribution the heuristic samples from, indexed by Move.
std::array<double, kNumMoves> heuristic_move_probabilities(
    const AttackerView& view, const HeuristicParams& params = {});

// Uniform over the 10 attacker actions; placement is never chosen without
// snares left (then uniform over the 5 moves).
AttackerAction random_attacker(const AttackerView& view, Rng& rng);

using AttackerPolicy =
    std::function<AttackerAction(const AttackerView&, Rng&)>;

// "heuristic" or "random"; throws ConfigError otherwise.
AttackerPolicy make_attacker_policy(std::string_view name,
                                    const HeuristicParams& params = {});

}  // namespace gsgi

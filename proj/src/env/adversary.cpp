#include "gsgi/adversary.hpp"

#include <cmath>
#include <string>

#include "gsgi/errors.hpp"

namespace gsgi {

AttackerView make_attacker_view(const GameState& state, const GameConfig& config,
                                const DensityMap& density) {
  if (!state.attacker) throw UsageError("attacker is not on the board");
  AttackerView v;
  v.own_pos = *state.attacker;
  v.entry_corner = state.entry_corner;
  v.snares_remaining = config.max_snares - state.snares_placed;
  v.density = &density;
  v.patroller_footprints_here = agent_prints(
      state.footprints[config.cell_index(v.own_pos)], Agent::patroller);
  for (const auto& s : state.snares) v.snare_here |= s.active && s.cell == v.own_pos;
  v.t = state.t;
  return v;
}

namespace {

Move sample_move(const std::array<double, kNumMoves>& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  int last = 0;
  for (int m = 0; m < kNumMoves; ++m) {
    if (probs[m] <= 0.0) continue;
    acc += probs[m];
    last = m;
    if (u < acc) return static_cast<Move>(m);
  }
  return static_cast<Move>(last);
}

std::array<double, kNumMoves> homeward_probabilities(const AttackerView& v) {
  const int side = v.density->side();
  std::array<double, kNumMoves> w{};
  const int d = manhattan(v.own_pos, v.entry_corner);
  int count = 0;
  for (int m = 0; m < kNumMoves; ++m) {
    const Cell to = apply_move(v.own_pos, static_cast<Move>(m), side);
    if (to == v.own_pos) continue;
    // At the corner itself she has to step off before she can re-enter.
    const bool useful = d == 0 || manhattan(to, v.entry_corner) < d;
    if (useful) {
      w[m] = 1.0;
      ++count;
    }
  }
  for (double& x : w) x /= count;
  return w;
}

}  // namespace

std::array<double, kNumMoves> heuristic_move_probabilities(
    const AttackerView& v, const HeuristicParams& params) {
  if (v.density == nullptr) throw UsageError("attacker view without density");
  if (v.snares_remaining <= 0) return homeward_probabilities(v);

  const int side = v.density->side();
  const bool avoid = v.patroller_footprints_here != 0;
  std::array<double, kNumMoves> w{};
  double total = 0.0;
  for (int m = 0; m < kNumMoves; ++m) {
    const auto move = static_cast<Move>(m);
    const Cell to = apply_move(v.own_pos, move, side);
    if (move != Move::stand_still && to == v.own_pos) continue;  // wall
    if (to != v.own_pos && to == v.entry_corner) continue;
    double weight = std::exp(params.beta * v.density->at(to));
    if (avoid && to != v.own_pos) weight *= params.avoid_factor;
    w[m] = weight;
    total += weight;
  }
  for (double& x : w) x /= total;
  return w;
}

AttackerAction heuristic_random_walk(const AttackerView& view, Rng& rng,
                                     const HeuristicParams& params) {
  AttackerAction a;
  a.move = sample_move(heuristic_move_probabilities(view, params), rng);
  if (view.snares_remaining > 0 && !view.snare_here) {
    a.place_snare = rng.bernoulli(view.density->at(view.own_pos));
  }
  return a;
}

AttackerAction random_attacker(const AttackerView& view, Rng& rng) {
  if (view.snares_remaining <= 0) {
    return {static_cast<Move>(rng.below(kNumMoves)), false};
  }
  return attacker_action_from_index(static_cast<int>(rng.below(kNumAttackerActions)));
}

AttackerPolicy make_attacker_policy(std::string_view name,
                                    const HeuristicParams& params) {
  if (name == "heuristic") {
    return [params](const AttackerView& v, Rng& rng) {
      return heuristic_random_walk(v, rng, params);
    };
  }
  if (name == "random") return random_attacker;
  throw ConfigError("unknown attacker policy '" + std::string(name) + "'");
}

}  // namespace gsgi

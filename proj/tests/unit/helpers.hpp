#pragma once

#include <vector>

#include "gsgi/adversary.hpp"
#include "gsgi/env.hpp"

namespace gsgi::testing {

inline DensityMap constant_map(int side, double p) {
  return DensityMap(side, std::vector<double>(static_cast<std::size_t>(side) * side, p));
}

// Game with the attacker entering at the north-west corner.
inline GameState game_at_corner(const GameConfig& cfg, const DensityMap& d,
                                std::uint64_t seed = 1) {
  GameState s = new_game(cfg, d, seed);
  s.entry_corner = {0, 0};
  s.attacker = Cell{0, 0};
  return s;
}

struct RandomPlay {
  std::vector<GameState> states;  // states[0] initial, states[k] after step k
  std::vector<PatrollerAction> patroller;
  std::vector<AttackerAction> attacker;
  std::vector<StepOutcome> outcomes;
};

// Uniform patroller against the random attacker.
inline RandomPlay play_random(const GameConfig& cfg, const DensityMap& d,
                              std::uint64_t seed) {
  RandomPlay p;
  Rng rng(seed ^ 0xABCDEF);
  GameState s = new_game(cfg, d, seed);
  p.states.push_back(s);
  while (s.status == Status::ongoing) {
    const auto pa = static_cast<Move>(rng.below(kNumMoves));
    AttackerAction aa;
    if (s.attacker) aa = random_attacker(make_attacker_view(s, cfg, d), rng);
    p.outcomes.push_back(step(s, cfg, d, pa, aa));
    p.patroller.push_back(pa);
    p.attacker.push_back(aa);
    p.states.push_back(s);
  }
  return p;
}

}  // namespace gsgi::testing

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace gsgi::testing {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Golden fixture contents; rewritten instead when GSGI_UPDATE_GOLDEN is set.
inline std::string golden(const std::string& name, const std::string& actual) {
  const std::string path = std::string(GSGI_GOLDEN_DIR) + "/" + name;
  if (std::getenv("GSGI_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << actual;
    return actual;
  }
  return read_file(path);
}

// The state reached by a fixed five-step script on a seeded random map.
inline GameState scripted_state(const GameConfig& cfg, const DensityMap& d) {
  GameState s = new_game(cfg, d, 11);
  s.entry_corner = {0, 0};
  s.attacker = Cell{0, 0};
  const Move p[] = {Move::up, Move::up, Move::up, Move::left, Move::left};
  const Move a[] = {Move::right, Move::down, Move::left, Move::up, Move::stand_still};
  for (int i = 0; i < 5; ++i) step(s, cfg, d, p[i], {a[i], false});
  return s;
}

}  // namespace gsgi::testing

#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "gsgi/env.hpp"
#include "gsgi/errors.hpp"
#include "helpers.hpp"

namespace gsgi {
namespace {

using testing::constant_map;
using testing::game_at_corner;

constexpr AttackerAction kStay{Move::stand_still, false};

TEST(GameConfig, RejectsBadValues) {
  GameConfig c;
  EXPECT_NO_THROW(c.validate());
  c.grid_side = 6;
  EXPECT_THROW(c.validate(), ConfigError);
  c = GameConfig{};
  c.horizon = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = GameConfig{};
  c.max_snares = -1;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(NewGame, StartsAtCenterAndCorner) {
  GameConfig cfg;
  const auto d = random_density_map(7, 3);
  const GameState s = new_game(cfg, d, 42);
  EXPECT_EQ(s.patroller, (Cell{3, 3}));
  ASSERT_TRUE(s.attacker.has_value());
  EXPECT_EQ(*s.attacker, s.entry_corner);
  const auto corners = cfg.corners();
  EXPECT_NE(std::find(corners.begin(), corners.end(), s.entry_corner), corners.end());
  EXPECT_EQ(s.t, 0);
  EXPECT_EQ(s.visits[cfg.cell_index({3, 3})], 1);
  EXPECT_EQ(s.status, Status::ongoing);
}

TEST(NewGame, RejectsMismatchedDensity) {
  GameConfig cfg;
  EXPECT_THROW(new_game(cfg, random_density_map(5, 1), 0), ConfigError);
}

TEST(NewGame, EntryCornerIsUniform) {
  GameConfig cfg;
  const auto d = random_density_map(7, 3);
  std::map<std::pair<int, int>, int> counts;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const Cell c = new_game(cfg, d, static_cast<std::uint64_t>(i)).entry_corner;
    ++counts[{c.row, c.col}];
  }
  ASSERT_EQ(counts.size(), 4u);
  for (const auto& [corner, k] : counts) {
    EXPECT_NEAR(static_cast<double>(k) / n, 0.25, 0.03);
  }
}

TEST(NewGame, SameSeedSameGame) {
  GameConfig cfg;
  const auto d = random_density_map(7, 3);
  EXPECT_EQ(new_game(cfg, d, 9), new_game(cfg, d, 9));
}

TEST(DensityMap, RandomMapMeanIsQuarter) {
  const auto d = random_density_map(100, 17);
  double sum = 0.0;
  for (double v : d.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 0.5);
    sum += v;
  }
  EXPECT_NEAR(sum / 10000.0, 0.25, 0.01);
}

TEST(DensityMap, GaussianValues) {
  const auto d = gaussian_density_map(7);
  EXPECT_DOUBLE_EQ(d.at(3, 3), 0.6);
  // corner: squared distance 18 from the center, sigma 2
  EXPECT_NEAR(d.at(0, 0), 0.6 * std::exp(-18.0 / 8.0), 1e-15);
  EXPECT_NEAR(d.at(0, 0), 0.0632, 1e-4);
  EXPECT_DOUBLE_EQ(d.at(0, 0), d.at(6, 6));
  EXPECT_DOUBLE_EQ(d.at(2, 3), d.at(3, 4));
}

TEST(DensityMap, RejectsOutOfRange) {
  EXPECT_THROW(DensityMap(2, {0.1, 0.2, 1.5, 0.0}), ConfigError);
  EXPECT_THROW(DensityMap(2, {0.1, 0.2, 0.3}), ConfigError);
  EXPECT_THROW(DensityMap(1, {-0.1}), ConfigError);
}

TEST(DensityMap, TextRoundTripIsExact) {
  const auto d = random_density_map(7, 123);
  EXPECT_EQ(parse_density(format_density(d)), d);
  EXPECT_THROW(parse_density("0.1 0.2\n0.3\n"), FormatError);
  EXPECT_THROW(parse_density("0.1 x\n0.3 0.4\n"), FormatError);
  EXPECT_THROW(parse_density(""), FormatError);
}

TEST(Step, WallMovesClamp) {
  EXPECT_EQ(apply_move({0, 0}, Move::up, 7), (Cell{0, 0}));
  EXPECT_EQ(apply_move({0, 0}, Move::left, 7), (Cell{0, 0}));
  EXPECT_EQ(apply_move({6, 6}, Move::down, 7), (Cell{6, 6}));
  EXPECT_EQ(apply_move({6, 6}, Move::right, 7), (Cell{6, 6}));
  EXPECT_EQ(apply_move({3, 3}, Move::up, 7), (Cell{2, 3}));
  EXPECT_EQ(apply_move({3, 3}, Move::right, 7), (Cell{3, 4}));
}

TEST(Step, WallBumpLeavesNoPrints) {
  GameConfig cfg;
  const auto d = constant_map(7, 0.0);
  GameState s = game_at_corner(cfg, d);
  step(s, cfg, d, Move::up, {Move::up, false});
  EXPECT_EQ(s.footprints[0], 0);
  EXPECT_EQ(*s.attacker, (Cell{0, 0}));
  EXPECT_FALSE(s.attacker_left_corner);
}

// Five scripted steps; every footprint bit is predicted by hand.
TEST(Step, ScriptedFootprintReplay) {
  GameConfig cfg;
  const auto d = constant_map(7, 0.0);
  GameState s = game_at_corner(cfg, d);
  auto idx = [&](int r, int c) { return cfg.cell_index({r, c}); };
  auto bit = [](int b) { return static_cast<FootprintMask>(1u << b); };

  // patroller up (3,3)->(2,3); attacker right (0,0)->(0,1)
  step(s, cfg, d, Move::up, {Move::right, false});
  EXPECT_EQ(s.footprints[idx(3, 3)], bit(1));   // patroller north leaving
  EXPECT_EQ(s.footprints[idx(2, 3)], bit(0));   // patroller north entering
  EXPECT_EQ(s.footprints[idx(0, 0)], bit(13));  // attacker east leaving
  EXPECT_EQ(s.footprints[idx(0, 1)], bit(12));  // attacker east entering

  // patroller up (2,3)->(1,3); attacker down (0,1)->(1,1)
  step(s, cfg, d, Move::up, {Move::down, false});
  EXPECT_EQ(s.footprints[idx(0, 1)], bit(12) | bit(15));
  EXPECT_EQ(s.footprints[idx(1, 1)], bit(14));

  // patroller up (1,3)->(0,3); attacker left (1,1)->(1,0)
  step(s, cfg, d, Move::up, {Move::left, false});
  EXPECT_EQ(s.footprints[idx(1, 1)], bit(14) | bit(11));
  EXPECT_EQ(s.footprints[idx(1, 0)], bit(10));

  // patroller left (0,3)->(0,2); attacker up (1,0)->(0,0) leaves the board
  const auto out = step(s, cfg, d, Move::left, {Move::up, false});
  EXPECT_EQ(s.footprints[idx(1, 0)], bit(10) | bit(9));
  EXPECT_EQ(s.footprints[idx(0, 0)], bit(13) | bit(8));
  EXPECT_FALSE(s.attacker.has_value());
  EXPECT_TRUE(s.attacker_exited);
  ASSERT_EQ(out.events.size(), 1u);
  EXPECT_EQ(out.events[0].kind, EventKind::attacker_exited);

  // patroller left (0,2)->(0,1) and sees the prints there
  EXPECT_EQ(s.known_attacker_prints[idx(0, 1)], 0);
  step(s, cfg, d, Move::left, kStay);
  EXPECT_EQ(s.known_attacker_prints[idx(0, 1)], bit(12) | bit(15));
  EXPECT_EQ(s.footprints[idx(0, 1)], bit(12) | bit(15) | bit(2));
  EXPECT_EQ(s.footprints[idx(0, 2)], bit(2) | bit(3));
  EXPECT_EQ(s.known_attacker_prints[idx(1, 1)], 0);
  EXPECT_EQ(s.known_attacker_prints[idx(0, 0)], 0);
  EXPECT_EQ(s.t, 5);
  EXPECT_EQ(s.visits[idx(0, 1)], 1);
  EXPECT_EQ(s.visits[idx(3, 3)], 1);
}

TEST(Step, KnownPrintsRefreshOnRevisit) {
  GameConfig cfg;
  const auto d = constant_map(7, 0.0);
  GameState s = game_at_corner(cfg, d);
  s.patroller = {0, 2};
  s.attacker = Cell{0, 0};
  step(s, cfg, d, Move::left, kStay);  // patroller to (0,1), nothing there yet
  EXPECT_EQ(s.known_attacker_prints[1], 0);
  step(s, cfg, d, Move::right, {Move::right, false});  // attacker enters (0,1)
  EXPECT_EQ(s.known_attacker_prints[1], 0);
  step(s, cfg, d, Move::left, {Move::down, false});  // patroller back at (0,1)
  EXPECT_EQ(s.known_attacker_prints[1],
            footprint_flag(Agent::attacker, Heading::east, Sense::entering) |
                footprint_flag(Agent::attacker, Heading::south, Sense::leaving));
}

TEST(Step, SnareIsLaidAtPreMoveCell) {
  GameConfig cfg;
  const auto d = constant_map(7, 0.0);
  GameState s = game_at_corner(cfg, d);
  step(s, cfg, d, Move::stand_still, {Move::right, true});
  ASSERT_EQ(s.snares.size(), 1u);
  EXPECT_EQ(s.snares[0].cell, (Cell{0, 0}));
  EXPECT_EQ(s.snares[0].placed_at, 0);
  EXPECT_TRUE(s.snares[0].active);
  EXPECT_EQ(s.snares_placed, 1);
}

TEST(Step, AtMostOneActiveSnarePerCellAndMaxSnares) {
  GameConfig cfg;
  const auto d = constant_map(7, 0.0);
  GameState s = game_at_corner(cfg, d);
  step(s, cfg, d, Move::stand_still, {Move::stand_still, true});
  step(s, cfg, d, Move::stand_still, {Move::stand_still, true});
  EXPECT_EQ(s.snares.size(), 1u);
  step(s, cfg, d, Move::stand_still, {Move::right, true});  // (0,1) next
  step(s, cfg, d, Move::stand_still, {Move::right, true});
  step(s, cfg, d, Move::stand_still, {Move::right, true});
  EXPECT_EQ(s.snares_placed, 3);
  EXPECT_EQ(s.snares.size(), 3u);
  EXPECT_EQ(s.snares[2].cell, (Cell{0, 2}));
}

TEST(Step, SnareRemovalRewardsPatroller) {
  GameConfig cfg;
  const auto d = constant_map(7, 0.0);
  GameState s = game_at_corner(cfg, d);
  s.patroller = {0, 2};
  step(s, cfg, d, Move::stand_still, {Move::down, true});  // snare at (0,0)
  s.patroller = {0, 1};
  const auto out = step(s, cfg, d, Move::left, kStay);
  EXPECT_DOUBLE_EQ(out.patroller_reward, 2.0);
  EXPECT_DOUBLE_EQ(out.attacker_reward, -2.0);
  EXPECT_FALSE(s.snares[0].active);
  EXPECT_EQ(s.removed_snares(), 1);
  ASSERT_EQ(out.events.size(), 1u);
  EXPECT_EQ(out.events[0].kind, EventKind::snare_removed);
}

TEST(Step, CaptureOnCoLocation) {
  GameConfig cfg;
  const auto d = constant_map(7, 0.0);
  GameState s = game_at_corner(cfg, d);
  s.attacker = Cell{2, 2};
  s.attacker_left_corner = true;
  s.patroller = {2, 4};
  const auto out = step(s, cfg, d, Move::left, {Move::right, false});
  EXPECT_TRUE(s.attacker_captured);
  EXPECT_FALSE(s.attacker.has_value());
  EXPECT_DOUBLE_EQ(out.patroller_reward, 8.0);
  EXPECT_EQ(s.status, Status::captured);
}

TEST(Step, SwappingCellsIsNotCapture) {
  GameConfig cfg;
  const auto d = constant_map(7, 0.0);
  GameState s = game_at_corner(cfg, d);
  s.attacker = Cell{2, 2};
  s.attacker_left_corner = true;
  s.patroller = {2, 3};
  step(s, cfg, d, Move::left, {Move::right, false});
  EXPECT_FALSE(s.attacker_captured);
  EXPECT_EQ(*s.attacker, (Cell{2, 3}));
}

TEST(Step, ExitBeatsCaptureAtEntryCorner) {
  GameConfig cfg;
  const auto d = constant_map(7, 0.0);
  GameState s = game_at_corner(cfg, d);
  s.attacker = Cell{0, 1};
  s.attacker_left_corner = true;
  s.patroller = {1, 0};
  const auto out = step(s, cfg, d, Move::up, {Move::left, false});
  EXPECT_TRUE(s.attacker_exited);
  EXPECT_FALSE(s.attacker_captured);
  EXPECT_DOUBLE_EQ(out.patroller_reward, 0.0);
}

TEST(Step, AttacksPerStepWhileSnareActive) {
  GameConfig cfg;
  const auto d = constant_map(7, 1.0);
  GameState s = game_at_corner(cfg, d);
  // The snare is laid and strikes in the same step.
  auto out = step(s, cfg, d, Move::stand_still, {Move::right, true});
  EXPECT_DOUBLE_EQ(out.patroller_reward, -1.0);
  out = step(s, cfg, d, Move::stand_still, kStay);
  EXPECT_DOUBLE_EQ(out.patroller_reward, -1.0);
  ASSERT_EQ(out.events.size(), 1u);
  EXPECT_EQ(out.events[0].kind, EventKind::attack_success);
  EXPECT_DOUBLE_EQ(out.events[0].penalty, 1.0);
}

TEST(Step, OncePerSnareStrikesOnce) {
  GameConfig cfg;
  cfg.attack_mode = AttackMode::once_per_snare;
  const auto d = constant_map(7, 1.0);
  GameState s = game_at_corner(cfg, d);
  auto out = step(s, cfg, d, Move::stand_still, {Move::right, true});
  EXPECT_DOUBLE_EQ(out.patroller_reward, -1.0);
  out = step(s, cfg, d, Move::stand_still, kStay);
  EXPECT_DOUBLE_EQ(out.patroller_reward, 0.0);
  EXPECT_TRUE(s.snares[0].has_struck);
}

TEST(Step, NoAttacksAfterExit) {
  GameConfig cfg;
  const auto d = constant_map(7, 1.0);
  GameState s = game_at_corner(cfg, d);
  step(s, cfg, d, Move::stand_still, {Move::right, true});
  const auto out = step(s, cfg, d, Move::stand_still, {Move::left, false});
  EXPECT_TRUE(s.attacker_exited);
  EXPECT_DOUBLE_EQ(out.patroller_reward, 0.0);
  const auto later = step(s, cfg, d, Move::stand_still, kStay);
  EXPECT_DOUBLE_EQ(later.patroller_reward, 0.0);
}

TEST(Step, CaptureWithActiveSnaresWhenNotTerminating) {
  GameConfig cfg;
  cfg.terminate_on_capture = false;
  const auto d = constant_map(7, 0.0);
  GameState s = game_at_corner(cfg, d);
  step(s, cfg, d, Move::stand_still, {Move::right, true});  // snare at (0,0)
  s.patroller = {0, 2};
  step(s, cfg, d, Move::left, kStay);  // capture at (0,1)
  EXPECT_TRUE(s.attacker_captured);
  EXPECT_EQ(s.status, Status::ongoing);
  step(s, cfg, d, Move::left, kStay);  // removes the snare
  EXPECT_EQ(s.status, Status::captured);
}

TEST(Step, TimeoutAtHorizonAndNoFurtherSteps) {
  GameConfig cfg;
  cfg.horizon = 3;
  const auto d = constant_map(7, 0.0);
  GameState s = game_at_corner(cfg, d);
  step(s, cfg, d, Move::stand_still, kStay);
  step(s, cfg, d, Move::stand_still, kStay);
  const auto out = step(s, cfg, d, Move::stand_still, kStay);
  EXPECT_EQ(s.status, Status::timeout);
  ASSERT_FALSE(out.events.empty());
  EXPECT_EQ(out.events.back().kind, EventKind::timeout);
  EXPECT_THROW(step(s, cfg, d, Move::stand_still, kStay), UsageError);
}

TEST(Step, ZeroSumAndBoundedLength) {
  GameConfig cfg;
  const auto d = random_density_map(7, 5);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto play = testing::play_random(cfg, d, seed);
    EXPECT_LE(static_cast<int>(play.outcomes.size()), cfg.horizon);
    for (const auto& o : play.outcomes) {
      EXPECT_EQ(o.patroller_reward, -o.attacker_reward);
    }
  }
}

TEST(AttackerActions, IndexRoundTrip) {
  for (int i = 0; i < kNumAttackerActions; ++i) {
    EXPECT_EQ(attacker_action_index(attacker_action_from_index(i)), i);
  }
  EXPECT_THROW(attacker_action_from_index(10), UsageError);
}

TEST(Moves, NamesRoundTrip) {
  for (int i = 0; i < kNumMoves; ++i) {
    const auto m = static_cast<Move>(i);
    EXPECT_EQ(parse_move(move_name(m)), m);
  }
  EXPECT_FALSE(parse_move("north").has_value());
}

TEST(EpisodeStreams, DependOnlyOnSeedAndEpisode) {
  const auto a = episode_streams(7, 3);
  const auto b = episode_streams(7, 3);
  EXPECT_EQ(a.game_seed, b.game_seed);
  EXPECT_EQ(a.attacker, b.attacker);
  EXPECT_EQ(a.patroller, b.patroller);
  EXPECT_NE(episode_streams(7, 4).game_seed, a.game_seed);
  EXPECT_NE(episode_streams(8, 3).game_seed, a.game_seed);
  EXPECT_NE(a.attacker, a.patroller);
}

}  // namespace
}  // namespace gsgi

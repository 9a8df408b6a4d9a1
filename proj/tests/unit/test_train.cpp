#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <mutex>
#include <json.hpp>
#include <thread>
#include <unordered_map>

#include "gsgi/agent/weights.hpp"
#include "gsgi/errors.hpp"
#include "gsgi/train/shared_parameters.hpp"
#include "gsgi/train/trainer.hpp"
#include "helpers.hpp"

namespace gsgi::train {
namespace {

agent::NetworkConfig tiny_net() {
  agent::NetworkConfig cfg;
  cfg.use_convlstm = true;
  cfg.feature_channels = 4;
  cfg.mlp_hidden = 8;
  return cfg;
}

agent::TrainConfig tiny_train(int episodes) {
  agent::TrainConfig cfg;
  cfg.total_episodes = episodes;
  cfg.workers = 1;
  cfg.learning_rate = 1e-3;
  return cfg;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gsgi_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

TEST(RmsProp, FirstStepByHand) {
  agent::TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.rmsprop_decay = 0.9;
  cfg.rmsprop_eps = 1e-5;
  cfg.grad_clip_norm = 1e9;
  agent::Network net(tiny_net(), 1);
  const auto before = net.flat_values();
  std::vector<double> g(before.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::sin(0.1 * i);
  RmsProp opt(g.size(), cfg);
  EXPECT_EQ(opt.step(net, g), 1.0);
  const auto after = net.flat_values();
  for (std::size_t i = 0; i < g.size(); i += 97) {
    const double s = 0.1 * g[i] * g[i];
    EXPECT_NEAR(after[i], before[i] - 0.01 * g[i] / (std::sqrt(s) + 1e-5), 1e-12);
  }
}

TEST(RmsProp, ClipScalesToTheNormBound) {
  agent::TrainConfig cfg;
  cfg.grad_clip_norm = 40.0;
  agent::Network net(tiny_net(), 2);
  std::vector<double> g(net.parameter_count(), 0.0);
  g[0] = 240.0;
  g[1] = 320.0;  // norm 400
  EXPECT_DOUBLE_EQ(global_norm(g), 400.0);
  RmsProp opt(g.size(), cfg);
  EXPECT_DOUBLE_EQ(opt.step(net, g), 0.1);
  const double s0 = (1 - cfg.rmsprop_decay) * 24.0 * 24.0;
  EXPECT_NEAR(opt.square_avg()[0], s0, 1e-12);
}

TEST(RmsProp, TwoStepsAreNotOneDoubledStep) {
  agent::TrainConfig cfg;
  cfg.grad_clip_norm = 1e9;
  agent::Network a(tiny_net(), 3), b(tiny_net(), 3);
  std::vector<double> g(a.parameter_count(), 0.5);
  std::vector<double> g2(g.size(), 1.0);
  RmsProp oa(g.size(), cfg), ob(g.size(), cfg);
  oa.step(a, g);
  oa.step(a, g);
  ob.step(b, g2);
  // Second step by hand: s1 = 0.01 * 0.25, s2 = 0.99 s1 + 0.01 * 0.25.
  const double w0 = agent::Network(tiny_net(), 3).flat_values()[0];
  const double s1 = 0.01 * 0.25;
  const double s2 = 0.99 * s1 + 0.01 * 0.25;
  const double expect = w0 - 1e-4 * 0.5 / (std::sqrt(s1) + 1e-5) -
                        1e-4 * 0.5 / (std::sqrt(s2) + 1e-5);
  EXPECT_NEAR(a.flat_values()[0], expect, 1e-12);
  EXPECT_NE(a.flat_values()[0], b.flat_values()[0]);
}

TEST(RmsProp, RejectsSizeMismatch) {
  agent::Network net(tiny_net(), 4);
  RmsProp opt(net.parameter_count(), agent::TrainConfig{});
  EXPECT_THROW(opt.step(net, std::vector<double>(3)), UsageError);
}

TEST(SharedParameters, NonFiniteGradientIsRejected) {
  SharedParameters shared(agent::Network(tiny_net(), 5), agent::TrainConfig{});
  const auto before = shared.snapshot().net.flat_values();
  std::vector<double> g(before.size(), 0.1);
  g[7] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(shared.apply_update(g), 0u);
  g[7] = std::numeric_limits<double>::infinity();
  EXPECT_EQ(shared.apply_update(g), 0u);
  EXPECT_EQ(shared.rejected_updates(), 2u);
  EXPECT_EQ(shared.snapshot().net.flat_values(), before);
  g[7] = 0.1;
  EXPECT_EQ(shared.apply_update(g), 1u);
}

// Every snapshot must equal the parameters recorded right after the update
// that produced its version.
TEST(SharedParameters, SnapshotsAreNeverTorn) {
  agent::NetworkConfig cfg = tiny_net();
  cfg.use_convlstm = false;
  cfg.feature_channels = 2;
  cfg.mlp_hidden = 2;
  SharedParameters shared(agent::Network(cfg, 6), agent::TrainConfig{});
  std::mutex m;
  std::unordered_map<std::uint64_t, std::uint64_t> by_version;
  by_version[0] = agent::weights_checksum(shared.snapshot().net);
  shared.set_update_observer([&](std::uint64_t v, const agent::Network& net) {
    std::lock_guard lock(m);
    by_version[v] = agent::weights_checksum(net);
  });
  const std::size_t n = shared.snapshot().net.parameter_count();

  std::vector<std::pair<std::uint64_t, std::uint64_t>> seen;
  {
    std::vector<std::jthread> writers;
    for (int w = 0; w < 8; ++w) {
      writers.emplace_back([&, w] {
        std::vector<double> g(n);
        for (int k = 0; k < 200; ++k) {
          for (std::size_t i = 0; i < n; ++i) g[i] = std::cos(w + 0.3 * k + i);
          shared.apply_update(g);
        }
      });
    }
    for (int i = 0; i < 10000; ++i) {
      const Snapshot s = shared.snapshot();
      seen.emplace_back(s.version, agent::weights_checksum(s.net));
    }
  }
  EXPECT_EQ(shared.version(), 1600u);
  std::lock_guard lock(m);
  for (const auto& [version, sum] : seen) {
    ASSERT_TRUE(by_version.contains(version));
    ASSERT_EQ(by_version[version], sum) << "version " << version;
  }
}

TEST(Train, DeterministicRunsAreIdentical) {
  const GameConfig game;
  const auto d = random_density_map(7, 11);
  const auto attacker = make_attacker_policy("heuristic");
  TrainOptions opts;
  opts.deterministic = true;
  opts.log_every = 3;
  auto cfg = tiny_train(7);
  cfg.workers = 4;
  const auto a = train(cfg, tiny_net(), game, d, attacker, 3, opts);
  const auto b = train(cfg, tiny_net(), game, d, attacker, 3, opts);
  EXPECT_EQ(a.log, b.log);
  EXPECT_EQ(a.log.to_csv(), b.log.to_csv());
  EXPECT_EQ(a.weights.flat_values(), b.weights.flat_values());
  ASSERT_EQ(a.log.records.size(), 3u);
  EXPECT_EQ(a.log.records[0].episodes, 3);
  EXPECT_EQ(a.log.records[1].episodes, 6);
  EXPECT_EQ(a.log.records[2].episodes, 7);
  for (const auto& r : a.log.records) EXPECT_EQ(r.wall_clock_s, 0.0);
  EXPECT_EQ(a.worker_episodes, (std::vector<int>{7}));
  EXPECT_GT(a.updates, 0u);

  const auto c = train(cfg, tiny_net(), game, d, attacker, 4, opts);
  EXPECT_NE(a.weights.flat_values(), c.weights.flat_values());
}

TEST(Train, ParallelWorkersShareTheEpisodeBudget) {
  const GameConfig game;
  const auto d = random_density_map(7, 12);
  auto cfg = tiny_train(12);
  cfg.workers = 3;
  TrainOptions opts;
  opts.log_every = 4;
  const auto r = train(cfg, tiny_net(), game, d, make_attacker_policy("heuristic"), 5, opts);
  ASSERT_EQ(r.worker_episodes.size(), 3u);
  int total = 0;
  for (int e : r.worker_episodes) total += e;
  EXPECT_EQ(total, 12);
  ASSERT_FALSE(r.log.records.empty());
  EXPECT_EQ(r.log.records.back().episodes, 12);
  for (const auto& rec : r.log.records) {
    EXPECT_TRUE(std::isfinite(rec.mean_reward));
    EXPECT_GT(rec.mean_length, 0.0);
    EXPECT_LE(rec.mean_length, game.horizon);
  }
}

TEST(Train, LeavesInputsUntouched) {
  const GameConfig game;
  const auto d = random_density_map(7, 13);
  const DensityMap copy = d;
  const auto tc = tiny_train(2);
  const auto nc = tiny_net();
  TrainOptions opts;
  opts.deterministic = true;
  train(tc, nc, game, d, make_attacker_policy("heuristic"), 1, opts);
  EXPECT_EQ(d.values(), copy.values());
  EXPECT_EQ(nc, tiny_net());
}

TEST(Train, WritesCheckpointsAndManifests) {
  const auto dir = scratch_dir("ckpt");
  const GameConfig game;
  const auto d = random_density_map(7, 14);
  TrainOptions opts;
  opts.deterministic = true;
  opts.checkpoint_every = 2;
  opts.checkpoint_dir = dir;
  const auto r = train(tiny_train(4), tiny_net(), game, d,
                       make_attacker_policy("heuristic"), 9, opts);
  for (const char* stem : {"checkpoint_2", "checkpoint_4", "final"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / (std::string(stem) + ".maa3c"))) << stem;
    EXPECT_TRUE(std::filesystem::exists(dir / (std::string(stem) + ".json"))) << stem;
  }
  const auto loaded = agent::load_weights(dir / "final.maa3c", tiny_net());
  EXPECT_EQ(loaded.flat_values(), r.weights.flat_values());
  const auto j = nlohmann::json::parse(testing::read_file((dir / "checkpoint_2.json").string()));
  EXPECT_EQ(j.at("episodes").get<int>(), 2);
  EXPECT_EQ(j.at("seed").get<int>(), 9);
  EXPECT_TRUE(j.contains("network"));
  EXPECT_TRUE(j.contains("game"));
  std::filesystem::remove_all(dir);
}

TEST(Train, NonFiniteLossStopsTraining) {
  const auto dir = scratch_dir("nonfinite");
  const GameConfig game;
  const auto d = random_density_map(7, 15);
  auto cfg = tiny_train(20);
  cfg.learning_rate = 1e300;
  TrainOptions opts;
  opts.deterministic = true;
  opts.checkpoint_dir = dir;
  EXPECT_THROW(train(cfg, tiny_net(), game, d, make_attacker_policy("heuristic"), 1, opts),
               TrainingError);
  EXPECT_TRUE(std::filesystem::exists(dir / "nonfinite_segment.txt"));
  std::filesystem::remove_all(dir);
}

TEST(Train, RejectsMismatchedConfigs) {
  const GameConfig game;
  const auto attacker = make_attacker_policy("heuristic");
  EXPECT_THROW(train(tiny_train(1), tiny_net(), game, random_density_map(5, 1), attacker, 1),
               ConfigError);
  auto nc = tiny_net();
  nc.grid_side = 5;
  EXPECT_THROW(train(tiny_train(1), nc, game, random_density_map(7, 1), attacker, 1),
               ConfigError);
  auto tc = tiny_train(1);
  tc.gamma = 1.5;
  EXPECT_THROW(train(tc, tiny_net(), game, random_density_map(7, 1), attacker, 1),
               ConfigError);
}

TEST(TrainingLog, CsvLayout) {
  TrainingLog log;
  log.records.push_back({10, 1.5, 60.25, 0.1, 2.0, 1.25, 0.0});
  const std::string csv = log.to_csv();
  EXPECT_EQ(csv.rfind(TrainingLog::kCsvHeader, 0), 0u);
  EXPECT_NE(csv.find("\n10,1.5,60.25,"), std::string::npos) << csv;
}

}  // namespace
}  // namespace gsgi::train

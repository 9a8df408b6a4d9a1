#pragma once

// Parallel advantage actor-critic training of the patroller network against
// a scripted attacker.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsgi/adversary.hpp"
#include "gsgi/agent/loss.hpp"
#include "gsgi/agent/network.hpp"
#include "gsgi/env.hpp"

namespace gsgi::train {

struct LogRecord {
  int episodes = 0;
  double mean_reward = 0.0;
  double mean_length = 0.0;
  double policy_loss = 0.0;  // per step
  double value_loss = 0.0;   // per step
  double entropy = 0.0;      // per step
  double wall_clock_s = 0.0;
  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

struct TrainingLog {
  std::vector<LogRecord> records;

  static constexpr const char* kCsvHeader =
      "episodes,mean_reward,mean_length,policy_loss,value_loss,entropy,wall_clock_s";
  std::string to_csv() const;
  void save_csv(const std::filesystem::path& path) const;
  friend bool operator==(const TrainingLog&, const TrainingLog&) = default;
};

struct TrainOptions {
  int log_every = 100;
  int checkpoint_every = 1000;
  // No checkpoints are written when empty.
  std::filesystem::path checkpoint_dir;
  // Run a single worker on the calling thread and log wall_clock_s as 0 so
  // that the whole log is reproducible bit for bit.
  bool deterministic = false;
  std::uint64_t init_seed = 0;
  std::function<void(const LogRecord&)> on_log;
};

struct TrainResult {
  agent::Network weights;
  TrainingLog log;
  std::uint64_t updates = 0;
  std::uint64_t rejected_updates = 0;
  std::vector<int> worker_episodes;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws TrainingError on a non-finite loss, after writing the offending
// segment to checkpoint_dir/nonfinite_segment.txt when a directory is set.
TrainResult train(const agent::TrainConfig& train_cfg,
                  const agent::NetworkConfig& net_cfg, const GameConfig& game_cfg,
                  const DensityMap& density, const AttackerPolicy& attacker,
                  std::uint64_t seed, const TrainOptions& options = {});

// Sidecar written next to each checkpoint.
std::string checkpoint_manifest(int episodes, const agent::TrainConfig& train_cfg,
                                const agent::NetworkConfig& net_cfg,
                                const GameConfig& game_cfg, std::uint64_t seed);

}  // namespace gsgi::train

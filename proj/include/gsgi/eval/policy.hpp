#pragma once

// Patroller policies that can be played in evaluation matches.

#include <memory>
#include <optional>
#include <string>

#include "gsgi/agent/network.hpp"
#include "gsgi/env.hpp"

namespace gsgi::eval {

class PatrollerPolicy {
 public:
  virtual ~PatrollerPolicy() = default;
  virtual std::string name() const = 0;
  // Reset per-episode memory.
  virtual void begin_episode() {}
  virtual PatrollerAction act(const GameState& state, const GameConfig& game,
                              const DensityMap& density, Rng& rng) = 0;
  // Independent copy for another worker.
  virtual std::unique_ptr<PatrollerPolicy> clone() const = 0;
};

// Uniform over the five moves.
class RandomPatroller : public PatrollerPolicy {
 public:
  std::string name() const override { return "random"; }
  PatrollerAction act(const GameState&, const GameConfig&, const DensityMap&,
                      Rng& rng) override;
  std::unique_ptr<PatrollerPolicy> clone() const override;
};

class StillPatroller : public PatrollerPolicy {
 public:
  std::string name() const override { return "still"; }
  PatrollerAction act(const GameState&, const GameConfig&, const DensityMap&,
                      Rng&) override {
    return Move::stand_still;
  }
  std::unique_ptr<PatrollerPolicy> clone() const override;
};

// Plays a trained network, carrying its ConvLSTM state through the episode.
class NetworkPatroller : public PatrollerPolicy {
 public:
  explicit NetworkPatroller(agent::Network net, bool greedy = true);

  std::string name() const override;
  void begin_episode() override;
  PatrollerAction act(const GameState& state, const GameConfig& game,
                      const DensityMap& density, Rng& rng) override;
  std::unique_ptr<PatrollerPolicy> clone() const override;

  const agent::Network& network() const { return net_; }
  // Output of the most recent act() call.
  const std::optional<agent::ForwardOutput>& last_output() const { return last_; }

 private:
  agent::Network net_;
  bool greedy_;
  nn::ConvLstmState lstm_;
  std::optional<agent::ForwardOutput> last_;
};

}  // namespace gsgi::eval

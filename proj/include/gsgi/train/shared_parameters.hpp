#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <shared_mutex>
#include <span>
#include <vector>

#include "gsgi/agent/loss.hpp"
#include "gsgi/agent/network.hpp"

namespace gsgi::train {

// RMSProp with global-norm clipping:
//   g <- g * min(1, clip / |g|)
//   s <- decay * s + (1 - decay) * g^2
//   w <- w - lr * g / (sqrt(s) + eps)
class RmsProp {
 public:
  RmsProp() = default;
  RmsProp(std::size_t size, const agent::TrainConfig& cfg);

  // Returns the scale applied by clipping (1 when not clipped).
  double step(agent::Network& net, std::span<const double> grads);
  const std::vector<double>& square_avg() const { return square_avg_; }

 private:
  std::vector<double> square_avg_;
  double lr_ = 0.0;
  double decay_ = 0.0;
  double eps_ = 0.0;
  double clip_ = 0.0;
};

double global_norm(std::span<const double> grads);

struct Snapshot {
  agent::Network net;
  std::uint64_t version = 0;
};

// The global model. Updates are serialized; snapshots never observe a
// partially applied update.
class SharedParameters {
 public:
  SharedParameters(agent::Network net, const agent::TrainConfig& cfg);

  Snapshot snapshot() const;

  // Applies a flat gradient (parameters() order). Gradients containing NaN or
  // Inf are rejected: nothing changes and the current version is returned.
  std::uint64_t apply_update(std::span<const double> grads);

  std::uint64_t version() const;
  std::uint64_t rejected_updates() const { return rejected_.load(); }

  // Called under the write lock after each applied update.
  void set_update_observer(
      std::function<void(std::uint64_t, const agent::Network&)> observer);

 private:
  mutable std::shared_mutex mutex_;
  agent::Network net_;
  RmsProp optimizer_;
  std::uint64_t version_ = 0;
  std::atomic<std::uint64_t> rejected_{0};
  std::function<void(std::uint64_t, const agent::Network&)> observer_;
};

}  // namespace gsgi::train
